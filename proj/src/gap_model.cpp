#include "scrambench/gap_model.hpp"
#include "scrambench/error.hpp"
#include "scrambench/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace scrambench {

using nlohmann::json;
using nlohmann::ordered_json;

ControlWeights prorate_weights(const ControlLosses &losses, double loss_group_weight) {
    if (!(loss_group_weight > 0.0 && loss_group_weight < 1.0))
        throw Error(ErrorCode::InvalidInput, "loss-group weight must lie strictly between 0 and 1");

    ControlWeights w;
    w.loss_group_weight = loss_group_weight;
    std::uint64_t loss_sum = 0;
    std::size_t loss_controls = 0;
    for (std::size_t i = 0; i < kControlCount; ++i) {
        w.in_loss_group[i] = losses[i] > 0;
        if (losses[i] > 0) {
            loss_sum += losses[i];
            ++loss_controls;
        }
    }
    const std::size_t quiet_controls = kControlCount - loss_controls;

    double loss_share = loss_group_weight;
    if (loss_controls == 0)
        loss_share = 0.0;
    else if (quiet_controls == 0)
        loss_share = 1.0;
    const double quiet_weight =
        quiet_controls == 0 ? 0.0 : (1.0 - loss_share) / static_cast<double>(quiet_controls);

    double min_loss_weight = 1.0;
    for (std::size_t i = 0; i < kControlCount; ++i) {
        if (w.in_loss_group[i]) {
            w.weight[i] = loss_share * static_cast<double>(losses[i]) / static_cast<double>(loss_sum);
            min_loss_weight = std::min(min_loss_weight, w.weight[i]);
        } else {
            w.weight[i] = quiet_weight;
        }
    }
    w.ordering_violated = loss_controls > 0 && quiet_controls > 0 && min_loss_weight < quiet_weight;
    return w;
}

double net_weighted_deviation(const DeviationInput &d, const ControlWeights &w) {
    double x = 0.0;
    for (std::size_t i = 0; i < kControlCount; ++i) {
        if (d.own[i] < 0.0 || d.own[i] > 1.0 || d.group_average[i] < 0.0 ||
            d.group_average[i] > 1.0)
            throw Error(ErrorCode::InvalidInput, "maturity fractions must lie in [0, 1]");
        x += (d.own[i] - d.group_average[i]) * w.weight[i];
    }
    return x;
}

LossCurve fit_loss_curve(const std::vector<Anchor> &anchors) {
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto &a : anchors) {
        if (!(a.multiplier > 0.0))
            throw Error(ErrorCode::InvalidInput, "loss multipliers must be positive");
        sxy += a.deviation * std::log(a.multiplier);
        sxx += a.deviation * a.deviation;
    }
    if (sxx == 0.0)
        throw Error(ErrorCode::NoInformativeAnchor, "every anchor sits at zero deviation");
    const double k = -sxy / sxx;
    return LossCurve{k == 0.0 ? 0.0 : k, anchors};
}

std::vector<Anchor> default_anchors(const BenchmarkReport &bench, double band, double headroom) {
    if (!(band > 0.0))
        throw Error(ErrorCode::NoInformativeAnchor, "band must be positive");
    if (!(headroom >= 1.0))
        throw Error(ErrorCode::InvalidInput, "headroom multiplier must be at least 1");
    const std::uint64_t respondents =
        std::accumulate(bench.loss_buckets.begin(), bench.loss_buckets.end(), std::uint64_t{0});
    if (bench.incident_total == 0 || !bench.loss_avg_per_incident_usd || respondents == 0)
        throw Error(ErrorCode::NoLossData, "cohort '" + bench.cohort + "' reported no losses");
    const double average = *bench.loss_avg_per_incident_usd;

    std::vector<double> losses;
    if (respondents == 1) {
        losses.push_back(static_cast<double>(bench.loss_total_usd));
    } else {
        for (LossBucket bucket : kAllLossBuckets) {
            const double lower = static_cast<double>(loss_bucket_lower(bucket));
            const double upper = static_cast<double>(loss_bucket_upper(bucket));
            const double representative =
                bucket == LossBucket::From500k ? lower * headroom : 0.5 * (lower + upper);
            losses.insert(losses.end(), bench.loss_buckets[static_cast<std::size_t>(bucket)],
                          representative);
        }
    }
    std::sort(losses.begin(), losses.end(), std::greater<>());

    const std::size_t n = losses.size();
    const double step = 2.0 * band / static_cast<double>(n);
    const std::size_t average_slot = (n + 1) / 2;
    std::vector<Anchor> anchors;
    anchors.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == average_slot)
            anchors.push_back({0.0, 1.0});
        const std::size_t slot = i < average_slot ? i : i + 1;
        anchors.push_back({-band + step * static_cast<double>(slot), losses[i] / average});
    }
    if (average_slot == n)
        anchors.push_back({0.0, 1.0});
    return anchors;
}

double defense_gap_index(double deviation, double exponent) {
    return std::exp(-exponent * deviation);
}

double defense_gap_index(double deviation, const LossCurve &curve) {
    return defense_gap_index(deviation, curve.exponent);
}

ModelParams build_model(const BenchmarkReport &bench, const ModelConfig &config) {
    ModelParams p;
    p.cohort = bench.cohort;
    p.participants = bench.participants;
    p.years = bench.years;
    p.group_average = bench.control_mean;
    p.weights = prorate_weights(bench.attributed_loss_usd, config.loss_group_weight);
    if (p.weights.ordering_violated)
        p.warnings.push_back("DegenerateWeights: a loss-group control is weighted below the "
                             "no-loss controls at this loss-group weight");
    p.curve = fit_loss_curve(default_anchors(bench, config.band, config.headroom));
    p.fitted_exponent = p.curve.exponent;
    if (config.exponent_override) {
        p.curve.exponent = *config.exponent_override;
        p.exponent_overridden = true;
    }
    p.frequency = bench.frequency;
    p.avg_loss_usd = *bench.loss_avg_per_incident_usd;
    p.band = config.band;
    p.headroom = config.headroom;
    return p;
}

ordered_json model_to_json(const ModelParams &p) {
    ordered_json j;
    j["cohort"] = p.cohort;
    j["participants"] = p.participants;
    j["years"] = p.years;
    j["frequency"] = round6(p.frequency);
    j["avg_loss_usd"] = whole_usd(p.avg_loss_usd);
    j["exponent"] = round6(p.curve.exponent);
    j["fitted_exponent"] = round6(p.fitted_exponent);
    j["exponent_overridden"] = p.exponent_overridden;
    j["band"] = round6(p.band);
    j["headroom"] = round6(p.headroom);
    j["loss_group_weight"] = round6(p.weights.loss_group_weight);
    ordered_json controls = ordered_json::array();
    for (ControlId id : all_controls()) {
        const auto i = id.ordinal();
        ordered_json row;
        row["control"] = id.code();
        row["group_average"] = round6(p.group_average[i]);
        row["weight"] = round6(p.weights.weight[i]);
        row["loss_group"] = p.weights.in_loss_group[i];
        controls.push_back(std::move(row));
    }
    j["controls"] = std::move(controls);
    ordered_json anchors = ordered_json::array();
    for (const auto &a : p.curve.anchors)
        anchors.push_back({round6(a.deviation), round6(a.multiplier)});
    j["anchors"] = std::move(anchors);
    j["warnings"] = p.warnings;
    return j;
}

ModelParams model_from_json(const json &j) {
    try {
        ModelParams p;
        p.cohort = j.at("cohort").get<std::string>();
        p.participants = j.at("participants").get<std::uint64_t>();
        p.years = j.at("years").get<std::uint64_t>();
        p.frequency = j.at("frequency").get<double>();
        p.avg_loss_usd = j.at("avg_loss_usd").get<double>();
        p.curve.exponent = j.at("exponent").get<double>();
        p.fitted_exponent = j.value("fitted_exponent", p.curve.exponent);
        p.exponent_overridden = j.value("exponent_overridden", false);
        p.band = j.at("band").get<double>();
        p.headroom = j.value("headroom", kDefaultHeadroom);
        p.weights.loss_group_weight = j.at("loss_group_weight").get<double>();
        std::array<bool, kControlCount> seen{};
        for (const auto &row : j.at("controls")) {
            auto id = ControlId::parse(row.at("control").get<std::string>());
            if (!id)
                throw Error(ErrorCode::ParseError, "unknown control " + row.at("control").dump());
            const auto i = id->ordinal();
            seen[i] = true;
            p.group_average[i] = row.at("group_average").get<double>();
            p.weights.weight[i] = row.at("weight").get<double>();
            p.weights.in_loss_group[i] = row.at("loss_group").get<bool>();
        }
        std::string missing;
        for (ControlId id : all_controls())
            if (!seen[id.ordinal()])
                missing += (missing.empty() ? "" : ", ") + id.code();
        if (!missing.empty())
            throw Error(ErrorCode::ParseError, "model missing controls: " + missing);
        const double total = std::accumulate(p.weights.weight.begin(), p.weights.weight.end(), 0.0);
        // Weights are stored to six places.
        if (std::abs(total - 1.0) > 1e-4)
            throw Error(ErrorCode::ParseError, "control weights sum to " + std::to_string(total));
        if (j.contains("anchors"))
            for (const auto &a : j.at("anchors"))
                p.curve.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        if (j.contains("warnings"))
            p.warnings = j.at("warnings").get<std::vector<std::string>>();
        return p;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, std::string("model params: ") + e.what());
    }
}

ModelParams load_model(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        return model_from_json(json::parse(in));
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

} // namespace scrambench
