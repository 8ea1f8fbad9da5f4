#include "scrambench/benchmark.hpp"
#include "scrambench/error.hpp"
#include "scrambench/format.hpp"

#include <sstream>

namespace scrambench {

using nlohmann::json;
using nlohmann::ordered_json;

LossAllocation allocate_losses(const ParticipantResponse &r) {
    LossAllocation out;
    if (r.incident_count == 0 || r.failed_controls.empty())
        return out;
    const std::uint64_t k = r.failed_controls.size();
    const std::uint64_t share = r.total_loss_usd / k;
    const std::uint64_t remainder = r.total_loss_usd % k;
    for (ControlId id : r.failed_controls)
        out[id] = share;
    out.begin()->second += remainder;
    return out;
}

BenchmarkReport compute_benchmarks(const AggregateReport &agg, std::uint64_t years) {
    if (years < 1)
        throw Error(ErrorCode::InvalidInput, "years must be at least 1");
    if (agg.participants == 0)
        throw Error(ErrorCode::CohortTooSmall, "cohort '" + agg.cohort + "' is empty");

    BenchmarkReport b;
    b.cohort = agg.cohort;
    b.participants = agg.participants;
    b.years = years;
    const double n = static_cast<double>(agg.participants);
    const auto &t = agg.totals;

    std::array<double, kCategoryCount> category_sum{};
    std::array<int, kCategoryCount> category_size{};
    double overall = 0.0;
    for (ControlId id : all_controls()) {
        const auto i = id.ordinal();
        b.control_mean[i] = static_cast<double>(t[slots::maturity_index(id)]) / (3.0 * n);
        for (MaturityLevel level : kAllLevels)
            b.level_counts[i][static_cast<std::size_t>(level_index(level))] =
                t[slots::level_count(id, level)];
        b.attributed_loss_usd[i] = t[slots::attributed_loss(id)];
        const auto c = static_cast<std::size_t>(id.category() - 1);
        category_sum[c] += b.control_mean[i];
        ++category_size[c];
        overall += b.control_mean[i];
    }
    for (std::size_t c = 0; c < kCategoryCount; ++c)
        b.category_mean[c] = category_sum[c] / category_size[c];
    b.overall_mean = overall / static_cast<double>(kControlCount);

    b.incident_total = t[slots::kIncidentCount];
    b.frequency = static_cast<double>(b.incident_total) / (n * static_cast<double>(years));
    b.loss_total_usd = t[slots::kTotalLoss];
    if (b.incident_total > 0)
        b.loss_avg_per_incident_usd =
            static_cast<double>(b.loss_total_usd) / static_cast<double>(b.incident_total);
    for (LossBucket bucket : kAllLossBuckets)
        b.loss_buckets[static_cast<std::size_t>(bucket)] = t[slots::loss_bucket(bucket)];
    return b;
}

LevelCounts mfa_level_counts(const AggregateReport &agg) {
    const ControlId mfa = *ControlId::parse("1a");
    LevelCounts out{};
    for (MaturityLevel level : kAllLevels)
        out[static_cast<std::size_t>(level_index(level))] = agg.totals[slots::level_count(mfa, level)];
    return out;
}

ordered_json benchmark_to_json(const BenchmarkReport &b) {
    ordered_json j;
    j["cohort"] = b.cohort;
    j["participants"] = b.participants;
    j["years"] = b.years;
    j["overall_mean"] = round6(b.overall_mean);

    ordered_json categories = ordered_json::array();
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        ordered_json row;
        row["category"] = c + 1;
        row["name"] = std::string(category_name(static_cast<int>(c + 1)));
        row["mean"] = round6(b.category_mean[c]);
        categories.push_back(std::move(row));
    }
    j["categories"] = std::move(categories);

    ordered_json controls = ordered_json::array();
    for (ControlId id : all_controls()) {
        const auto i = id.ordinal();
        ordered_json row;
        row["control"] = id.code();
        row["mean"] = round6(b.control_mean[i]);
        ordered_json counts;
        for (MaturityLevel level : kAllLevels)
            counts[std::string(level_token(level))] =
                b.level_counts[i][static_cast<std::size_t>(level_index(level))];
        row["level_counts"] = std::move(counts);
        row["attributed_loss_usd"] = b.attributed_loss_usd[i];
        controls.push_back(std::move(row));
    }
    j["controls"] = std::move(controls);

    j["incident_total"] = b.incident_total;
    j["frequency"] = round6(b.frequency);
    j["loss_total_usd"] = b.loss_total_usd;
    if (b.loss_avg_per_incident_usd)
        j["loss_avg_per_incident_usd"] = whole_usd(*b.loss_avg_per_incident_usd);
    else
        j["loss_avg_per_incident_usd"] = nullptr;
    ordered_json buckets;
    for (LossBucket bucket : kAllLossBuckets)
        buckets[std::string(loss_bucket_label(bucket))] =
            b.loss_buckets[static_cast<std::size_t>(bucket)];
    j["loss_buckets"] = std::move(buckets);
    return j;
}

BenchmarkReport benchmark_from_json(const json &j) {
    try {
        BenchmarkReport b;
        b.cohort = j.at("cohort").get<std::string>();
        b.participants = j.at("participants").get<std::uint64_t>();
        b.years = j.at("years").get<std::uint64_t>();
        b.overall_mean = j.at("overall_mean").get<double>();
        for (const auto &row : j.at("categories")) {
            const auto c = row.at("category").get<std::size_t>();
            if (c < 1 || c > kCategoryCount)
                throw Error(ErrorCode::ParseError, "bad category index");
            b.category_mean[c - 1] = row.at("mean").get<double>();
        }
        std::array<bool, kControlCount> seen{};
        for (const auto &row : j.at("controls")) {
            auto id = ControlId::parse(row.at("control").get<std::string>());
            if (!id)
                throw Error(ErrorCode::ParseError, "unknown control " + row.at("control").dump());
            const auto i = id->ordinal();
            seen[i] = true;
            b.control_mean[i] = row.at("mean").get<double>();
            for (MaturityLevel level : kAllLevels)
                b.level_counts[i][static_cast<std::size_t>(level_index(level))] =
                    row.at("level_counts").at(std::string(level_token(level))).get<std::uint64_t>();
            b.attributed_loss_usd[i] = row.at("attributed_loss_usd").get<std::uint64_t>();
        }
        for (ControlId id : all_controls())
            if (!seen[id.ordinal()])
                throw Error(ErrorCode::ParseError, "benchmark missing control " + id.code());
        b.incident_total = j.at("incident_total").get<std::uint64_t>();
        b.loss_total_usd = j.at("loss_total_usd").get<std::uint64_t>();
        // Recomputed from the exact integers rather than the rounded fields.
        b.frequency = static_cast<double>(b.incident_total) /
                      (static_cast<double>(b.participants) * static_cast<double>(b.years));
        if (b.incident_total > 0)
            b.loss_avg_per_incident_usd =
                static_cast<double>(b.loss_total_usd) / static_cast<double>(b.incident_total);
        for (LossBucket bucket : kAllLossBuckets)
            b.loss_buckets[static_cast<std::size_t>(bucket)] =
                j.at("loss_buckets").at(std::string(loss_bucket_label(bucket))).get<std::uint64_t>();
        return b;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, std::string("benchmark report: ") + e.what());
    }
}

std::string benchmark_controls_csv(const BenchmarkReport &b) {
    std::ostringstream out;
    out << "cohort,control,category,mean,not,partial,large,full,attributed_loss_usd\n";
    for (ControlId id : all_controls()) {
        const auto i = id.ordinal();
        out << b.cohort << ',' << id.code() << ',' << id.category() << ','
            << fixed6(b.control_mean[i]);
        for (auto c : b.level_counts[i])
            out << ',' << c;
        out << ',' << b.attributed_loss_usd[i] << '\n';
    }
    return out.str();
}

std::string benchmark_categories_csv(const BenchmarkReport &b) {
    std::ostringstream out;
    out << "cohort,category,name,mean\n";
    for (std::size_t c = 0; c < kCategoryCount; ++c)
        out << b.cohort << ',' << c + 1 << ",\"" << category_name(static_cast<int>(c + 1))
            << "\"," << fixed6(b.category_mean[c]) << '\n';
    return out.str();
}

std::string benchmark_summary_csv(const BenchmarkReport &b) {
    std::ostringstream out;
    out << "cohort,participants,overall_mean,incident_total,years,frequency,loss_total_usd,"
           "loss_avg_per_incident_usd";
    for (LossBucket bucket : kAllLossBuckets)
        out << ",bucket_" << loss_bucket_label(bucket);
    out << '\n';
    out << b.cohort << ',' << b.participants << ',' << fixed6(b.overall_mean) << ','
        << b.incident_total << ',' << b.years << ',' << fixed6(b.frequency) << ','
        << b.loss_total_usd << ',';
    if (b.loss_avg_per_incident_usd)
        out << whole_usd(*b.loss_avg_per_incident_usd);
    for (auto c : b.loss_buckets)
        out << ',' << c;
    out << '\n';
    return out.str();
}

} // namespace scrambench
