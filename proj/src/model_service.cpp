#include "scrambench/model_service.hpp"
#include "scrambench/error.hpp"
#include "scrambench/format.hpp"
#include "scrambench/pipeline.hpp"

#include <httplib.h>

namespace scrambench {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ApiResponse error_response(int status, std::string_view code, const std::string &message,
                           const std::vector<std::string> &missing = {}) {
    ordered_json j;
    j["error"] = code;
    j["message"] = message;
    if (!missing.empty())
        j["missing_controls"] = missing;
    return {status, j.dump(), "application/json"};
}

} // namespace

ModelApi::ModelApi(std::string model_file, ModelParams params)
    : model_file_(std::move(model_file)), params_(std::move(params)) {}

ModelApi ModelApi::from_file(const std::string &path) {
    std::string text = read_text_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return ModelApi(std::move(text), model_from_json(j));
}

ApiResponse ModelApi::controls() const {
    ordered_json arr = ordered_json::array();
    for (ControlId id : all_controls()) {
        ordered_json row;
        row["control"] = id.code();
        row["category"] = id.category();
        row["category_name"] = std::string(category_name(id.category()));
        row["title"] = std::string(id.title());
        row["group_average"] = round6(params_.group_average[id.ordinal()]);
        row["weight"] = round6(params_.weights.weight[id.ordinal()]);
        arr.push_back(std::move(row));
    }
    ordered_json levels = ordered_json::array();
    for (MaturityLevel level : kAllLevels)
        levels.push_back({{"token", level_token(level)}, {"percent", level_percent(level)}});
    return {200, ordered_json{{"controls", arr}, {"levels", levels}}.dump()};
}

ApiResponse ModelApi::model() const { return {200, model_file_}; }

ordered_json forecast_to_json(const RiskForecast &f, const std::vector<MarginalGain> &ranking) {
    ordered_json j;
    j["x"] = round6(f.deviation);
    j["dgi"] = round6(f.dgi);
    j["annual_risk_usd"] = whole_usd(f.annual_risk_usd);
    j["incident_size_usd"] = whole_usd(f.incident_size_usd);
    j["pool_fair_price_usd"] = whole_usd(f.pool_fair_price_usd);
    j["extrapolated"] = f.extrapolated;
    ordered_json rank = ordered_json::array();
    for (const auto &g : ranking) {
        ordered_json row;
        row["control"] = g.control.code();
        row["current"] = level_token(g.current);
        row["annual_risk_reduction_usd"] = round6(g.risk_reduction_usd);
        rank.push_back(std::move(row));
    }
    j["ranking"] = std::move(rank);
    return j;
}

ApiResponse ModelApi::forecast(const std::string &request_body) const {
    json body;
    try {
        body = json::parse(request_body);
    } catch (const json::parse_error &) {
        return error_response(400, "MalformedRequest", "request body is not JSON");
    }
    if (!body.is_object() || !body.contains("maturity") || !body["maturity"].is_object())
        return error_response(400, "MalformedRequest", "body must contain a 'maturity' object");

    ControlFractions own{};
    MaturityVector levels{};
    std::array<bool, kControlCount> seen{};
    bool all_levels = true;
    for (const auto &[key, value] : body["maturity"].items()) {
        const auto id = ControlId::parse(key);
        if (!id)
            return error_response(400, "MalformedRequest", "unknown control '" + key + "'");
        const auto i = id->ordinal();
        if (value.is_string()) {
            const auto level = parse_level_token(value.get<std::string>());
            if (!level)
                return error_response(400, "MalformedRequest", "bad level for " + key);
            own[i] = level_score(*level);
            levels[i] = *level;
        } else if (value.is_number()) {
            const double v = value.get<double>();
            if (!(v >= 0.0 && v <= 1.0))
                return error_response(400, "MalformedRequest", key + " must lie in [0, 1]");
            own[i] = v;
            all_levels = false;
            // Ranking steps from the level at or below the given fraction.
            levels[i] = static_cast<MaturityLevel>(std::min(3, static_cast<int>(v * 3.0 + 1e-9)));
        } else {
            return error_response(400, "MalformedRequest", "bad level for " + key);
        }
        seen[i] = true;
    }
    std::vector<std::string> missing;
    for (ControlId id : all_controls())
        if (!seen[id.ordinal()])
            missing.push_back(id.code());
    if (!missing.empty()) {
        std::string list;
        for (const auto &m : missing)
            list += (list.empty() ? "" : ", ") + m;
        return error_response(422, "ValidationError", "maturity missing controls: " + list, missing);
    }

    const double x = deviation_of(params_, own);
    const RiskForecast f = scrambench::forecast(params_, x);
    if (all_levels)
        return {200, forecast_to_json(f, marginal_control_ranking(params_, levels)).dump()};

    // Fractional input: step each control by up to one level from where it is.
    std::vector<MarginalGain> ranking;
    for (ControlId id : all_controls()) {
        const auto i = id.ordinal();
        if (own[i] >= 1.0)
            continue;
        const double step = std::min(1.0 / 3.0, 1.0 - own[i]);
        const double reduction =
            f.annual_risk_usd -
            scrambench::forecast(params_, x + params_.weights.weight[i] * step).annual_risk_usd;
        ranking.push_back({id, levels[i], reduction});
    }
    std::stable_sort(ranking.begin(), ranking.end(), [](const auto &a, const auto &b) {
        return a.risk_reduction_usd > b.risk_reduction_usd;
    });
    return {200, forecast_to_json(f, ranking).dump()};
}

struct ModelService::Impl {
    ModelApi api;
    httplib::Server server;
    Impl(ModelApi a) : api(std::move(a)) {}
};

ModelService::ModelService(ModelApi api, std::optional<std::string> static_dir)
    : impl_(std::make_unique<Impl>(std::move(api))) {
    auto &srv = impl_->server;
    const auto reply = [](httplib::Response &res, const ApiResponse &r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    srv.Get("/api/controls", [this, reply](const httplib::Request &, httplib::Response &res) {
        reply(res, impl_->api.controls());
    });
    srv.Get("/api/model", [this, reply](const httplib::Request &, httplib::Response &res) {
        reply(res, impl_->api.model());
    });
    srv.Post("/api/forecast", [this, reply](const httplib::Request &req, httplib::Response &res) {
        reply(res, impl_->api.forecast(req.body));
    });
    if (static_dir && !srv.set_mount_point("/", *static_dir))
        throw Error(ErrorCode::IoError, "static directory not found: " + *static_dir);
}

ModelService::~ModelService() { stop(); }

std::uint16_t ModelService::bind(const std::string &host, std::uint16_t port) {
    auto &srv = impl_->server;
    int bound = 0;
    if (port == 0)
        bound = srv.bind_to_any_port(host);
    else
        bound = srv.bind_to_port(host, port) ? port : -1;
    if (bound <= 0)
        throw Error(ErrorCode::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
    return static_cast<std::uint16_t>(bound);
}

void ModelService::run() { impl_->server.listen_after_bind(); }

void ModelService::stop() {
    if (impl_)
        impl_->server.stop();
}

} // namespace scrambench
