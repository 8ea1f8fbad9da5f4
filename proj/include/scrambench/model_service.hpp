#pragma once

#include "scrambench/forecast.hpp"
#include "scrambench/gap_model.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

namespace scrambench {

/// Result of one API call, independent of the HTTP layer.
struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Stateless handlers behind the local model API.
class ModelApi {
  public:
    /// `model_file` is served verbatim by GET /api/model.
    ModelApi(std::string model_file, ModelParams params);
    static ModelApi from_file(const std::string &path);

    ApiResponse controls() const;
    ApiResponse model() const;
    /// Body: {"maturity": {"1a": "partial" | 0.42, ...}} with all 22 controls.
    /// Levels may be the four tokens or a fraction in [0, 1].
    ApiResponse forecast(const std::string &request_body) const;

    const ModelParams &params() const noexcept { return params_; }

  private:
    std::string model_file_;
    ModelParams params_;
};

nlohmann::ordered_json forecast_to_json(const RiskForecast &forecast,
                                        const std::vector<MarginalGain> &ranking);

/// HTTP front end; routes /api/controls, /api/model, /api/forecast and
/// optionally serves static files from `static_dir` at "/".
class ModelService {
  public:
    explicit ModelService(ModelApi api, std::optional<std::string> static_dir = std::nullopt);
    ~ModelService();
    ModelService(const ModelService &) = delete;
    ModelService &operator=(const ModelService &) = delete;

    /// Throws BindFailure. Port 0 picks a free port; the bound port is returned.
    std::uint16_t bind(const std::string &host, std::uint16_t port);
    /// Blocks until stop().
    void run();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace scrambench
