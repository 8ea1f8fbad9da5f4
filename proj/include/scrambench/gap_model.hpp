#pragma once

// Defense Gap Index construction: loss-prorated control weights, the net
// weighted deviation of one organisation from its group, and the
// exponential loss curve that turns that deviation into a loss multiplier.

#include "scrambench/benchmark.hpp"
#include "scrambench/catalog.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace scrambench {

using ControlLosses = std::array<std::uint64_t, kControlCount>;
using ControlFractions = std::array<double, kControlCount>;

inline constexpr double kDefaultLossGroupWeight = 0.85;
inline constexpr double kDefaultBand = 0.30;
inline constexpr double kDefaultHeadroom = 1.5;

struct ControlWeights {
    double loss_group_weight = kDefaultLossGroupWeight;
    ControlFractions weight{};
    std::array<bool, kControlCount> in_loss_group{};
    /// Set when some loss-group control ends up weighted below a no-loss
    /// control; the computation still proceeds.
    bool ordering_violated = false;

    double operator[](ControlId id) const { return weight[id.ordinal()]; }
};

/// Loss-group controls share `loss_group_weight` in proportion to their
/// attributed losses; the remaining weight is split equally across the
/// controls without losses. If either group is empty the other takes all
/// of the weight.
ControlWeights prorate_weights(const ControlLosses &attributed_losses,
                               double loss_group_weight = kDefaultLossGroupWeight);

struct DeviationInput {
    ControlFractions own{};
    ControlFractions group_average{};
};

/// Sum over controls of (own - group average) x weight. Positive means
/// better than the group.
double net_weighted_deviation(const DeviationInput &input, const ControlWeights &weights);

struct Anchor {
    double deviation = 0.0;
    double multiplier = 1.0;
};

struct LossCurve {
    double exponent = 0.0;
    std::vector<Anchor> anchors;
};

/// Least squares of ln(y) = -k x through the origin:
/// k = -sum(x ln y) / sum(x^2).
LossCurve fit_loss_curve(const std::vector<Anchor> &anchors);

/// Anchors reconstructed from the aggregate loss distribution. Loss values
/// come from bucket representatives (midpoints; the open top bucket uses its
/// lower bound x headroom; a single loss is known exactly from the total).
/// The n losses, largest first, and the group average fill n + 1 evenly
/// spaced slots across [-band, +band]; the average takes the middle slot
/// and is pinned at (0, 1).
std::vector<Anchor> default_anchors(const BenchmarkReport &bench, double band = kDefaultBand,
                                    double headroom = kDefaultHeadroom);

/// exp(-k x).
double defense_gap_index(double deviation, const LossCurve &curve);
double defense_gap_index(double deviation, double exponent);

struct ModelConfig {
    double loss_group_weight = kDefaultLossGroupWeight;
    double band = kDefaultBand;
    double headroom = kDefaultHeadroom;
    std::optional<double> exponent_override;
};

/// Everything a participant needs to forecast privately.
struct ModelParams {
    std::string cohort;
    std::uint64_t participants = 0;
    std::uint64_t years = kDefaultYears;
    ControlFractions group_average{};
    ControlWeights weights;
    LossCurve curve;
    double fitted_exponent = 0.0;
    bool exponent_overridden = false;
    double frequency = 0.0;
    double avg_loss_usd = 0.0;
    double band = kDefaultBand;
    double headroom = kDefaultHeadroom;
    std::vector<std::string> warnings;
};

ModelParams build_model(const BenchmarkReport &bench, const ModelConfig &config = {});

nlohmann::ordered_json model_to_json(const ModelParams &params);
ModelParams model_from_json(const nlohmann::json &j);
ModelParams load_model(const std::string &path);

} // namespace scrambench
