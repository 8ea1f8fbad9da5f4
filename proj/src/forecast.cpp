#include "scrambench/forecast.hpp"
#include "scrambench/error.hpp"
#include "scrambench/format.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scrambench {

RiskForecast forecast(const ModelParams &params, double deviation) {
    RiskForecast f;
    f.deviation = deviation;
    f.dgi = defense_gap_index(deviation, params.curve);
    f.incident_size_usd = f.dgi * params.avg_loss_usd;
    f.annual_risk_usd = params.frequency * f.incident_size_usd;
    f.pool_fair_price_usd = params.frequency * params.avg_loss_usd;
    f.extrapolated = std::abs(deviation) > params.band + 1e-12;
    return f;
}

ControlFractions maturity_fractions(const MaturityVector &levels) {
    ControlFractions out{};
    for (std::size_t i = 0; i < kControlCount; ++i)
        out[i] = level_score(levels[i]);
    return out;
}

double deviation_of(const ModelParams &params, const ControlFractions &own) {
    return net_weighted_deviation(DeviationInput{own, params.group_average}, params.weights);
}

std::vector<SweepPoint> sweep(const ModelParams &params, double band, std::size_t steps) {
    if (steps < 2)
        throw Error(ErrorCode::InvalidInput, "a sweep needs at least 2 steps");
    if (!(band > 0.0))
        throw Error(ErrorCode::InvalidInput, "sweep band must be positive");
    std::vector<SweepPoint> out;
    out.reserve(steps);
    const double last = static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) {
        // Symmetric construction so the middle point of an odd grid is exactly 0.
        const double t = static_cast<double>(i);
        double x = band * (2.0 * t - last) / last;
        if (2 * i == steps - 1)
            x = 0.0;
        const RiskForecast f = forecast(params, x);
        out.push_back({x, f.dgi, f.annual_risk_usd, f.incident_size_usd});
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint> &series) {
    std::ostringstream out;
    out << "x,dgi,annual_risk_usd,incident_size_usd\n";
    for (const auto &p : series)
        out << fixed6(p.deviation) << ',' << fixed6(p.dgi) << ',' << whole_usd(p.annual_risk_usd)
            << ',' << whole_usd(p.incident_size_usd) << '\n';
    return out.str();
}

std::vector<MarginalGain> marginal_control_ranking(const ModelParams &params,
                                                   const MaturityVector &own) {
    const double x = deviation_of(params, maturity_fractions(own));
    const double base = forecast(params, x).annual_risk_usd;
    std::vector<MarginalGain> out;
    for (ControlId id : all_controls()) {
        const MaturityLevel level = own[id.ordinal()];
        if (level == MaturityLevel::FullyImplemented)
            continue;
        // One level is exactly a third; the deviation is linear in own scores.
        const double raised = x + params.weights[id] / 3.0;
        out.push_back({id, level, base - forecast(params, raised).annual_risk_usd});
    }
    std::stable_sort(out.begin(), out.end(), [](const MarginalGain &a, const MarginalGain &b) {
        return a.risk_reduction_usd > b.risk_reduction_usd;
    });
    return out;
}

} // namespace scrambench
