#pragma once

#include "scrambench/gap_model.hpp"
#include "scrambench/response.hpp"

#include <string>
#include <vector>

namespace scrambench {

/// frequency x DGI x average loss.
struct RiskForecast {
    double deviation = 0.0;
    double dgi = 1.0;
    double annual_risk_usd = 0.0;
    double incident_size_usd = 0.0;
    /// Annual risk at zero deviation: the pool's expected loss, i.e. the
    /// premium floor before expenses and loading.
    double pool_fair_price_usd = 0.0;
    bool extrapolated = false; // |deviation| beyond the modelled band
};

RiskForecast forecast(const ModelParams &params, double deviation);

/// Deviation of an organisation's own maturity fractions from the group.
double deviation_of(const ModelParams &params, const ControlFractions &own);
ControlFractions maturity_fractions(const MaturityVector &levels);

struct SweepPoint {
    double deviation = 0.0;
    double dgi = 1.0;
    double annual_risk_usd = 0.0;
    double incident_size_usd = 0.0;
};

/// Uniform grid over [-band, +band] including both endpoints.
std::vector<SweepPoint> sweep(const ModelParams &params, double band, std::size_t steps);

/// Columns: x, dgi, annual_risk_usd, incident_size_usd.
std::string sweep_csv(const std::vector<SweepPoint> &series);

struct MarginalGain {
    ControlId control;
    MaturityLevel current;
    double risk_reduction_usd = 0.0; // annual risk now minus after one step up
};

/// Annual-risk reduction from raising each not-yet-full control by one
/// level, largest first; ties keep catalog order.
std::vector<MarginalGain> marginal_control_ranking(const ModelParams &params,
                                                   const MaturityVector &own);

} // namespace scrambench
