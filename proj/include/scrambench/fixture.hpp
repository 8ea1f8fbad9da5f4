#pragma once

#include "scrambench/response.hpp"

#include <vector>

namespace scrambench {

/// Synthetic 83-municipality cohort built to reproduce every aggregate the
/// study discloses: population bands of 8/9/29/16/21, four incidents worth
/// $628,208 in total, the per-control attributed losses of the weight table,
/// a loss distribution of (2, 1, 0, 1) across the four ranges, and an MFA
/// histogram with 23 "not" and 4 "full" answers. Individual maturity answers
/// are generated deterministically.
std::vector<ParticipantResponse> pilot_fixture();

} // namespace scrambench
