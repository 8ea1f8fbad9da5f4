#pragma once

#include "scrambench/catalog.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace scrambench {

/// Each significant incident carries at least this loss.
inline constexpr std::uint64_t kSignificantLossFloorUsd = 1000;
inline constexpr std::size_t kMaxFailedControls = 5;

using MaturityVector = std::array<MaturityLevel, kControlCount>;

/// Integer USD attributed to each implicated control.
using LossAllocation = std::map<ControlId, std::uint64_t>;

/// One municipality's questionnaire. Counts and losses cover the
/// three-year collection window.
struct ParticipantResponse {
    std::string participant_id;
    std::optional<std::uint64_t> population;
    MaturityVector maturity{};
    std::uint64_t incident_count = 0;
    std::uint64_t total_loss_usd = 0;
    std::set<ControlId> failed_controls;

    MaturityLevel level(ControlId id) const { return maturity[id.ordinal()]; }
    void set_level(ControlId id, MaturityLevel level) { maturity[id.ordinal()] = level; }
};

enum class ViolationCode {
    LossBelowSignificanceFloor,
    MissingFailureAttribution,
    TooManyFailureAttributions,
    FailuresWithoutIncident,
    LossWithoutIncident,
};

std::string_view to_string(ViolationCode code);

struct Violation {
    ViolationCode code;
    std::string detail;
};

std::vector<Violation> validate_response(const ParticipantResponse &response);

enum class Cohort {
    All,
    PopulationOver25k,
    Population15kTo25k,
    Population5kTo15k,
    PopulationUnder5k,
    PopulationUnreported,
};

inline constexpr std::array<Cohort, 6> kAllCohorts = {
    Cohort::All,
    Cohort::PopulationOver25k,
    Cohort::Population15kTo25k,
    Cohort::Population5kTo15k,
    Cohort::PopulationUnder5k,
    Cohort::PopulationUnreported};

std::string_view cohort_tag(Cohort cohort) noexcept;
std::string_view cohort_description(Cohort cohort) noexcept;
std::optional<Cohort> parse_cohort_tag(std::string_view tag);

/// Population band of a response (never Cohort::All).
Cohort population_cohort(const ParticipantResponse &response) noexcept;

/// Every response lands in All plus exactly one population band.
std::map<Cohort, std::vector<ParticipantResponse>>
assign_cohorts(const std::vector<ParticipantResponse> &responses);

// Questionnaire file I/O. Maturity levels travel as "not" | "partial" | "large" | "full".
nlohmann::ordered_json response_to_json(const ParticipantResponse &response);
ParticipantResponse response_from_json(const nlohmann::json &j);
ParticipantResponse load_response(const std::string &path);
void save_response(const ParticipantResponse &response, const std::string &path);

/// Converts the spreadsheet-style matrix layout to a response. See README
/// for the layout: a header row naming the level columns, 22 control rows
/// marked with "x", and key/value rows for the numeric answers.
ParticipantResponse import_matrix_csv(std::string_view csv_text);

} // namespace scrambench
