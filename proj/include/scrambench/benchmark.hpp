#pragma once

#include "scrambench/aggregation.hpp"
#include "scrambench/catalog.hpp"
#include "scrambench/response.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace scrambench {

inline constexpr std::uint64_t kDefaultYears = 3;

/// Splits a respondent's total loss equally across its flagged controls.
/// Leftover dollars go to the lowest-ordered flagged control so the shares
/// sum to the total exactly.
LossAllocation allocate_losses(const ParticipantResponse &response);

using LevelCounts = std::array<std::uint64_t, kLevelCount>;

struct BenchmarkReport {
    std::string cohort;
    std::uint64_t participants = 0;
    std::array<double, kControlCount> control_mean{};
    std::array<double, kCategoryCount> category_mean{};
    double overall_mean = 0.0;
    std::array<LevelCounts, kControlCount> level_counts{};
    std::uint64_t incident_total = 0;
    std::uint64_t years = kDefaultYears;
    double frequency = 0.0; // incidents per municipality-year
    std::uint64_t loss_total_usd = 0;
    std::optional<double> loss_avg_per_incident_usd;
    std::array<std::uint64_t, kLossBucketCount> loss_buckets{};
    std::array<std::uint64_t, kControlCount> attributed_loss_usd{};
};

BenchmarkReport compute_benchmarks(const AggregateReport &agg, std::uint64_t years = kDefaultYears);

/// Response histogram for control 1a (multi-factor authentication).
LevelCounts mfa_level_counts(const AggregateReport &agg);

nlohmann::ordered_json benchmark_to_json(const BenchmarkReport &report);
BenchmarkReport benchmark_from_json(const nlohmann::json &j);

// Flat tables for plotting.
std::string benchmark_controls_csv(const BenchmarkReport &report);
std::string benchmark_categories_csv(const BenchmarkReport &report);
std::string benchmark_summary_csv(const BenchmarkReport &report);

} // namespace scrambench
