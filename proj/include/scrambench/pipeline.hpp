#pragma once

#include "scrambench/aggregation.hpp"
#include "scrambench/benchmark.hpp"
#include "scrambench/forecast.hpp"
#include "scrambench/gap_model.hpp"
#include "scrambench/response.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace scrambench {

struct ComputationConfig {
    std::string computation_id = "scrambench";
    std::uint64_t modulus = FieldElement::kModulus;
    std::vector<std::string> endpoints; // host:port per server, in server order
    std::size_t server_count = 3;
    std::uint64_t years = kDefaultYears;
    double loss_group_weight = kDefaultLossGroupWeight;
    double band = kDefaultBand;
    double headroom = kDefaultHeadroom;
    std::uint64_t min_cohort_size = kDefaultMinCohortSize;
    std::optional<double> exponent_override;
    std::size_t sweep_steps = 61;

    // Execution settings; they never change results.
    std::optional<std::uint64_t> seed;
    bool plaintext = false;

    ModelConfig model_config() const {
        return {loss_group_weight, band, headroom, exponent_override};
    }
};

/// Analytic settings plus the names of every setting that differs from its
/// default. Embedded in every output file.
nlohmann::ordered_json provenance(const ComputationConfig &config);

struct PipelineResult {
    std::map<Cohort, AggregateReport> aggregates;
    std::map<Cohort, BenchmarkReport> benchmarks;
    ModelParams model;
    std::vector<SweepPoint> sweep;
    std::vector<std::string> warnings;
};

/// Validates, encodes and aggregates the responses for all six cohorts, then
/// benchmarks each cohort and fits the model on the combined cohort. Secure
/// mode runs the sharing protocol over in-process transports; plaintext mode
/// sums encoded vectors directly. Population cohorts below the minimum size
/// are skipped with a warning; the combined cohort must meet it.
PipelineResult run_pipeline(const ComputationConfig &config,
                            const std::vector<ParticipantResponse> &responses);

/// Throws InvalidInput naming each invalid response by position.
void require_valid(const std::vector<ParticipantResponse> &responses);

nlohmann::ordered_json aggregate_to_json(const AggregateReport &report);
AggregateReport aggregate_from_json(const nlohmann::json &j);

/// Writes aggregates, benchmarks (JSON + CSV tables), model.json and
/// sweep.csv. Returns the paths written, in order.
std::vector<std::filesystem::path> write_outputs(const PipelineResult &result,
                                                 const ComputationConfig &config,
                                                 const std::filesystem::path &dir);

/// JSON document with the provenance object as its first member.
std::string with_provenance(const nlohmann::ordered_json &body, const ComputationConfig &config);
/// CSV text preceded by a one-line provenance comment.
std::string csv_with_provenance(const std::string &csv, const ComputationConfig &config);

void write_text_file(const std::filesystem::path &path, const std::string &contents);
std::string read_text_file(const std::filesystem::path &path);

} // namespace scrambench
