#include "scrambench/pipeline.hpp"
#include "scrambench/error.hpp"
#include "scrambench/format.hpp"
#include "scrambench/protocol.hpp"

#include <fstream>
#include <memory>
#include <sstream>

namespace scrambench {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json provenance(const ComputationConfig &c) {
    const ComputationConfig defaults;
    ordered_json p;
    p["tool"] = "scrambench";
    p["layout"] = slots::kLayoutVersion;
    p["computation_id"] = c.computation_id;
    p["modulus"] = std::to_string(c.modulus);
    p["years"] = c.years;
    p["loss_group_weight"] = round6(c.loss_group_weight);
    p["band"] = round6(c.band);
    p["headroom"] = round6(c.headroom);
    p["min_cohort_size"] = c.min_cohort_size;
    if (c.exponent_override)
        p["exponent_override"] = round6(*c.exponent_override);
    else
        p["exponent_override"] = nullptr;
    p["sweep_steps"] = c.sweep_steps;

    ordered_json overrides = ordered_json::array();
    if (c.computation_id != defaults.computation_id) overrides.push_back("computation_id");
    if (c.years != defaults.years) overrides.push_back("years");
    if (c.loss_group_weight != defaults.loss_group_weight) overrides.push_back("loss_group_weight");
    if (c.band != defaults.band) overrides.push_back("band");
    if (c.headroom != defaults.headroom) overrides.push_back("headroom");
    if (c.min_cohort_size != defaults.min_cohort_size) overrides.push_back("min_cohort_size");
    if (c.exponent_override) overrides.push_back("exponent_override");
    if (c.sweep_steps != defaults.sweep_steps) overrides.push_back("sweep_steps");
    p["overrides"] = std::move(overrides);
    return p;
}

void require_valid(const std::vector<ParticipantResponse> &responses) {
    std::string problems;
    std::map<std::string, std::size_t> first_seen;
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const auto [it, fresh] = first_seen.emplace(responses[i].participant_id, i + 1);
        if (!fresh)
            problems += "\n  response #" + std::to_string(i + 1) +
                        ": DuplicateParticipant (same id as response #" + std::to_string(it->second) + ")";
    }
    for (std::size_t i = 0; i < responses.size(); ++i)
        for (const auto &v : validate_response(responses[i]))
            problems += "\n  response #" + std::to_string(i + 1) + ": " +
                        std::string(to_string(v.code)) + " (" + v.detail + ")";
    if (!problems.empty())
        throw Error(ErrorCode::InvalidInput, "invalid responses:" + problems);
}

namespace {

struct Encoded {
    AggregationVector vector;
    Cohort band;
};

std::map<Cohort, AggregateReport> aggregate_plaintext(const ComputationConfig &config,
                                                      const std::vector<Encoded> &encoded,
                                                      std::vector<std::string> &warnings) {
    std::map<Cohort, std::vector<AggregationVector>> columns;
    for (const auto &e : encoded) {
        columns[Cohort::All].push_back(e.vector);
        columns[e.band].push_back(e.vector);
    }
    std::map<Cohort, AggregateReport> out;
    for (Cohort c : kAllCohorts) {
        try {
            out.emplace(c, plaintext_sum(columns[c], cohort_tag(c), config.min_cohort_size));
        } catch (const Error &e) {
            if (c == Cohort::All || e.code() != ErrorCode::CohortTooSmall)
                throw;
            warnings.push_back(std::string("cohort ") + std::string(cohort_tag(c)) + " skipped: " +
                               e.what());
        }
    }
    return out;
}

std::map<Cohort, AggregateReport> aggregate_secure(const ComputationConfig &config,
                                                   const std::vector<Encoded> &encoded,
                                                   std::vector<std::string> &warnings) {
    std::unique_ptr<ShareRng> rng;
    if (config.seed)
        rng = std::make_unique<SeededRng>(*config.seed);
    else
        rng = std::make_unique<SystemRng>();

    const std::size_t m = config.server_count;
    std::vector<std::unique_ptr<AggregationServer>> servers;
    for (std::size_t i = 1; i <= m; ++i)
        servers.push_back(std::make_unique<AggregationServer>(i, m, config.computation_id));

    for (const auto &e : encoded) {
        // One session per participant; each server sees one bundle per cohort.
        const std::string token = make_session_token(*rng);
        std::vector<std::vector<ShareBundle>> per_server(m);
        for (Cohort c : {Cohort::All, e.band}) {
            auto bundles = split(e.vector, m, *rng, cohort_tag(c), token);
            for (std::size_t i = 0; i < m; ++i)
                per_server[i].push_back(std::move(bundles[i]));
        }
        for (std::size_t i = 0; i < m; ++i) {
            LoopbackTransport transport(*servers[i]);
            submit_bundles(transport, config.computation_id, per_server[i]);
        }
    }

    std::map<Cohort, AggregateReport> out;
    for (Cohort c : kAllCohorts) {
        std::vector<CohortPartial> partials;
        for (auto &server : servers) {
            LoopbackTransport transport(*server);
            partials.push_back(request_partial(transport, config.computation_id, cohort_tag(c)));
        }
        try {
            out.emplace(c, combine(partials, config.min_cohort_size));
        } catch (const Error &e) {
            if (c == Cohort::All || e.code() != ErrorCode::CohortTooSmall)
                throw;
            warnings.push_back(std::string("cohort ") + std::string(cohort_tag(c)) + " skipped: " +
                               e.what());
        }
    }
    return out;
}

} // namespace

PipelineResult run_pipeline(const ComputationConfig &config,
                            const std::vector<ParticipantResponse> &responses) {
    if (config.modulus != FieldElement::kModulus)
        throw Error(ErrorCode::ModulusMismatch,
                    "only modulus " + std::to_string(FieldElement::kModulus) + " is supported");
    require_valid(responses);

    std::vector<Encoded> encoded;
    encoded.reserve(responses.size());
    for (const auto &r : responses)
        encoded.push_back({encode(r, allocate_losses(r)), population_cohort(r)});

    PipelineResult result;
    result.aggregates = config.plaintext ? aggregate_plaintext(config, encoded, result.warnings)
                                         : aggregate_secure(config, encoded, result.warnings);
    for (const auto &[cohort, agg] : result.aggregates) {
        if (agg.participants < kSmallCohortWarning)
            result.warnings.push_back("cohort " + agg.cohort + " has only " +
                                      std::to_string(agg.participants) +
                                      " participants; small-cohort aggregates can leak");
        result.benchmarks.emplace(cohort, compute_benchmarks(agg, config.years));
    }

    // The model file is the contract downstream consumers read, so later
    // stages use the serialized form.
    const ModelParams fitted = build_model(result.benchmarks.at(Cohort::All), config.model_config());
    result.model = model_from_json(model_to_json(fitted));
    for (const auto &w : fitted.warnings)
        result.warnings.push_back(w);
    result.sweep = sweep(result.model, config.band, config.sweep_steps);
    return result;
}

ordered_json aggregate_to_json(const AggregateReport &r) {
    ordered_json j;
    j["layout"] = slots::kLayoutVersion;
    j["cohort"] = r.cohort;
    j["participants"] = r.participants;
    ordered_json values;
    for (std::size_t s = 0; s < slots::kCount; ++s)
        values[slots::name(s)] = r.totals[s];
    j["slots"] = std::move(values);
    return j;
}

AggregateReport aggregate_from_json(const json &j) {
    try {
        if (j.at("layout").get<std::string>() != slots::kLayoutVersion)
            throw Error(ErrorCode::LayoutMismatch, "aggregate uses layout " + j.at("layout").dump());
        AggregateReport r;
        r.cohort = j.at("cohort").get<std::string>();
        r.participants = j.at("participants").get<std::uint64_t>();
        const auto &values = j.at("slots");
        for (std::size_t s = 0; s < slots::kCount; ++s)
            r.totals[s] = values.at(slots::name(s)).get<std::uint64_t>();
        return r;
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, std::string("aggregate report: ") + e.what());
    }
}

std::string with_provenance(const ordered_json &body, const ComputationConfig &config) {
    ordered_json doc;
    doc["provenance"] = provenance(config);
    for (const auto &[key, value] : body.items())
        doc[key] = value;
    return doc.dump(2) + "\n";
}

std::string csv_with_provenance(const std::string &csv, const ComputationConfig &config) {
    return "# provenance " + provenance(config).dump() + "\n" + csv;
}

void write_text_file(const std::filesystem::path &path, const std::string &contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << contents;
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::filesystem::path> write_outputs(const PipelineResult &result,
                                                 const ComputationConfig &config,
                                                 const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto emit = [&](const std::string &name, const std::string &contents) {
        const auto path = dir / name;
        write_text_file(path, contents);
        written.push_back(path);
    };

    std::string controls_csv, categories_csv, summary_csv;
    for (const auto &[cohort, agg] : result.aggregates) {
        const std::string tag(cohort_tag(cohort));
        emit("aggregate-" + tag + ".json", with_provenance(aggregate_to_json(agg), config));
        const auto &bench = result.benchmarks.at(cohort);
        emit("benchmark-" + tag + ".json", with_provenance(benchmark_to_json(bench), config));

        const auto strip_header = [](const std::string &csv, bool keep) {
            return keep ? csv : csv.substr(csv.find('\n') + 1);
        };
        controls_csv += strip_header(benchmark_controls_csv(bench), controls_csv.empty());
        categories_csv += strip_header(benchmark_categories_csv(bench), categories_csv.empty());
        summary_csv += strip_header(benchmark_summary_csv(bench), summary_csv.empty());
    }
    emit("benchmark-controls.csv", csv_with_provenance(controls_csv, config));
    emit("benchmark-categories.csv", csv_with_provenance(categories_csv, config));
    emit("benchmark-summary.csv", csv_with_provenance(summary_csv, config));
    emit("model.json", with_provenance(model_to_json(result.model), config));
    emit("sweep.csv", csv_with_provenance(sweep_csv(result.sweep), config));
    return written;
}

} // namespace scrambench
