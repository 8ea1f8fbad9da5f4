// scrambench: questionnaire validation, secure aggregation, benchmarking and
// risk forecasting for municipal cyber-risk pools.

#include "scrambench/aggregation.hpp"
#include "scrambench/benchmark.hpp"
#include "scrambench/error.hpp"
#include "scrambench/fixture.hpp"
#include "scrambench/forecast.hpp"
#include "scrambench/format.hpp"
#include "scrambench/gap_model.hpp"
#include "scrambench/model_service.hpp"
#include "scrambench/pipeline.hpp"
#include "scrambench/protocol.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <thread>

#include <pthread.h>

namespace fs = std::filesystem;
using namespace scrambench;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void log_line(const std::string &msg) { std::cerr << "scrambench: " << msg << '\n'; }

json parse_json_file(const std::string &path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

void emit(const std::string &out_path, const std::string &contents) {
    if (out_path.empty() || out_path == "-") {
        std::cout << contents;
        return;
    }
    write_text_file(out_path, contents);
    log_line("wrote " + out_path);
}

// Blocks SIGINT/SIGTERM in every thread and calls `on_signal` from a
// dedicated watcher thread when one arrives.
class SignalWatcher {
  public:
    explicit SignalWatcher(std::function<void()> on_signal) {
        sigemptyset(&set_);
        sigaddset(&set_, SIGINT);
        sigaddset(&set_, SIGTERM);
        sigaddset(&set_, SIGUSR1);
        pthread_sigmask(SIG_BLOCK, &set_, nullptr);
        thread_ = std::thread([this, cb = std::move(on_signal)] {
            int sig = 0;
            sigwait(&set_, &sig);
            if (sig != SIGUSR1)
                cb();
        });
    }
    ~SignalWatcher() {
        pthread_kill(thread_.native_handle(), SIGUSR1);
        thread_.join();
    }

  private:
    sigset_t set_{};
    std::thread thread_;
};

struct ConfigFlags {
    ComputationConfig config;
    double exponent = 0.0;
    CLI::Option *exponent_opt = nullptr;
    std::uint64_t seed = 0;
    CLI::Option *seed_opt = nullptr;

    ComputationConfig resolved() const {
        ComputationConfig c = config;
        if (exponent_opt && exponent_opt->count() > 0)
            c.exponent_override = exponent;
        if (seed_opt && seed_opt->count() > 0)
            c.seed = seed;
        return c;
    }
};

void add_model_flags(CLI::App *cmd, ConfigFlags &f) {
    cmd->add_option("--loss-group-weight", f.config.loss_group_weight,
                    "Share of total weight given to controls with attributed losses")
        ->envname("SCRAMBENCH_LOSS_GROUP_WEIGHT")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--band", f.config.band, "Modelled deviation band (+/-)")
        ->envname("SCRAMBENCH_BAND");
    cmd->add_option("--headroom", f.config.headroom, "Multiplier on the top loss bucket's lower bound")
        ->envname("SCRAMBENCH_HEADROOM");
    f.exponent_opt = cmd->add_option("--exponent", f.exponent, "Fixed loss-curve exponent k")
                         ->envname("SCRAMBENCH_EXPONENT");
}

void add_computation_flags(CLI::App *cmd, ConfigFlags &f) {
    cmd->add_option("--computation-id", f.config.computation_id)
        ->envname("SCRAMBENCH_COMPUTATION_ID");
    cmd->add_option("--years", f.config.years, "Years covered by incident counts")
        ->envname("SCRAMBENCH_YEARS")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--min-cohort-size", f.config.min_cohort_size)
        ->envname("SCRAMBENCH_MIN_COHORT_SIZE");
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::vector<std::string> &files) {
    int bad = 0;
    for (const auto &path : files) {
        try {
            const auto violations = validate_response(load_response(path));
            if (violations.empty()) {
                std::cout << path << ": ok\n";
                continue;
            }
            ++bad;
            for (const auto &v : violations)
                std::cout << path << ": " << to_string(v.code) << ": " << v.detail << '\n';
        } catch (const Error &e) {
            ++bad;
            std::cout << e.what() << '\n';
        }
    }
    return bad == 0 ? 0 : 1;
}

int cmd_share(const std::string &response_path, const ConfigFlags &flags,
              const std::string &out_dir) {
    const ComputationConfig config = flags.resolved();
    const ParticipantResponse r = load_response(response_path);
    const auto violations = validate_response(r);
    if (!violations.empty())
        throw Error(ErrorCode::InvalidInput, response_path + ": " +
                                                 std::string(to_string(violations.front().code)));

    std::unique_ptr<ShareRng> rng;
    if (config.seed)
        rng = std::make_unique<SeededRng>(*config.seed);
    else
        rng = std::make_unique<SystemRng>();

    const std::size_t m = config.endpoints.empty() ? config.server_count : config.endpoints.size();
    const AggregationVector v = encode(r, allocate_losses(r));
    const std::string token = make_session_token(*rng);
    std::vector<std::vector<ShareBundle>> per_server(m);
    for (Cohort c : {Cohort::All, population_cohort(r)}) {
        auto bundles = split(v, m, *rng, cohort_tag(c), token);
        for (std::size_t i = 0; i < m; ++i)
            per_server[i].push_back(std::move(bundles[i]));
    }

    if (!config.endpoints.empty()) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto [host, port] = parse_endpoint(config.endpoints[i]);
            TcpTransport transport(host, port);
            submit_bundles(transport, config.computation_id, per_server[i]);
            log_line("submitted shares to server " + std::to_string(i + 1));
        }
        return 0;
    }
    fs::create_directories(out_dir);
    const std::string stem = fs::path(response_path).stem().string();
    for (std::size_t i = 0; i < m; ++i) {
        const fs::path out = fs::path(out_dir) / (stem + ".server" + std::to_string(i + 1) + ".shares");
        write_text_file(out, share_file_contents(config.computation_id, per_server[i]));
        log_line("wrote " + out.string());
    }
    return 0;
}

int cmd_serve_agg(std::size_t index, const ConfigFlags &flags, const std::string &listen,
                  const std::vector<std::string> &preload) {
    const ComputationConfig config = flags.resolved();
    AggregationServer server(index, config.server_count, config.computation_id);
    for (const auto &path : preload)
        ingest_share_file(server, read_text_file(path));
    TcpAggregationService service(server, log_line);
    const auto [host, port] = parse_endpoint(listen);
    const auto bound = service.bind(host, port);
    log_line("aggregation server " + std::to_string(index) + "/" +
             std::to_string(config.server_count) + " listening on " + host + ":" +
             std::to_string(bound));
    SignalWatcher watcher([&service] { service.stop(); });
    service.run();
    log_line("aggregation server stopped");
    return 0;
}

int cmd_seal(const std::string &cohort, const std::string &endpoint, std::size_t index,
             const ConfigFlags &flags, const std::vector<std::string> &share_files,
             const std::string &out) {
    const ComputationConfig config = flags.resolved();
    if (!parse_cohort_tag(cohort))
        throw Error(ErrorCode::UnknownCohort, "no cohort '" + cohort + "'");
    CohortPartial partial;
    if (!endpoint.empty()) {
        const auto [host, port] = parse_endpoint(endpoint);
        TcpTransport transport(host, port);
        partial = request_partial(transport, config.computation_id, cohort);
    } else {
        if (index == 0)
            throw Error(ErrorCode::InvalidInput, "offline sealing needs --index");
        AggregationServer server(index, config.server_count, config.computation_id);
        for (const auto &path : share_files) {
            try {
                ingest_share_file(server, read_text_file(path));
            } catch (const Error &e) {
                throw Error(e.code(), path + ": " + e.what());
            }
        }
        partial = server.seal(cohort);
    }
    emit(out, make_partial(partial, config.computation_id).dump(2) + "\n");
    return 0;
}

int cmd_combine(const std::vector<std::string> &files, const ConfigFlags &flags,
                const std::string &out) {
    const ComputationConfig config = flags.resolved();
    std::vector<CohortPartial> partials;
    for (const auto &path : files) {
        try {
            partials.push_back(partial_from_json(parse_json_file(path)));
        } catch (const Error &e) {
            throw Error(e.code(), path + ": " + e.what());
        }
    }
    const AggregateReport report = combine(partials, config.min_cohort_size);
    if (report.participants < kSmallCohortWarning)
        log_line("warning: cohort " + report.cohort + " has only " +
                 std::to_string(report.participants) + " participants");
    emit(out, with_provenance(aggregate_to_json(report), config));
    return 0;
}

int cmd_benchmark(const std::string &aggregate_path, const ConfigFlags &flags,
                  const std::string &out, const std::string &csv_dir) {
    const ComputationConfig config = flags.resolved();
    const AggregateReport agg = aggregate_from_json(parse_json_file(aggregate_path));
    const BenchmarkReport bench = compute_benchmarks(agg, config.years);
    emit(out, with_provenance(benchmark_to_json(bench), config));
    if (!csv_dir.empty()) {
        fs::create_directories(csv_dir);
        const std::string tag = bench.cohort;
        write_text_file(fs::path(csv_dir) / ("benchmark-controls-" + tag + ".csv"),
                        csv_with_provenance(benchmark_controls_csv(bench), config));
        write_text_file(fs::path(csv_dir) / ("benchmark-categories-" + tag + ".csv"),
                        csv_with_provenance(benchmark_categories_csv(bench), config));
        write_text_file(fs::path(csv_dir) / ("benchmark-summary-" + tag + ".csv"),
                        csv_with_provenance(benchmark_summary_csv(bench), config));
    }
    return 0;
}

int cmd_fit(const std::string &benchmark_path, const ConfigFlags &flags, const std::string &out) {
    const ComputationConfig config = flags.resolved();
    const BenchmarkReport bench = benchmark_from_json(parse_json_file(benchmark_path));
    const ModelParams model = build_model(bench, config.model_config());
    for (const auto &w : model.warnings)
        log_line("warning: " + w);
    emit(out, with_provenance(model_to_json(model), config));
    return 0;
}

int cmd_forecast(const std::string &model_path, std::optional<double> x,
                 const std::string &response_path) {
    const ModelParams params = load_model(model_path);
    std::vector<MarginalGain> ranking;
    double deviation = 0.0;
    if (!response_path.empty()) {
        const ParticipantResponse r = load_response(response_path);
        deviation = deviation_of(params, maturity_fractions(r.maturity));
        ranking = marginal_control_ranking(params, r.maturity);
    } else if (x) {
        deviation = *x;
    } else {
        throw Error(ErrorCode::InvalidInput, "forecast needs --x or --response");
    }
    const RiskForecast f = forecast(params, deviation);
    if (f.extrapolated)
        log_line("warning: deviation outside the modelled band of +/-" + fixed6(params.band));
    std::cout << forecast_to_json(f, ranking).dump(2) << '\n';
    return 0;
}

int cmd_sweep(const std::string &model_path, std::optional<double> band, std::size_t steps,
              const ConfigFlags &flags, const std::string &out) {
    ComputationConfig config = flags.resolved();
    const ModelParams params = load_model(model_path);
    config.band = band.value_or(params.band);
    config.sweep_steps = steps;
    emit(out, csv_with_provenance(sweep_csv(sweep(params, config.band, steps)), config));
    return 0;
}

int cmd_serve_model(const std::string &model_path, const std::string &bind,
                    const std::string &static_dir) {
    ModelService service(ModelApi::from_file(model_path),
                         static_dir.empty() ? std::nullopt : std::optional<std::string>(static_dir));
    const auto [host, port] = parse_endpoint(bind);
    const auto bound = service.bind(host, port);
    log_line("model API on http://" + host + ":" + std::to_string(bound) + "/api/model");
    SignalWatcher watcher([&service] { service.stop(); });
    service.run();
    return 0;
}

int cmd_demo(const ConfigFlags &flags, const std::string &out_dir,
             const std::vector<std::string> &response_files, const std::string &fixture_dir) {
    const ComputationConfig config = flags.resolved();
    std::vector<ParticipantResponse> responses;
    if (response_files.empty()) {
        responses = pilot_fixture();
    } else {
        for (const auto &path : response_files)
            responses.push_back(load_response(path));
    }
    if (!fixture_dir.empty()) {
        fs::create_directories(fixture_dir);
        for (const auto &r : responses)
            save_response(r, (fs::path(fixture_dir) / (r.participant_id + ".json")).string());
        log_line("wrote " + std::to_string(responses.size()) + " questionnaires to " + fixture_dir);
    }
    const PipelineResult result = run_pipeline(config, responses);
    for (const auto &w : result.warnings)
        log_line("warning: " + w);
    for (const auto &path : write_outputs(result, config, out_dir))
        log_line("wrote " + path.string());

    const auto &m = result.model;
    const RiskForecast avg = forecast(m, 0.0);
    std::cout << "participants        " << m.participants << '\n'
              << "frequency           " << fixed6(m.frequency) << " per municipality-year\n"
              << "average loss        " << whole_usd(m.avg_loss_usd) << " USD per incident\n"
              << "loss-curve exponent " << fixed6(m.curve.exponent)
              << (m.exponent_overridden ? " (fixed)" : " (fitted)") << '\n'
              << "fair price (x = 0)  " << whole_usd(avg.annual_risk_usd) << " USD per year\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"scrambench: private municipal cyber-risk benchmarking and forecasting"};
    app.require_subcommand(1);
    ConfigFlags flags;
    int rc = 0;

    auto *validate = app.add_subcommand("validate", "Check questionnaire files");
    std::vector<std::string> validate_files;
    validate->add_option("files", validate_files)->required()->check(CLI::ExistingFile);

    auto *import = app.add_subcommand("import-csv", "Convert a matrix CSV to a questionnaire file");
    std::string csv_path, import_out;
    import->add_option("csv", csv_path)->required()->check(CLI::ExistingFile);
    import->add_option("-o,--out", import_out, "Output JSON (default stdout)");

    auto *share = app.add_subcommand("share", "Secret-share one questionnaire for the servers");
    std::string share_response, share_dir = "shares";
    share->add_option("response", share_response)->required()->check(CLI::ExistingFile);
    share->add_option("--servers", flags.config.server_count)->envname("SCRAMBENCH_SERVERS");
    share->add_option("--endpoints", flags.config.endpoints, "Submit over TCP (host:port per server)")
        ->delimiter(',')
        ->envname("SCRAMBENCH_ENDPOINTS");
    share->add_option("--out-dir", share_dir, "Directory for offline share files");
    share->add_option("--computation-id", flags.config.computation_id)
        ->envname("SCRAMBENCH_COMPUTATION_ID");
    flags.seed_opt = share->add_option("--seed", flags.seed, "Deterministic shares (testing only)");

    auto *serve_agg = app.add_subcommand("serve-agg", "Run one aggregation server");
    std::size_t agg_index = 0;
    std::string agg_listen = "127.0.0.1:7001";
    std::vector<std::string> agg_preload;
    serve_agg->add_option("--index", agg_index, "This server's index (1..M)")->required();
    serve_agg->add_option("--servers", flags.config.server_count)->envname("SCRAMBENCH_SERVERS");
    serve_agg->add_option("--listen", agg_listen)->envname("SCRAMBENCH_LISTEN");
    serve_agg->add_option("--shares", agg_preload, "Share files to ingest before listening")
        ->check(CLI::ExistingFile);
    serve_agg->add_option("--computation-id", flags.config.computation_id)
        ->envname("SCRAMBENCH_COMPUTATION_ID");

    auto *seal = app.add_subcommand("seal", "Freeze a cohort and fetch a server's partial sum");
    std::string seal_cohort = "all", seal_endpoint, seal_out;
    std::size_t seal_index = 0;
    std::vector<std::string> seal_shares;
    seal->add_option("--cohort", seal_cohort);
    seal->add_option("--endpoint", seal_endpoint, "Running server (host:port)");
    seal->add_option("--index", seal_index, "Offline: server index of the share files");
    seal->add_option("--servers", flags.config.server_count)->envname("SCRAMBENCH_SERVERS");
    seal->add_option("--shares", seal_shares, "Offline: share files for this server")
        ->check(CLI::ExistingFile);
    seal->add_option("--computation-id", flags.config.computation_id)
        ->envname("SCRAMBENCH_COMPUTATION_ID");
    seal->add_option("-o,--out", seal_out);

    auto *combine_cmd = app.add_subcommand("combine", "Combine all M partials into an aggregate");
    std::vector<std::string> combine_files;
    std::string combine_out;
    combine_cmd->add_option("partials", combine_files)->required()->check(CLI::ExistingFile);
    add_computation_flags(combine_cmd, flags);
    combine_cmd->add_option("-o,--out", combine_out);

    auto *bench = app.add_subcommand("benchmark", "Benchmark statistics from an aggregate");
    std::string bench_in, bench_out, bench_csv;
    bench->add_option("aggregate", bench_in)->required()->check(CLI::ExistingFile);
    add_computation_flags(bench, flags);
    bench->add_option("-o,--out", bench_out);
    bench->add_option("--csv-dir", bench_csv, "Also write CSV tables here");

    auto *fit = app.add_subcommand("fit", "Build model parameters from a benchmark report");
    std::string fit_in, fit_out;
    fit->add_option("benchmark", fit_in)->required()->check(CLI::ExistingFile);
    add_model_flags(fit, flags);
    fit->add_option("-o,--out", fit_out);

    auto *forecast_cmd = app.add_subcommand("forecast", "Forecast annual risk from model parameters");
    std::string forecast_model, forecast_response;
    double forecast_x = 0.0;
    forecast_cmd->add_option("model", forecast_model)->required()->check(CLI::ExistingFile);
    auto *x_opt = forecast_cmd->add_option("--x", forecast_x, "Net weighted deviation");
    forecast_cmd->add_option("--response", forecast_response, "Own questionnaire file")
        ->check(CLI::ExistingFile);

    auto *sweep_cmd = app.add_subcommand("sweep", "Risk and incident size across the band");
    std::string sweep_model, sweep_out;
    double sweep_band = 0.0;
    std::size_t sweep_steps = 61;
    sweep_cmd->add_option("model", sweep_model)->required()->check(CLI::ExistingFile);
    auto *band_opt = sweep_cmd->add_option("--band", sweep_band);
    sweep_cmd->add_option("--steps", sweep_steps)->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    sweep_cmd->add_option("-o,--out", sweep_out);

    auto *serve_model = app.add_subcommand("serve-model", "Serve the local what-if API");
    std::string serve_model_path, serve_bind = "127.0.0.1:8080", serve_static;
    serve_model->add_option("model", serve_model_path)->required()->check(CLI::ExistingFile);
    serve_model->add_option("--bind", serve_bind)->envname("SCRAMBENCH_BIND");
    serve_model->add_option("--static", serve_static, "Directory of UI assets")
        ->check(CLI::ExistingDirectory);

    auto *demo = app.add_subcommand("demo", "Run the whole pipeline (83-municipality pilot fixture by default)");
    std::string demo_out = "demo-out", demo_fixture_dir;
    std::vector<std::string> demo_responses;
    demo->add_option("--out-dir", demo_out);
    demo->add_option("--responses", demo_responses, "Questionnaire files instead of the fixture")
        ->check(CLI::ExistingFile);
    demo->add_option("--write-fixture", demo_fixture_dir, "Also write the questionnaires used");
    demo->add_option("--servers", flags.config.server_count)->envname("SCRAMBENCH_SERVERS");
    demo->add_flag("--plaintext", flags.config.plaintext, "Sum directly instead of sharing");
    add_computation_flags(demo, flags);
    add_model_flags(demo, flags);
    demo->add_option("--sweep-steps", flags.config.sweep_steps);
    auto *demo_seed = demo->add_option("--seed", flags.seed, "Deterministic shares");

    CLI11_PARSE(app, argc, argv);
    if (demo->parsed())
        flags.seed_opt = demo_seed;

    try {
        if (validate->parsed()) {
            rc = cmd_validate(validate_files);
        } else if (import->parsed()) {
            const auto r = import_matrix_csv(read_text_file(csv_path));
            emit(import_out, response_to_json(r).dump(2) + "\n");
        } else if (share->parsed()) {
            rc = cmd_share(share_response, flags, share_dir);
        } else if (serve_agg->parsed()) {
            rc = cmd_serve_agg(agg_index, flags, agg_listen, agg_preload);
        } else if (seal->parsed()) {
            rc = cmd_seal(seal_cohort, seal_endpoint, seal_index, flags, seal_shares, seal_out);
        } else if (combine_cmd->parsed()) {
            rc = cmd_combine(combine_files, flags, combine_out);
        } else if (bench->parsed()) {
            rc = cmd_benchmark(bench_in, flags, bench_out, bench_csv);
        } else if (fit->parsed()) {
            rc = cmd_fit(fit_in, flags, fit_out);
        } else if (forecast_cmd->parsed()) {
            rc = cmd_forecast(forecast_model,
                              x_opt->count() ? std::optional<double>(forecast_x) : std::nullopt,
                              forecast_response);
        } else if (sweep_cmd->parsed()) {
            rc = cmd_sweep(sweep_model,
                           band_opt->count() ? std::optional<double>(sweep_band) : std::nullopt,
                           sweep_steps, flags, sweep_out);
        } else if (serve_model->parsed()) {
            rc = cmd_serve_model(serve_model_path, serve_bind, serve_static);
        } else if (demo->parsed()) {
            rc = cmd_demo(flags, demo_out, demo_responses, demo_fixture_dir);
        }
    } catch (const Error &e) {
        std::cerr << "scrambench: error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "scrambench: error: " << e.what() << '\n';
        return 2;
    }
    return rc;
}
