#pragma once

// Shared generators and reference implementations for the test binaries.
// The reference code is written from the model description, not from the
// library, and is kept deliberately naive.

#include "scrambench/aggregation.hpp"
#include "scrambench/benchmark.hpp"
#include "scrambench/catalog.hpp"
#include "scrambench/gap_model.hpp"
#include "scrambench/response.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using namespace scrambench;

// Published observed losses per control.
inline const std::map<std::string, std::uint64_t> &published_control_losses() {
    static const std::map<std::string, std::uint64_t> t = {
        {"5b", 130780}, {"5a", 116250}, {"8a", 114530}, {"8b", 114530}, {"2b", 100000},
        {"6b", 14530},  {"8c", 14530},  {"1a", 11529},  {"2a", 11529},
    };
    return t;
}

// Published prorated weights, in percent, as printed (one decimal).
inline const std::map<std::string, double> &published_weights() {
    static const std::map<std::string, double> t = {
        {"5b", 17.7}, {"5a", 15.7}, {"8a", 15.5}, {"8b", 15.5}, {"2b", 13.5},
        {"6b", 2.0},  {"8c", 2.0},  {"1a", 1.6},  {"2a", 1.6},
    };
    return t;
}

inline ControlLosses published_loss_array() {
    ControlLosses losses{};
    for (const auto &[code, usd] : published_control_losses())
        losses[ControlId::parse(code)->ordinal()] = usd;
    return losses;
}

inline ControlId control(const char *code) { return *ControlId::parse(code); }

// Loss group splits W_L pro rata, everyone else splits the rest evenly.
inline std::array<double, kControlCount> reference_weights(const ControlLosses &losses, double wl) {
    double total = 0;
    int quiet = 0;
    for (auto l : losses) {
        total += static_cast<double>(l);
        if (l == 0)
            ++quiet;
    }
    std::array<double, kControlCount> w{};
    for (std::size_t i = 0; i < kControlCount; ++i) {
        if (losses[i] > 0)
            w[i] = wl * static_cast<double>(losses[i]) / total;
        else
            w[i] = (1.0 - wl) / quiet;
    }
    return w;
}

inline ParticipantResponse random_response(std::mt19937_64 &rng, const std::string &id) {
    ParticipantResponse r;
    r.participant_id = id;
    std::uniform_int_distribution<int> level(0, 3);
    for (ControlId c : all_controls())
        r.set_level(c, static_cast<MaturityLevel>(level(rng)));
    std::uniform_int_distribution<int> pop_kind(0, 4);
    switch (pop_kind(rng)) {
    case 0: break;
    case 1: r.population = std::uniform_int_distribution<std::uint64_t>(25000, 400000)(rng); break;
    case 2: r.population = std::uniform_int_distribution<std::uint64_t>(15000, 24999)(rng); break;
    case 3: r.population = std::uniform_int_distribution<std::uint64_t>(5000, 14999)(rng); break;
    default: r.population = std::uniform_int_distribution<std::uint64_t>(0, 4999)(rng); break;
    }
    if (std::bernoulli_distribution(0.3)(rng)) {
        r.incident_count = std::uniform_int_distribution<std::uint64_t>(1, 3)(rng);
        r.total_loss_usd = std::uniform_int_distribution<std::uint64_t>(
            1000 * r.incident_count, 3'000'000)(rng);
        const int k = std::uniform_int_distribution<int>(1, 5)(rng);
        std::uniform_int_distribution<std::size_t> pick(0, kControlCount - 1);
        while (static_cast<int>(r.failed_controls.size()) < k)
            r.failed_controls.insert(all_controls()[pick(rng)]);
    }
    return r;
}

inline std::vector<ParticipantResponse> random_responses(std::mt19937_64 &rng, std::size_t n) {
    std::vector<ParticipantResponse> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(random_response(rng, "p" + std::to_string(i)));
    return out;
}

inline AggregationVector encode_response(const ParticipantResponse &r) {
    return encode(r, allocate_losses(r));
}

// Column sums over plain 64-bit integers.
inline std::array<std::uint64_t, slots::kCount>
reference_sum(const std::vector<ParticipantResponse> &responses) {
    std::array<std::uint64_t, slots::kCount> s{};
    for (const auto &r : responses) {
        const auto v = encode_response(r);
        for (std::size_t i = 0; i < slots::kCount; ++i)
            s[i] += v[i];
    }
    return s;
}

// Brute-force least squares for ln y = -k x: golden-section on the squared
// residual over a wide bracket.
inline double grid_fit_exponent(const std::vector<Anchor> &anchors) {
    auto sse = [&](double k) {
        double e = 0;
        for (const auto &a : anchors) {
            const double r = std::log(a.multiplier) + k * a.deviation;
            e += r * r;
        }
        return e;
    };
    double lo = -200, hi = 200;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 400; ++i) {
        const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        if (sse(a) < sse(b))
            hi = b;
        else
            lo = a;
    }
    return 0.5 * (lo + hi);
}

// Benchmark report with only the fields the loss model reads.
inline BenchmarkReport pilot_loss_report() {
    BenchmarkReport b;
    b.cohort = "all";
    b.participants = 83;
    b.years = 3;
    b.incident_total = 4;
    b.loss_total_usd = 628208;
    b.loss_avg_per_incident_usd = 157052.0;
    b.frequency = 4.0 / 249.0;
    b.loss_buckets = {2, 1, 0, 1};
    for (const auto &[code, usd] : published_control_losses())
        b.attributed_loss_usd[ControlId::parse(code)->ordinal()] = usd;
    for (std::size_t i = 0; i < kControlCount; ++i)
        b.control_mean[i] = 0.5;
    return b;
}

} // namespace testsupport
