#include "scrambench/fixture.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace scrambench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Rough per-control maturity targets in catalog order; 1a is set exactly below.
constexpr std::array<double, kControlCount> kTargets = {
    0.33, 0.55, 0.40, 0.60, 0.50, 0.45, 0.45, 0.35, 0.45, 0.95, 0.81,
    0.85, 0.79, 0.75, 0.65, 0.60, 0.40, 0.30, 0.35, 0.30, 0.20, 0.70};

MaturityLevel draw_level(double target, std::uint64_t key) {
    const double scaled = 3.0 * target;
    const int lower = static_cast<int>(std::floor(scaled));
    const double u = static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
    const int level = std::min(3, lower + (u < scaled - lower ? 1 : 0));
    return static_cast<MaturityLevel>(level);
}

ControlId control(const char *code) { return *ControlId::parse(code); }

struct Incident {
    std::uint64_t loss;
    std::array<const char *, 5> failures;
    std::size_t failure_count;
};

// Equal splits of these four reproduce the attributed-loss column exactly.
constexpr std::array<Incident, 4> kIncidents = {{
    {500'000, {"2b", "5a", "5b", "8a", "8b"}, 5},
    {72'650, {"5b", "6b", "8a", "8b", "8c"}, 5},
    {32'500, {"5a", "5b", nullptr, nullptr, nullptr}, 2},
    {23'058, {"1a", "2a", nullptr, nullptr, nullptr}, 2},
}};

} // namespace

std::vector<ParticipantResponse> pilot_fixture() {
    struct Band {
        std::size_t count;
        std::uint64_t first;
        std::uint64_t step;
        bool reported;
    };
    const std::array<Band, 5> bands = {{
        {8, 26'000, 9'000, true},
        {9, 15'000, 1'100, true},
        {29, 5'000, 340, true},
        {16, 600, 270, true},
        {21, 0, 0, false},
    }};

    std::vector<ParticipantResponse> out;
    out.reserve(83);
    for (const auto &band : bands) {
        for (std::size_t i = 0; i < band.count; ++i) {
            ParticipantResponse r;
            char id[32];
            std::snprintf(id, sizeof(id), "muni-%03zu", out.size() + 1);
            r.participant_id = id;
            if (band.reported)
                r.population = band.first + band.step * i;
            out.push_back(std::move(r));
        }
    }

    const std::size_t n = out.size();
    for (std::size_t j = 0; j < n; ++j)
        for (ControlId id : all_controls())
            out[j].set_level(id, draw_level(kTargets[id.ordinal()], j * kControlCount + id.ordinal()));

    // MFA: 4 full, 14 large, 42 partial, 23 not (mean index 82 / 249 = 33%).
    const ControlId mfa = control("1a");
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t slot = (j * 37) % n; // spreads the levels across bands
        MaturityLevel level = MaturityLevel::NotImplemented;
        if (slot < 4)
            level = MaturityLevel::FullyImplemented;
        else if (slot < 18)
            level = MaturityLevel::LargelyImplemented;
        else if (slot < 60)
            level = MaturityLevel::PartiallyImplemented;
        out[j].set_level(mfa, level);
    }

    // One incident each, in different population bands.
    const std::array<std::size_t, 4> victims = {3, 20, 50, 70};
    for (std::size_t k = 0; k < kIncidents.size(); ++k) {
        auto &r = out[victims[k]];
        r.incident_count = 1;
        r.total_loss_usd = kIncidents[k].loss;
        for (std::size_t f = 0; f < kIncidents[k].failure_count; ++f)
            r.failed_controls.insert(control(kIncidents[k].failures[f]));
    }
    return out;
}

} // namespace scrambench
