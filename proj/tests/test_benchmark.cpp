#include "support.hpp"

#include "scrambench/error.hpp"
#include "scrambench/fixture.hpp"

#include <doctest.h>

using namespace scrambench;
using testsupport::control;

namespace {

AggregateReport plain(const std::vector<ParticipantResponse> &rs, std::string_view cohort = "all") {
    std::vector<AggregationVector> vs;
    for (const auto &r : rs)
        vs.push_back(testsupport::encode_response(r));
    return plaintext_sum(vs, cohort, 1);
}

ParticipantResponse with_loss(std::uint64_t loss, std::initializer_list<const char *> failed) {
    ParticipantResponse r;
    r.incident_count = 1;
    r.total_loss_usd = loss;
    for (auto c : failed)
        r.failed_controls.insert(control(c));
    return r;
}

} // namespace

TEST_SUITE("benchmark") {

TEST_CASE("loss allocation examples") {
    auto a = allocate_losses(with_loss(100, {"9a", "2b", "5a"}));
    CHECK(a.at(control("2b")) == 34);
    CHECK(a.at(control("5a")) == 33);
    CHECK(a.at(control("9a")) == 33);

    a = allocate_losses(with_loss(500000, {"2b", "5a", "5b", "8a", "8b"}));
    for (auto [id, usd] : a)
        CHECK(usd == 100000);

    a = allocate_losses(with_loss(23058, {"1a", "2a"}));
    CHECK(a.at(control("1a")) == 11529);
    CHECK(a.at(control("2a")) == 11529);

    CHECK(allocate_losses(ParticipantResponse{}).empty());
}

TEST_CASE("property: allocation conserves each respondent's loss") {
    std::mt19937_64 gen(101);
    for (int i = 0; i < 2000; ++i) {
        const auto r = testsupport::random_response(gen, "c");
        const auto a = allocate_losses(r);
        std::uint64_t sum = 0, lo = ~std::uint64_t{0}, hi = 0;
        for (auto [id, usd] : a) {
            CHECK(r.failed_controls.count(id) == 1);
            sum += usd;
            lo = std::min(lo, usd);
            hi = std::max(hi, usd);
        }
        CHECK(sum == (r.incident_count ? r.total_loss_usd : 0));
        if (!a.empty())
            CHECK(hi - lo < a.size()); // shares differ by less than one dollar per control
    }
}

TEST_CASE("property: histogram consistency") {
    std::mt19937_64 gen(102);
    for (int t = 0; t < 100; ++t) {
        const auto rs = testsupport::random_responses(gen, 5 + gen() % 100);
        const auto b = compute_benchmarks(plain(rs));
        for (ControlId id : all_controls()) {
            const auto &h = b.level_counts[id.ordinal()];
            CHECK(h[0] + h[1] + h[2] + h[3] == rs.size());
            const double mean = (h[1] + 2.0 * h[2] + 3.0 * h[3]) / (3.0 * rs.size());
            CHECK(b.control_mean[id.ordinal()] == doctest::Approx(mean).epsilon(1e-12));
        }
        std::uint64_t bucketed = 0, with_incident = 0;
        for (auto c : b.loss_buckets)
            bucketed += c;
        for (const auto &r : rs)
            with_incident += r.incident_count > 0;
        CHECK(bucketed == with_incident);
    }
}

TEST_CASE("property: frequency rises with incidents and falls with clean participants") {
    std::mt19937_64 gen(103);
    for (int t = 0; t < 200; ++t) {
        auto rs = testsupport::random_responses(gen, 10 + gen() % 50);
        const double f0 = compute_benchmarks(plain(rs)).frequency;
        auto more = rs;
        more[gen() % more.size()].incident_count += 1;
        CHECK(compute_benchmarks(plain(more)).frequency > f0);
        auto clean = rs;
        clean.push_back(ParticipantResponse{});
        const double f2 = compute_benchmarks(plain(clean)).frequency;
        if (f0 > 0)
            CHECK(f2 < f0);
        else
            CHECK(f2 == 0.0);
        CHECK(compute_benchmarks(plain(rs), 5).frequency <= compute_benchmarks(plain(rs), 3).frequency);
    }
}

TEST_CASE("property: cohort aggregates add up to the whole") {
    std::mt19937_64 gen(104);
    for (int t = 0; t < 100; ++t) {
        const auto rs = testsupport::random_responses(gen, 5 + gen() % 150);
        const auto cohorts = assign_cohorts(rs);
        AggregationVector sum;
        std::uint64_t n = 0;
        for (const auto &[c, members] : cohorts) {
            if (c == Cohort::All || members.empty())
                continue;
            const auto a = plain(members, cohort_tag(c));
            n += a.participants;
            for (std::size_t s = 0; s < slots::kCount; ++s)
                sum[s] += a.totals[s];
        }
        const auto whole = plain(rs);
        CHECK(n == whole.participants);
        CHECK(sum == whole.totals);
    }
}

TEST_CASE("pilot fixture benchmarks") {
    const auto fixture = pilot_fixture();
    const auto agg = plain(fixture);
    const auto b = compute_benchmarks(agg, 3);
    CHECK(b.participants == 83);
    CHECK(b.incident_total == 4);
    CHECK(b.frequency == doctest::Approx(0.016064).epsilon(1e-6 / 0.016064));
    CHECK(*b.loss_avg_per_incident_usd == 157052.0);
    CHECK(b.loss_total_usd == 628208);
    CHECK(b.loss_buckets == std::array<std::uint64_t, 4>{2, 1, 0, 1});
    const auto mfa = mfa_level_counts(agg);
    CHECK(mfa == LevelCounts{23, 42, 14, 4});
    CHECK(std::lround(100.0 * b.control_mean[control("1a").ordinal()]) == 33);

    // Population band sizes add up.
    std::uint64_t total = 0;
    for (const auto &[c, members] : assign_cohorts(fixture))
        if (c != Cohort::All)
            total += members.size();
    CHECK(total == 83);
}

TEST_CASE("empty cohort and bad years are rejected") {
    AggregateReport empty;
    CHECK_THROWS_AS(compute_benchmarks(empty), Error);
    const auto agg = plain({ParticipantResponse{}});
    CHECK_THROWS_AS(compute_benchmarks(agg, 0), Error);
    CHECK_FALSE(compute_benchmarks(agg).loss_avg_per_incident_usd);
}

TEST_CASE("json round trip keeps integers exact") {
    const auto b = compute_benchmarks(plain(pilot_fixture()));
    const auto back = benchmark_from_json(nlohmann::json::parse(benchmark_to_json(b).dump()));
    CHECK(back.incident_total == b.incident_total);
    CHECK(back.loss_total_usd == b.loss_total_usd);
    CHECK(back.loss_buckets == b.loss_buckets);
    CHECK(back.attributed_loss_usd == b.attributed_loss_usd);
    CHECK(back.level_counts == b.level_counts);
    CHECK(back.frequency == b.frequency);
    CHECK(*back.loss_avg_per_incident_usd == *b.loss_avg_per_incident_usd);
    for (std::size_t i = 0; i < kControlCount; ++i)
        CHECK(back.control_mean[i] == doctest::Approx(b.control_mean[i]).epsilon(1e-6));
}

TEST_CASE("csv tables") {
    const auto b = compute_benchmarks(plain(pilot_fixture()));
    const auto controls = benchmark_controls_csv(b);
    CHECK(controls.rfind("cohort,control,category,mean,not,partial,large,full,attributed_loss_usd\n", 0) == 0);
    CHECK(std::count(controls.begin(), controls.end(), '\n') == 23);
    CHECK(controls.find("all,5b,5,") != std::string::npos);
    const auto cats = benchmark_categories_csv(b);
    CHECK(std::count(cats.begin(), cats.end(), '\n') == 11);
    CHECK(benchmark_summary_csv(b).find(",628208,157052,2,1,0,1") != std::string::npos);
}

} // TEST_SUITE
