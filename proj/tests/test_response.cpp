#include "support.hpp"

#include "scrambench/error.hpp"
#include "scrambench/fixture.hpp"

#include <doctest.h>

using namespace scrambench;
using testsupport::control;

namespace {

ParticipantResponse clean() {
    ParticipantResponse r;
    r.participant_id = "t";
    return r;
}

bool has(const std::vector<Violation> &v, ViolationCode c) {
    return std::any_of(v.begin(), v.end(), [c](const Violation &x) { return x.code == c; });
}

const char *kMatrixCsv = R"(participant_id,town-a
population,"12,400"
incidents,1
loss_usd,"$32,500"
control,not,partial,large,full,failed
1a,,x,,,
2a,,,x,,
2b,x,,,,
3a,,,,x,
3b,,x,,,
4a,,x,,,
4b,x,,,,
5a,,x,,,x
5b,,x,,,X
6a,,,,x,
6b,,,x,,
6c,,,x,,
6d,,,x,,
7a,,,x,,
7b,,x,,,
7c,,x,,,
8a,x,,,,
8b,x,,,,
8c,,x,,,
9a,x,,,,
9b,x,,,,
10a,,,x,,
)";

} // namespace

TEST_SUITE("catalog") {

TEST_CASE("22 controls in 10 categories, questionnaire order") {
    const auto &all = all_controls();
    REQUIRE(all.size() == 22);
    std::vector<std::string> codes;
    for (auto c : all)
        codes.push_back(c.code());
    CHECK(codes == std::vector<std::string>{"1a", "2a", "2b", "3a", "3b", "4a", "4b", "5a",
                                            "5b", "6a", "6b", "6c", "6d", "7a", "7b", "7c",
                                            "8a", "8b", "8c", "9a", "9b", "10a"});
    CHECK(all.back().category() == 10);
    for (std::size_t i = 0; i < all.size(); ++i)
        CHECK(all[i].ordinal() == i);
}

TEST_CASE("control codes parse case-insensitively and from labels") {
    CHECK(ControlId::parse("5b") == control("5b"));
    CHECK(ControlId::parse("5B") == control("5b"));
    CHECK(ControlId::parse(" 10a ") == control("10a"));
    CHECK(ControlId::parse(control("6d").label()) == control("6d"));
    CHECK_FALSE(ControlId::parse("5e"));
    CHECK_FALSE(ControlId::parse("11a"));
    CHECK_FALSE(ControlId::parse("5bb"));
    CHECK_FALSE(ControlId::parse(""));
    CHECK_FALSE(ControlId::from_ordinal(22));
}

TEST_CASE("maturity levels map to exact thirds and display percentages") {
    CHECK(level_score(MaturityLevel::NotImplemented) == 0.0);
    CHECK(level_score(MaturityLevel::PartiallyImplemented) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(level_score(MaturityLevel::LargelyImplemented) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(level_score(MaturityLevel::FullyImplemented) == 1.0);
    CHECK(level_percent(MaturityLevel::PartiallyImplemented) == 33);
    CHECK(level_percent(MaturityLevel::LargelyImplemented) == 67);
    for (auto l : kAllLevels) {
        CHECK(parse_level_token(level_token(l)) == l);
        CHECK(parse_display_level(display_level(l)) == l);
    }
    CHECK_FALSE(parse_level_token("mostly-ish"));
}

} // TEST_SUITE

TEST_SUITE("response") {

TEST_CASE("validation rules") {
    SUBCASE("no incident, no loss is fine") { CHECK(validate_response(clean()).empty()); }

    SUBCASE("loss below the significance floor") {
        auto r = clean();
        r.incident_count = 2;
        r.total_loss_usd = 1999;
        r.failed_controls = {control("1a")};
        CHECK(has(validate_response(r), ViolationCode::LossBelowSignificanceFloor));
        r.total_loss_usd = 2000;
        CHECK(validate_response(r).empty());
    }

    SUBCASE("incident needs between one and five failed controls") {
        auto r = clean();
        r.incident_count = 1;
        r.total_loss_usd = 5000;
        CHECK(has(validate_response(r), ViolationCode::MissingFailureAttribution));
        for (const char *c : {"1a", "2a", "2b", "3a", "3b"})
            r.failed_controls.insert(control(c));
        CHECK(validate_response(r).empty());
        r.failed_controls.insert(control("4a"));
        CHECK(has(validate_response(r), ViolationCode::TooManyFailureAttributions));
    }

    SUBCASE("failures or losses without an incident") {
        auto r = clean();
        r.failed_controls = {control("9a")};
        CHECK(has(validate_response(r), ViolationCode::FailuresWithoutIncident));
        r.failed_controls.clear();
        r.total_loss_usd = 10;
        CHECK(has(validate_response(r), ViolationCode::LossWithoutIncident));
    }
}

TEST_CASE("population bands") {
    auto r = clean();
    CHECK(population_cohort(r) == Cohort::PopulationUnreported);
    const std::pair<std::uint64_t, Cohort> cases[] = {
        {0, Cohort::PopulationUnder5k},        {4999, Cohort::PopulationUnder5k},
        {5000, Cohort::Population5kTo15k},     {14999, Cohort::Population5kTo15k},
        {15000, Cohort::Population15kTo25k},   {24999, Cohort::Population15kTo25k},
        {25000, Cohort::PopulationOver25k},    {2'000'000, Cohort::PopulationOver25k},
    };
    for (auto [pop, cohort] : cases) {
        r.population = pop;
        CHECK_MESSAGE(population_cohort(r) == cohort, pop);
    }
    for (auto c : kAllCohorts)
        CHECK(parse_cohort_tag(cohort_tag(c)) == c);
}

TEST_CASE("pilot fixture partition: 8 + 9 + 29 + 16 + 21 = 83") {
    const auto fixture = pilot_fixture();
    REQUIRE(fixture.size() == 83);
    const auto cohorts = assign_cohorts(fixture);
    CHECK(cohorts.at(Cohort::All).size() == 83);
    CHECK(cohorts.at(Cohort::PopulationOver25k).size() == 8);
    CHECK(cohorts.at(Cohort::Population15kTo25k).size() == 9);
    CHECK(cohorts.at(Cohort::Population5kTo15k).size() == 29);
    CHECK(cohorts.at(Cohort::PopulationUnder5k).size() == 16);
    CHECK(cohorts.at(Cohort::PopulationUnreported).size() == 21);
    for (const auto &r : fixture)
        CHECK(validate_response(r).empty());
}

TEST_CASE("json round trip") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto r = testsupport::random_response(rng, "rt" + std::to_string(i));
        const auto back = response_from_json(nlohmann::json::parse(response_to_json(r).dump()));
        CHECK(back.participant_id == r.participant_id);
        CHECK(back.population == r.population);
        CHECK(back.maturity == r.maturity);
        CHECK(back.incident_count == r.incident_count);
        CHECK(back.total_loss_usd == r.total_loss_usd);
        CHECK(back.failed_controls == r.failed_controls);
    }
}

TEST_CASE("json with a missing control names it") {
    auto j = nlohmann::json::parse(response_to_json(clean()).dump());
    j["maturity"].erase("7b");
    try {
        response_from_json(j);
        FAIL("expected ParseError");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("7b") != std::string::npos);
    }
}

TEST_CASE("matrix csv import") {
    const auto r = import_matrix_csv(kMatrixCsv);
    CHECK(r.participant_id == "town-a");
    CHECK(r.population == 12400u);
    CHECK(r.incident_count == 1);
    CHECK(r.total_loss_usd == 32500);
    CHECK(r.failed_controls == std::set<ControlId>{control("5a"), control("5b")});
    CHECK(r.level(control("1a")) == MaturityLevel::PartiallyImplemented);
    CHECK(r.level(control("3a")) == MaturityLevel::FullyImplemented);
    CHECK(r.level(control("9b")) == MaturityLevel::NotImplemented);
    CHECK(validate_response(r).empty());
}

TEST_CASE("matrix csv import errors") {
    std::string text = kMatrixCsv;
    SUBCASE("two marks on one row") {
        text.replace(text.find("1a,,x,,,"), 8, "1a,,x,x,,");
        CHECK_THROWS_AS(import_matrix_csv(text), Error);
    }
    SUBCASE("missing row") {
        text.erase(text.find("7c,,x,,,\n"), 9);
        CHECK_THROWS_WITH_AS(import_matrix_csv(text), doctest::Contains("7c"), Error);
    }
    SUBCASE("duplicate row") {
        text += "7c,,x,,,\n";
        CHECK_THROWS_AS(import_matrix_csv(text), Error);
    }
    SUBCASE("unknown row") {
        text += "11z,,x,,,\n";
        CHECK_THROWS_AS(import_matrix_csv(text), Error);
    }
}

} // TEST_SUITE
