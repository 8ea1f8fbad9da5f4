#include "support.hpp"

#include "scrambench/model_service.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace scrambench;
using nlohmann::json;

namespace {

ModelApi pilot_api() {
    const auto params = build_model(testsupport::pilot_loss_report(), {0.85, 0.30, 1.5, 5.206});
    const auto text = model_to_json(params).dump();
    return ModelApi(text, model_from_json(json::parse(text)));
}

json body_of(const ApiResponse &r) { return json::parse(r.body); }

json all_levels(const char *token) {
    json m = json::object();
    for (ControlId id : all_controls())
        m[id.code()] = token;
    return json{{"maturity", m}};
}

json group_averages(const ModelApi &api) {
    json m = json::object();
    const json listing = body_of(api.controls());
    for (const auto &row : listing["controls"])
        m[row["control"].get<std::string>()] = row["group_average"];
    return json{{"maturity", m}};
}

} // namespace

TEST_SUITE("model_service") {

TEST_CASE("controls listing") {
    const auto api = pilot_api();
    const auto r = api.controls();
    CHECK(r.status == 200);
    const auto j = body_of(r);
    REQUIRE(j["controls"].size() == 22);
    CHECK(j["controls"][0]["control"] == "1a");
    CHECK(j["controls"][21]["control"] == "10a");
    CHECK(j["levels"].size() == 4);
    CHECK(j["levels"][2]["percent"] == 67);
    double sum = 0;
    for (const auto &c : j["controls"])
        sum += c["weight"].get<double>();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("model file is served verbatim") {
    const auto params = build_model(testsupport::pilot_loss_report());
    const std::string text = model_to_json(params).dump(2);
    ModelApi api(text, params);
    CHECK(api.model().body == text);
}

TEST_CASE("forecast at the group average is the pool fair price") {
    const auto api = pilot_api();
    const auto r = api.forecast(group_averages(api).dump());
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(std::abs(j["x"].get<double>()) < 1e-5);
    CHECK(std::abs(j["annual_risk_usd"].get<int>() - 2523) <= 1);
    CHECK(j["pool_fair_price_usd"] == 2523);
    CHECK(j["extrapolated"] == false);
    CHECK(j["ranking"].size() == 22);
}

TEST_CASE("forecast with level tokens") {
    const auto api = pilot_api();
    const auto none = body_of(api.forecast(all_levels("not").dump()));
    const auto full = body_of(api.forecast(all_levels("full").dump()));
    CHECK(none["x"].get<double>() < 0);
    CHECK(full["x"].get<double>() > 0);
    CHECK(none["annual_risk_usd"].get<int>() > full["annual_risk_usd"].get<int>());
    CHECK(full["ranking"].empty());
    const auto &rank = none["ranking"];
    REQUIRE(rank.size() == 22);
    CHECK(rank[0]["control"] == "5b");
    CHECK(rank[0]["current"] == "not");
    for (std::size_t i = 1; i < rank.size(); ++i)
        CHECK(rank[i - 1]["annual_risk_reduction_usd"].get<double>() >=
              rank[i]["annual_risk_reduction_usd"].get<double>());

    // Same numbers as the library.
    MaturityVector levels{};
    const auto direct = marginal_control_ranking(api.params(), levels);
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(rank[i]["control"] == direct[i].control.code());
}

TEST_CASE("forecast request errors") {
    const auto api = pilot_api();
    auto missing = all_levels("partial");
    missing["maturity"].erase("7c");
    missing["maturity"].erase("1a");
    const auto r = api.forecast(missing.dump());
    CHECK(r.status == 422);
    CHECK(body_of(r)["missing_controls"] == json::array({"1a", "7c"}));

    CHECK(api.forecast("{").status == 400);
    CHECK(api.forecast("[]").status == 400);
    CHECK(api.forecast(R"({"maturity": 3})").status == 400);
    auto bad = all_levels("partial");
    bad["maturity"]["5b"] = "sometimes";
    CHECK(api.forecast(bad.dump()).status == 400);
    bad["maturity"]["5b"] = 1.5;
    CHECK(api.forecast(bad.dump()).status == 400);
    bad = all_levels("partial");
    bad["maturity"]["12z"] = "full";
    CHECK(api.forecast(bad.dump()).status == 400);
}

TEST_CASE("http round trip") {
    ModelService service(pilot_api());
    const auto port = service.bind("127.0.0.1", 0);
    std::thread t([&] { service.run(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    auto controls = client.Get("/api/controls");
    REQUIRE(controls);
    CHECK(controls->status == 200);
    CHECK(json::parse(controls->body)["controls"].size() == 22);

    auto model = client.Get("/api/model");
    REQUIRE(model);
    CHECK(json::parse(model->body)["exponent"] == 5.206);

    const auto api = pilot_api();
    auto fc = client.Post("/api/forecast", group_averages(api).dump(), "application/json");
    REQUIRE(fc);
    CHECK(fc->status == 200);
    CHECK(json::parse(fc->body)["annual_risk_usd"] == 2523);

    auto missing = client.Post("/api/forecast", R"({"maturity": {}})", "application/json");
    REQUIRE(missing);
    CHECK(missing->status == 422);

    service.stop();
    t.join();
}

} // TEST_SUITE
