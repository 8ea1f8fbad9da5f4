#include "support.hpp"

#include "scrambench/error.hpp"
#include "scrambench/protocol.hpp"

#include <doctest.h>

#include <thread>

using namespace scrambench;
using nlohmann::json;

namespace {

std::vector<std::vector<ShareBundle>> shares_for(const std::vector<ParticipantResponse> &rs,
                                                 std::size_t m, ShareRng &rng) {
    std::vector<std::vector<ShareBundle>> per_server(m);
    for (const auto &r : rs) {
        const auto token = make_session_token(rng);
        const auto v = testsupport::encode_response(r);
        for (const char *cohort : {"all", cohort_tag(population_cohort(r)).data()}) {
            auto b = split(v, m, rng, cohort, token);
            for (std::size_t i = 0; i < m; ++i)
                per_server[i].push_back(b[i]);
        }
    }
    return per_server;
}

json reply(ServerSession &s, const nlohmann::ordered_json &msg) {
    return json::parse(s.handle(msg.dump()));
}

} // namespace

TEST_SUITE("protocol") {

TEST_CASE("submit message round trip") {
    SeededRng rng(1);
    std::mt19937_64 gen(1);
    const auto v = testsupport::encode_response(testsupport::random_response(gen, "a"));
    const auto b = split(v, 3, rng, "pop-5k-15k", "abc")[1];
    const auto back = bundle_from_submit(json::parse(make_submit(b).dump()));
    CHECK(back.server_index == 2);
    CHECK(back.server_count == 3);
    CHECK(back.cohort == "pop-5k-15k");
    CHECK(back.session_token == "abc");
    CHECK(back.shares == b.shares);
}

TEST_CASE("session requires HELLO and a matching computation") {
    AggregationServer server(1, 2, "comp");
    ServerSession s(server);
    CHECK(reply(s, make_seal("all"))["type"] == "ERROR");
    auto hello = make_hello("other");
    CHECK(reply(s, hello)["code"] == "ProtocolError");
    auto bad_mod = make_hello("comp", 1000003);
    CHECK(reply(s, bad_mod)["code"] == "ModulusMismatch");
    CHECK(reply(s, make_hello("comp"))["type"] == "HELLO");
    CHECK(json::parse(s.handle("not json"))["type"] == "ERROR");
    CHECK(reply(s, make_seal("nope"))["type"] == "ERROR");
}

TEST_CASE("sealed cohort refuses late submissions and reseals identically") {
    AggregationServer server(1, 2, "comp");
    SeededRng rng(2);
    const auto b = split(AggregationVector{}, 2, rng, "all", "t1");
    server.accumulate(b[0]);
    const auto first = server.seal("all");
    CHECK(first.participants == 1);
    const auto late = split(AggregationVector{}, 2, rng, "all", "t2");
    CHECK_THROWS_AS(server.accumulate(late[0]), Error);
    CHECK(server.seal("all").sums == first.sums);
}

TEST_CASE("loopback round trip over all cohorts") {
    std::mt19937_64 gen(3);
    SeededRng rng(3);
    const auto rs = testsupport::random_responses(gen, 60);
    const std::size_t m = 3;
    std::vector<std::unique_ptr<AggregationServer>> servers;
    for (std::size_t i = 1; i <= m; ++i)
        servers.push_back(std::make_unique<AggregationServer>(i, m, "loop"));
    const auto per_server = shares_for(rs, m, rng);
    for (std::size_t i = 0; i < m; ++i) {
        LoopbackTransport t(*servers[i]);
        submit_bundles(t, "loop", per_server[i]);
    }
    const auto cohorts = assign_cohorts(rs);
    for (const auto &[cohort, members] : cohorts) {
        std::vector<CohortPartial> partials;
        for (std::size_t i = 0; i < m; ++i) {
            LoopbackTransport t(*servers[i]);
            partials.push_back(request_partial(t, "loop", cohort_tag(cohort)));
        }
        const auto agg = combine(partials, 1);
        CHECK(agg.participants == members.size());
        CHECK(agg.totals.values == testsupport::reference_sum(members));
    }
}

TEST_CASE("duplicate submission over the wire is an ERROR reply") {
    AggregationServer server(1, 2, "dup");
    SeededRng rng(4);
    const auto b = split(AggregationVector{}, 2, rng, "all", "same");
    LoopbackTransport t(server);
    submit_bundles(t, "dup", {b[0]});
    CHECK_THROWS_WITH_AS(submit_bundles(t, "dup", {b[0]}), doctest::Contains("DuplicateSubmission"),
                         Error);
    CHECK(server.participants("all") == 1);
}

TEST_CASE("offline share files") {
    std::mt19937_64 gen(5);
    SeededRng rng(5);
    const auto rs = testsupport::random_responses(gen, 12);
    const auto per_server = shares_for(rs, 2, rng);
    std::vector<CohortPartial> partials;
    for (std::size_t i = 0; i < 2; ++i) {
        AggregationServer server(i + 1, 2, "files");
        ingest_share_file(server, share_file_contents("files", per_server[i]));
        partials.push_back(partial_from_json(json::parse(make_partial(server.seal("all"), "files").dump())));
    }
    CHECK(combine(partials, 1).totals.values == testsupport::reference_sum(rs));

    AggregationServer wrong(2, 2, "files");
    CHECK_THROWS_WITH_AS(ingest_share_file(wrong, share_file_contents("files", per_server[0])),
                         doctest::Contains("share line 2"), Error);
}

TEST_CASE("tcp servers on loopback") {
    std::mt19937_64 gen(6);
    SeededRng rng(6);
    const auto rs = testsupport::random_responses(gen, 20);
    const std::size_t m = 2;
    std::vector<std::unique_ptr<AggregationServer>> servers;
    std::vector<std::unique_ptr<TcpAggregationService>> services;
    std::vector<std::thread> threads;
    std::vector<std::uint16_t> ports;
    for (std::size_t i = 1; i <= m; ++i) {
        servers.push_back(std::make_unique<AggregationServer>(i, m, "tcp"));
        services.push_back(std::make_unique<TcpAggregationService>(*servers.back()));
        ports.push_back(services.back()->bind("127.0.0.1", 0));
        threads.emplace_back([svc = services.back().get()] { svc->run(); });
    }
    const auto per_server = shares_for(rs, m, rng);
    for (std::size_t i = 0; i < m; ++i) {
        TcpTransport t("127.0.0.1", ports[i]);
        submit_bundles(t, "tcp", per_server[i]);
    }
    // An idle connection must not keep the server from stopping.
    TcpTransport idle("127.0.0.1", ports[0]);
    std::vector<CohortPartial> partials;
    for (std::size_t i = 0; i < m; ++i) {
        TcpTransport t("127.0.0.1", ports[i]);
        partials.push_back(request_partial(t, "tcp", "all"));
    }
    CHECK(combine(partials, 1).totals.values == testsupport::reference_sum(rs));
    for (auto &s : services)
        s->stop();
    for (auto &t : threads)
        t.join();
}

TEST_CASE("endpoint parsing") {
    CHECK(parse_endpoint("127.0.0.1:7001") == std::pair<std::string, std::uint16_t>{"127.0.0.1", 7001});
    CHECK(parse_endpoint("localhost:0").second == 0);
    CHECK_THROWS_AS(parse_endpoint("nohost"), Error);
    CHECK_THROWS_AS(parse_endpoint("h:70000"), Error);
    CHECK_THROWS_AS(parse_endpoint("h:x"), Error);
}

} // TEST_SUITE
