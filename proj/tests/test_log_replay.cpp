// Round trips through the log format and the replay check: a written log
// reads back to the same run, a replay of an untouched log matches, and a
// tampered or malformed log is caught with a useful message.

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "boxsim/run.hpp"

using namespace boxsim;

namespace {

Scenario small_mp() {
    Scenario sc;
    sc.engine = "mp";
    sc.c = 1;
    sc.e_max = 3;
    sc.horizon = 120;
    sc.adversary.name = "random";
    sc.adversary.seed = 7;
    return sc;
}

Scenario small_tree() {
    Scenario sc;
    sc.engine = "tree";
    sc.depth = 3;
    sc.horizon = 120;
    sc.adversary.name = "permissive";
    return sc;
}

}  // namespace

TEST_CASE("logs round trip through the wire format") {
    for (const Scenario& sc : {small_mp(), small_tree()}) {
        RunLog run = run_scenario(sc);
        REQUIRE(run.ticks.size() == 120);
        std::stringstream ss;
        write_log(ss, run);
        RunLog back = read_log(ss);
        REQUIRE(back.scenario == run.scenario);
        REQUIRE(back.ticks.size() == run.ticks.size());
        for (std::size_t i = 0; i < run.ticks.size(); ++i)
            REQUIRE(tick_record_json(back.ticks[i]) == tick_record_json(run.ticks[i]));
        REQUIRE(back.enumerated == run.enumerated);
        REQUIRE(back.violated == run.violated);
        REQUIRE(back.explicit_entries == run.explicit_entries);
    }
}

TEST_CASE("replay of a faithful log matches bit for bit") {
    for (const Scenario& sc : {small_mp(), small_tree()}) {
        RunLog run = run_scenario(sc);
        auto res = replay_run(run);
        REQUIRE(res.ok);
    }
}

TEST_CASE("replay flags the first tampered tick") {
    RunLog run = run_scenario(small_mp());
    // Claim a stage where there was none (or vice versa) late in the run.
    run.ticks[90].is_stage = !run.ticks[90].is_stage;
    auto res = replay_run(run);
    REQUIRE_FALSE(res.ok);
    REQUIRE(res.first_divergence == run.ticks[90].tick);

    // Dropping a record changes the shape and is reported as such.
    RunLog truncated = run_scenario(small_mp());
    truncated.ticks.pop_back();
    auto res2 = replay_run(truncated);
    REQUIRE_FALSE(res2.ok);
    REQUIRE_FALSE(res2.detail.empty());
}

TEST_CASE("textual tampering survives parsing but fails replay") {
    RunLog run = run_scenario(small_tree());
    std::stringstream ss;
    write_log(ss, run);
    std::string text = ss.str();
    // Rewrite one walk entry in place: same shape, different content.
    auto pos = text.find("\"walk\":[0,");
    REQUIRE(pos != std::string::npos);
    text[pos + 8] = '2';
    std::stringstream tampered(text);
    RunLog back = read_log(tampered);
    auto res = replay_run(back);
    REQUIRE_FALSE(res.ok);
}

TEST_CASE("malformed logs are rejected with line diagnostics") {
    RunLog run = run_scenario(small_mp());
    std::stringstream ss;
    write_log(ss, run);
    std::string text = ss.str();

    SECTION("missing header") {
        std::stringstream s2(text.substr(text.find('\n') + 1));
        REQUIRE_THROWS_AS(read_log(s2), LogError);
    }
    SECTION("missing summary") {
        std::string cut = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
        std::stringstream s2(cut);
        REQUIRE_THROWS_AS(read_log(s2), LogError);
    }
    SECTION("broken json names the line") {
        std::string broken = text;
        broken.insert(broken.find('\n') + 1, "{not json\n");
        std::stringstream s2(broken);
        try {
            read_log(s2);
            FAIL("expected a LogError");
        } catch (const LogError& ex) {
            REQUIRE(std::string(ex.what()).find("line 2") != std::string::npos);
        }
    }
    SECTION("future schema is refused") {
        std::string future = text;
        auto pos = future.find("\"schema\":1");
        REQUIRE(pos != std::string::npos);
        future.replace(pos, 10, "\"schema\":9");
        std::stringstream s2(future);
        REQUIRE_THROWS_AS(read_log(s2), LogError);
    }
}

TEST_CASE("a violated negative-control run ends its log early") {
    Scenario sc;
    sc.engine = "mp";
    sc.c = 1;
    sc.e_max = 2;
    sc.active = {2};
    sc.horizon = 500;
    sc.adversary.name = "seesaw";
    sc.capacity_override = 2;
    sc.negative_control = true;
    RunLog run = run_scenario(sc);
    REQUIRE(run.violated);
    REQUIRE(run.ticks.size() < 500);
    REQUIRE(run.ticks.back().action.kind == "violation");
    REQUIRE(replay_run(run).ok);
}

TEST_CASE("the override is rejected without the negative-control flag") {
    Scenario sc = small_mp();
    sc.capacity_override = 2;
    REQUIRE_THROWS_AS(validate_scenario(sc), ScenarioError);
    sc.negative_control = true;
    REQUIRE_NOTHROW(validate_scenario(sc));
}
