// The shipped opponents against the tree engine. As with the two-sided
// suite these check outcomes, not transcripts: who ends up in E, whether
// runs freeze or keep cycling, and that every run is reproducible.

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "boxsim/policies_tree.hpp"

using namespace boxsim;

namespace {

struct RunResult {
    std::vector<TickRecord> recs;
    bool stopped_on_violation = false;
};

RunResult drive(TreeCore& core, PolicyTree& pol, int ticks, bool stop_when_done = false,
                std::size_t want_satisfied = 0) {
    RunResult out;
    for (int t = 0; t < ticks; ++t) {
        out.recs.push_back(core.step(pol.plan(core)));
        if (core.violated()) {
            out.stopped_on_violation = true;
            break;
        }
        if (stop_when_done && core.satisfied().size() >= want_satisfied) break;
    }
    return out;
}

nlohmann::json dump(const std::vector<TickRecord>& recs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : recs) arr.push_back(tick_record_json(r));
    return arr;
}

}  // namespace

TEST_CASE("permissive play satisfies every positive requirement") {
    TreeCore core(TreeConfig{3, 1, {}, 0});
    PermissivePolicyTree pol;
    auto run = drive(core, pol, 60, true, 2);
    REQUIRE_FALSE(run.stopped_on_violation);
    REQUIRE(core.satisfied() == std::set<std::uint64_t>{0, 1});
    REQUIRE(core.enumerated().size() == 2);

    // The deep winner climbs the full ladder: two level drops, the floor
    // drop, then entry. Its id is its appointment tick.
    const FollowerTree* f = core.find_follower(3);
    REQUIRE(f != nullptr);
    REQUIRE(f->status == FollowerStatus::enumerated);
    REQUIRE(f->promotions == 4);
    std::vector<std::string> ladder;
    for (const auto& r : run.recs)
        if (r.action.kind.rfind("promote", 0) == 0 && r.action.x == 3)
            ladder.push_back(r.action.kind);
    REQUIRE(ladder == std::vector<std::string>{"promote3", "promote3", "promote2", "promote1"});
}

TEST_CASE("permissive tree runs are reproducible") {
    auto once = [] {
        TreeCore core(TreeConfig{3, 1, {}, 0});
        PermissivePolicyTree pol;
        return dump(drive(core, pol, 200).recs);
    };
    REQUIRE(once() == once());
}

TEST_CASE("stonewall freezes a column and the walk slips past it") {
    TreeCore core(TreeConfig{3, 1, {}, 0});
    StonewallPolicyTree pol;
    auto run = drive(core, pol, 400);
    REQUIRE_FALSE(run.stopped_on_violation);

    // Both positive requirements get satisfied anyway, each through the
    // free permission a fresh follower enjoys at its first expansionary
    // visit: P:0 through "i", P:1 through "ipf" once the crowded column at
    // "ip" stops being expansionary.
    REQUIRE(core.satisfied() == std::set<std::uint64_t>{0, 1});
    REQUIRE(core.enumerated().size() == 2);

    // Nothing was ever enumerated into a guarded set.
    for (std::uint64_t e : core.functionals()) REQUIRE(core.oracle(e).size() == 0);

    // The free window buys at most one promotion; after that followers park.
    std::size_t parked = 0, alive = 0;
    for (const auto& f : core.followers()) {
        if (!f.alive()) continue;
        ++alive;
        REQUIRE(f.promotions <= 1);
        if (f.promotions == 0) ++parked;
    }
    REQUIRE(alive > 0);
    REQUIRE(parked > 0);

    // The "ip" column is frozen on a delayed axiom.
    int n_ip = core.tree().find("ip");
    REQUIRE_FALSE(core.trace(n_ip).pending().empty());
    REQUIRE(core.last_tau_stage(n_ip) < 400 - 50);

    // And the endgame is quiet.
    for (std::size_t i = run.recs.size() - 50; i < run.recs.size(); ++i)
        REQUIRE(run.recs[i].action.kind == "none");
}

TEST_CASE("seesaw cycles freeze and release on the tree without violations") {
    TreeCore core(TreeConfig{3, 1, {}, 0});
    SeeSawPolicyTree pol(AdversarySpec{"seesaw", 0, {}, {}});
    auto run = drive(core, pol, 400);
    REQUIRE_FALSE(run.stopped_on_violation);
    REQUIRE_FALSE(core.violated());

    // Releases happen: guarded sets do receive elements.
    std::uint64_t total = 0;
    for (std::uint64_t e : core.functionals()) total += core.oracle(e).size();
    REQUIRE(total > 0);

    // Parked siblings march the digits of the root column.
    bool seen_digit_one = false;
    for (const auto& r : run.recs)
        if (r.action.kind == "appoint")
            for (const auto& a : r.action.assigns)
                if (!a.priv && a.alpha == Address{1}) seen_digit_one = true;
    REQUIRE(seen_digit_one);
}

TEST_CASE("seesaw exhausts an overridden capacity on the tree") {
    TreeCore narrowed(TreeConfig{3, 1, {}, 2});
    SeeSawPolicyTree pol(AdversarySpec{"seesaw", 0, {}, {}});
    auto run = drive(narrowed, pol, 500);
    REQUIRE(run.stopped_on_violation);
    REQUIRE(run.recs.back().action.kind == "violation");
    REQUIRE(run.recs.back().action.viol_bound == 2);
    REQUIRE(run.recs.size() <= 500);

    TreeCore canonical(TreeConfig{3, 1, {}, 0});
    SeeSawPolicyTree pol2(AdversarySpec{"seesaw", 0, {}, {}});
    auto clean = drive(canonical, pol2, 500);
    REQUIRE_FALSE(clean.stopped_on_violation);
}

TEST_CASE("seeded random tree play is reproducible and keeps moving") {
    auto once = [] {
        TreeCore core(TreeConfig{3, 1, {}, 0});
        RandomPolicyTree pol(AdversarySpec{"random", 424242, {}, {}});
        return drive(core, pol, 300);
    };
    auto a = once();
    auto b = once();
    REQUIRE(dump(a.recs) == dump(b.recs));
    REQUIRE_FALSE(a.stopped_on_violation);

    std::uint64_t enums = 0;
    for (const auto& r : a.recs)
        for (const auto& ev : r.events)
            if (ev.kind == AdvEvent::Kind::enumerate_set) ++enums;
    REQUIRE(enums > 0);

    bool late_stage = false;
    for (std::size_t i = a.recs.size() - 50; i < a.recs.size(); ++i)
        if (!a.recs[i].tau_stages.empty()) late_stage = true;
    REQUIRE(late_stage);
}

TEST_CASE("scripted tree policy replays its events") {
    TreeCore core(TreeConfig{2, 1, {}, 0});
    Big z = core.layout(0).private_slot(0, 1, core.tree().find("i"));
    AdversarySpec spec{"scripted", 0, {}, {
        {2, AdvEvent::axiom(0, 1, singleton(z), 1, 100)},
        {2, AdvEvent::halt(0, 1, 0)},
    }};
    ScriptedPolicyTree pol(spec);
    core.step(pol.plan(core));
    auto r2 = core.step(pol.plan(core));
    REQUIRE(r2.events.size() == 2);
    REQUIRE(r2.action.kind == "promote1");
    REQUIRE(core.enumerated() == std::set<std::uint64_t>{1});
}

TEST_CASE("tree policy factory resolves the shipped names") {
    for (const char* name : {"permissive", "stonewall", "seesaw", "random", "scripted"})
        REQUIRE(make_policy_tree(AdversarySpec{name, 0, {}, {}}) != nullptr);
    REQUIRE_THROWS_AS(make_policy_tree(AdversarySpec{"cooperative", 0, {}, {}}),
                      ScenarioError);
}
