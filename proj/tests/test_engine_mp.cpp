// Two-sided engine, driven tick by tick with hand-scripted events. The
// expected tick numbers, actions, block addresses and digit choices in these
// tests were worked out by hand first; the engine has to reproduce
// them exactly.

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "boxsim/engine_mp.hpp"

using namespace boxsim;

namespace {

AdvEvent ax0(Big lo, Big hi, std::uint64_t value, std::uint64_t use) {
    return AdvEvent::axiom(0, 0, Interval{lo, hi}, value, use);
}
AdvEvent ax1(Big lo, Big hi, std::uint64_t value, std::uint64_t use) {
    return AdvEvent::axiom(1, 0, Interval{lo, hi}, value, use);
}

// Recompute the follower-class sizes directly from follower state.
std::vector<SetSizeRec> sizes_oracle(const MpCore& core) {
    std::vector<SetSizeRec> out;
    for (int i = 0; i < 2; ++i)
        for (std::uint64_t k = core.config().c; k <= core.config().e_max; ++k) {
            SetSizeRec row;
            row.side = i;
            row.k = k;
            for (const auto& f : core.followers()) {
                if (!f.alive() || !f.has_side(i) || f.side[i].k != k) continue;
                if (f.top == i && !f.side[i].box.priv) ++row.K;
                else if (f.top == i) ++row.L;
                else ++row.G;
            }
            if (row.K || row.L || row.G) out.push_back(row);
        }
    return out;
}

}  // namespace

TEST_CASE("full lifecycle at the floor level: appoint, free drop, final entry") {
    MpCore core(MpConfig{1, 1, {}, 0});

    // Tick 1: nothing written yet, so the tick is vacuously a stage and the
    // requirement appoints its first follower.
    auto r1 = core.step({});
    REQUIRE(r1.is_stage);
    REQUIRE(r1.action.kind == "appoint");
    REQUIRE(r1.action.e == 1);
    REQUIRE(r1.action.x == 1);
    REQUIRE(r1.action.new_top == 1);
    REQUIRE(r1.action.assigns.size() == 2);
    CHECK(r1.action.assigns[0].side == 0);
    CHECK_FALSE(r1.action.assigns[0].priv);
    CHECK(r1.action.assigns[0].alpha == Address{0});
    CHECK(r1.action.assigns[0].beta == Address{});
    CHECK(r1.action.assigns[0].m == 0);
    CHECK(r1.action.assigns[0].region == (Interval{1, 5}));
    CHECK(r1.action.assigns[1].side == 1);
    CHECK(r1.action.assigns[1].priv);
    CHECK(r1.action.assigns[1].region == (Interval{0, 1}));
    REQUIRE(core.followers().size() == 1);
    CHECK(core.followers()[0].top == 1);
    CHECK(core.followers()[0].has_side1);

    // Tick 2: both marker values get traced and the follower is declared to
    // compute 0. Its private-side computation was never recorded at a stage,
    // so the first permission is free; the private side sits at the floor
    // level, so the promotion drops it.
    auto r2 = core.step({ax0(1, 5, 1, 1000), ax1(0, 1, 1, 1000),
                         AdvEvent::halt(1, 1, 0)});
    REQUIRE(r2.is_stage);
    REQUIRE(r2.axiom_results.size() == 2);
    CHECK(r2.axiom_results[0].accepted);
    CHECK(r2.axiom_results[1].accepted);
    REQUIRE(r2.action.kind == "promote2");
    CHECK(r2.action.x == 1);
    CHECK(r2.action.side == 1);
    CHECK(r2.action.new_top == 0);
    CHECK_FALSE(core.followers()[0].has_side1);
    CHECK(core.followers()[0].top == 0);
    CHECK(core.followers()[0].promotions == 1);
    REQUIRE(r2.sizes.size() == 1);
    CHECK(r2.sizes[0].side == 0);
    CHECK(r2.sizes[0].k == 1);
    CHECK(r2.sizes[0].K == 1);
    CHECK(core.followers()[0].side[0].v_last == 1000);

    // Tick 3: still a stage, but the surviving side saw no change below its
    // recorded computation, so the follower is not permitted; everything
    // alive is realised, so a second follower appears. Its stem is the first
    // follower's block, giving the nested address <0,0>.
    auto r3 = core.step({});
    REQUIRE(r3.is_stage);
    REQUIRE(r3.action.kind == "appoint");
    CHECK(r3.action.x == 3);
    REQUIRE(r3.action.assigns.size() == 2);
    CHECK(r3.action.assigns[0].beta == Address{0});
    CHECK(r3.action.assigns[0].m == 0);
    CHECK(r3.action.assigns[0].alpha == (Address{0, 0}));
    CHECK(r3.action.assigns[0].region == (Interval{1, 2}));

    // Tick 4: the new follower's level-1 block shares the point z=1 with the
    // value already traced there, and the trace bound at level 1 is one
    // value per point, so the new axiom has to wait in the delay queue.
    auto r4 = core.step({ax0(1, 2, 3, 1000)});
    REQUIRE(r4.axiom_results.size() == 1);
    CHECK_FALSE(r4.axiom_results[0].accepted);
    CHECK_FALSE(r4.is_stage);
    CHECK(r4.admitted.empty());

    // Tick 5: an element below the recorded computation enters the side-0
    // set. That kills the crowding axiom, lets the delayed one through, and
    // permits the first follower, whose private side is already gone: it
    // enters E, cancelling the younger follower.
    auto r5 = core.step({AdvEvent::enumerate(0, 0), ax0(2, 5, 1, 1002),
                         AdvEvent::enumerate(1, 0), ax1(0, 1, 3, 1002)});
    REQUIRE(r5.admitted.size() == 1);
    CHECK(r5.admitted[0].trace_e == 0);
    REQUIRE(r5.is_stage);
    REQUIRE(r5.action.kind == "promote1");
    CHECK(r5.action.x == 1);
    REQUIRE(r5.enumerated.has_value());
    CHECK(*r5.enumerated == 1);
    CHECK(r5.cancelled == std::vector<std::uint64_t>{3});
    CHECK(r5.satisfied == std::vector<std::uint64_t>{1});
    CHECK(core.enumerated().count(1) == 1);
    CHECK(core.followers()[0].promotions == 2);

    // Tick 6: the requirement is satisfied and never acts again.
    auto r6 = core.step({});
    REQUIRE(r6.is_stage);
    CHECK(r6.action.kind == "none");
    CHECK(r6.satisfied == std::vector<std::uint64_t>{1});
}

TEST_CASE("bookkeeping rule walks the digits and then nests the stem") {
    MpCore core(MpConfig{1, 2, {2}, 0});
    // Layout: level 1 is [0,17) and level 2 is [17,234) with private slot 17
    // and root block [18,234) split into six width-36 children.

    auto r1 = core.step({});
    REQUIRE(r1.action.kind == "appoint");
    CHECK(r1.action.x == 1);
    CHECK(r1.action.assigns[0].alpha == Address{0});
    CHECK(r1.action.assigns[0].region == (Interval{18, 54}));
    CHECK(r1.action.assigns[1].region == (Interval{17, 18}));

    // Keep the follower unrealised for one stage so its free permission
    // window closes with a recorded computation.
    auto r2 = core.step({ax0(18, 54, 1, 1000), ax1(17, 18, 1, 1000)});
    REQUIRE(r2.is_stage);
    CHECK(r2.action.kind == "none");

    // Realised but not permitted, all realised: second follower, digit 1.
    auto r3 = core.step({AdvEvent::halt(2, 1, 0)});
    REQUIRE(r3.action.kind == "appoint");
    CHECK(r3.action.x == 3);
    CHECK(r3.action.assigns[0].beta == Address{});
    CHECK(r3.action.assigns[0].m == 1);
    CHECK(r3.action.assigns[0].alpha == Address{1});
    CHECK(r3.action.assigns[0].region == (Interval{54, 90}));

    // The private slot at level 2 holds two values, so no delay this time.
    auto r4 = core.step({ax0(54, 90, 3, 1002), ax1(17, 18, 3, 1002)});
    REQUIRE(r4.axiom_results.size() == 2);
    CHECK(r4.axiom_results[0].accepted);
    CHECK(r4.axiom_results[1].accepted);
    REQUIRE(r4.is_stage);
    CHECK(r4.action.kind == "none");

    // Third follower takes digit 2.
    auto r5 = core.step({AdvEvent::halt(2, 3, 0)});
    REQUIRE(r5.action.kind == "appoint");
    CHECK(r5.action.x == 5);
    CHECK(r5.action.assigns[0].beta == Address{});
    CHECK(r5.action.assigns[0].m == 2);
    CHECK(r5.action.assigns[0].region == (Interval{90, 126}));
    // All three followers sit private on side 1 and answer to side 0 from
    // the far side: L hits its bound k+1 and G stays under the capacity.
    auto sz = sizes_oracle(core);
    REQUIRE(r5.sizes == sz);
    REQUIRE(sz.size() == 2);
    CHECK(sz[0].side == 0);
    CHECK(sz[0].G == 3);
    CHECK(sz[1].side == 1);
    CHECK(sz[1].L == 3);

    // A side-1 element below the first follower's recorded computation
    // permits it. Its private side is above the floor, so it descends into a
    // fresh level-1 block, flipping the see-saw and cancelling the younger
    // followers.
    auto r6 = core.step({AdvEvent::enumerate(1, 0), ax1(17, 18, 5, 1004),
                         ax0(90, 126, 5, 1004)});
    REQUIRE(r6.is_stage);
    REQUIRE(r6.action.kind == "promote3");
    CHECK(r6.action.x == 1);
    CHECK(r6.action.side == 1);
    CHECK(r6.action.new_top == 0);
    CHECK(r6.cancelled == (std::vector<std::uint64_t>{3, 5}));
    REQUIRE(r6.action.assigns.size() == 1);
    CHECK(r6.action.assigns[0].k == 1);
    CHECK(r6.action.assigns[0].beta == Address{});
    CHECK(r6.action.assigns[0].m == 0);
    CHECK(r6.action.assigns[0].alpha == Address{0});
    CHECK(r6.action.assigns[0].region == (Interval{1, 5}));
    CHECK(core.followers()[0].side[1].k == 1);
    CHECK(core.followers()[0].top == 0);

    // With the survivor now parked on side 0 at level 2, the next
    // appointment nests below its block: stem <0>, digit 0.
    auto r7 = core.step({ax1(1, 5, 6, 1006)});
    REQUIRE(r7.is_stage);
    REQUIRE(r7.action.kind == "appoint");
    CHECK(r7.action.x == 7);
    CHECK(r7.action.assigns[0].beta == Address{0});
    CHECK(r7.action.assigns[0].m == 0);
    CHECK(r7.action.assigns[0].alpha == (Address{0, 0}));
    CHECK(r7.action.assigns[0].region == (Interval{18, 24}));
}

TEST_CASE("an unrealised follower blocks appointment and nothing moves") {
    MpCore core(MpConfig{1, 1, {}, 0});
    auto r1 = core.step({});
    REQUIRE(r1.action.kind == "appoint");
    auto r2 = core.step({ax0(1, 5, 1, 1000), ax1(0, 1, 1, 1000)});
    REQUIRE(r2.is_stage);
    CHECK(r2.action.kind == "none");
    for (int t = 0; t < 50; ++t) {
        auto r = core.step({});
        REQUIRE(r.is_stage);
        REQUIRE(r.action.kind == "none");
    }
    CHECK(core.followers().size() == 1);
    CHECK(core.enumerated().empty());
    CHECK(core.satisfied().empty());
}

namespace {

// A dutiful opponent: declares computations promptly, keeps every written
// marker value traced, and each tick feeds one permission to the strongest
// realised follower by enumerating a fresh element below its recorded
// computation on the deciding side.
struct Assistant {
    std::uint64_t next_use = 1000;

    std::vector<AdvEvent> plan(const MpCore& core) {
        std::vector<AdvEvent> ev;
        for (const auto& f : core.followers())
            if (f.alive() && !core.pcf().value(f.e, f.id).has_value())
                ev.push_back(AdvEvent::halt(f.e, f.id, 0));
        bool grant[2] = {false, false};
        for (const auto& f : core.followers()) {
            if (!f.alive() || core.pcf().value(f.e, f.id) != 0) continue;
            int i = f.top;
            auto v = f.side[i].v_last;
            if (v.has_value()) {
                std::uint64_t elem = core.oracle(i).least_absent();
                if (elem < *v) {
                    ev.push_back(AdvEvent::enumerate(i, elem));
                    grant[i] = true;
                }
            }
            break;  // only the strongest needs feeding
        }
        for (int i = 0; i < 2; ++i)
            for (const auto& [iv, piece] : core.psi(i).all_pieces())
                if (grant[i] || !core.trace(i).covers_value(iv, piece.value))
                    ev.push_back(AdvEvent::axiom(i, 0, iv, piece.value, next_use));
        next_use += 2;
        return ev;
    }
};

}  // namespace

TEST_CASE("promotion chain length is twice the level gap plus two") {
    // The chain alternates descents starting on the private side, drops the
    // private side at the floor, then enters E: 2(e-c)+2 permissions total.
    for (std::uint64_t e = 1; e <= 4; ++e) {
        DYNAMIC_SECTION("active requirement " << e) {
            MpCore core(MpConfig{1, 4, {e}, 0});
            Assistant helper;
            std::uint64_t winner = 0;
            std::vector<ActionRec> winner_actions;
            for (int t = 0; t < 200 && core.enumerated().empty(); ++t) {
                auto rec = core.step(helper.plan(core));
                if (rec.action.kind == "appoint" && winner == 0)
                    winner = rec.action.x;
                if (rec.action.kind.rfind("promote", 0) == 0 &&
                    rec.action.x == winner)
                    winner_actions.push_back(rec.action);
            }
            REQUIRE(winner != 0);
            REQUIRE(core.enumerated().count(winner) == 1);
            CHECK(core.satisfied().count(e) == 1);
            const auto* f = core.find_follower(winner);
            REQUIRE(f != nullptr);
            CHECK(f->promotions == 2 * (e - 1) + 2);
            REQUIRE(winner_actions.size() == 2 * (e - 1) + 2);
            // Alternating descents, private side first.
            for (std::size_t p = 0; p + 2 < winner_actions.size(); ++p) {
                CHECK(winner_actions[p].kind == "promote3");
                CHECK(winner_actions[p].side == (p % 2 == 0 ? 1 : 0));
            }
            CHECK(winner_actions[winner_actions.size() - 2].kind == "promote2");
            CHECK(winner_actions.back().kind == "promote1");
        }
    }
}

TEST_CASE("capacity override exhausts the digits and reports a violation") {
    MpCore core(MpConfig{1, 2, {2}, 2});
    core.step({});                                               // appoint <0>
    core.step({ax0(18, 54, 1, 1000), ax1(17, 18, 1, 1000)});      // traced
    auto r3 = core.step({AdvEvent::halt(2, 1, 0)});               // appoint <1>
    REQUIRE(r3.action.kind == "appoint");
    CHECK(r3.action.assigns[0].m == 1);
    core.step({ax0(54, 90, 3, 1002), ax1(17, 18, 3, 1002)});      // traced
    auto r5 = core.step({AdvEvent::halt(2, 3, 0)});               // no digit left
    REQUIRE(r5.is_stage);
    REQUIRE(r5.action.kind == "violation");
    CHECK(r5.action.e == 2);
    CHECK(r5.action.side == 0);
    CHECK(r5.action.viol_k == 2);
    CHECK(r5.action.viol_beta == Address{});
    CHECK(r5.action.viol_blocked == (std::vector<std::uint64_t>{0, 1}));
    CHECK(r5.action.viol_bound == 2);
    CHECK(core.violated());
    CHECK_THROWS_AS(core.step({}), EngineError);

    // The canonical capacity has four more digits to spare at this level.
    MpCore fine(MpConfig{1, 2, {2}, 0});
    fine.step({});
    fine.step({ax0(18, 54, 1, 1000), ax1(17, 18, 1, 1000)});
    fine.step({AdvEvent::halt(2, 1, 0)});
    fine.step({ax0(54, 90, 3, 1002), ax1(17, 18, 3, 1002)});
    auto ok5 = fine.step({AdvEvent::halt(2, 3, 0)});
    REQUIRE(ok5.action.kind == "appoint");
    CHECK(ok5.action.assigns[0].m == 2);
    CHECK_FALSE(fine.violated());
}

TEST_CASE("recorded class sizes always match a direct recount") {
    MpCore core(MpConfig{1, 3, {}, 0});
    Assistant helper;
    for (int t = 0; t < 120; ++t) {
        auto rec = core.step(helper.plan(core));
        REQUIRE(rec.sizes == sizes_oracle(core));
        for (const auto& row : rec.sizes) {
            if (row.side >= 0) {
                CHECK(row.K <= row.k);
                CHECK(row.L <= row.k + 1);
                CHECK(Big(row.G) < cap_mp(row.k));
            }
        }
    }
}
