#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "boxsim/cea.hpp"

using namespace boxsim;

namespace {
std::vector<std::pair<Interval, std::uint64_t>> tiny_table() {
    return {{Interval{0, 4}, 1}, {Interval{4, 8}, 2}};
}
}  // namespace

TEST_CASE("oracle stamps and windows") {
    Clock clk;
    OracleSet a;
    clk.tick = 3;
    CHECK(a.add(5, clk));
    CHECK_FALSE(a.add(5, clk));  // already present
    clk.tick = 7;
    CHECK(a.add(2, clk));
    CHECK(a.contains(5));
    CHECK_FALSE(a.contains(4));
    CHECK(a.least_absent() == 0);
    CHECK(a.add(0, clk));
    CHECK(a.add(1, clk));
    CHECK(a.least_absent() == 3);
    // Window (after, upto] at tick granularity.
    CHECK(a.changed_below(6, 2, 3));        // 5 entered at tick 3
    CHECK_FALSE(a.changed_below(5, 2, 3));  // but 5 is not below 5
    CHECK_FALSE(a.changed_below(6, 3, 6));  // nothing in (3,6]
    CHECK(a.changed_below(3, 3, 7));
    CHECK(a.same_below(10, 3, 6));
    CHECK_FALSE(a.same_below(10, 3, 7));
}

TEST_CASE("marker map splits and overwrites") {
    PsiState psi;
    psi.write(Interval{1, 17}, 3, 3);
    psi.write(Interval{5, 9}, 7, 6);
    CHECK(psi.value_at(Big(0)) == 0);  // default
    CHECK(psi.value_at(Big(1)) == 3);
    CHECK(psi.value_at(Big(4)) == 3);
    CHECK(psi.value_at(Big(5)) == 7);
    CHECK(psi.value_at(Big(8)) == 7);
    CHECK(psi.value_at(Big(9)) == 3);
    CHECK(psi.value_at(Big(16)) == 3);
    CHECK(psi.value_at(Big(17)) == 0);
    auto all = psi.all_pieces();
    REQUIRE(all.size() == 3);
    CHECK(all[0].first == Interval{1, 5});
    CHECK(all[0].second.written == 3);  // split keeps the original write tick
    CHECK(all[1].first == Interval{5, 9});
    CHECK(all[1].second.written == 6);
    CHECK(all[2].first == Interval{9, 17});
    // Clipped view.
    auto in = psi.pieces_in(Interval{4, 6});
    REQUIRE(in.size() == 2);
    CHECK(in[0].first == Interval{4, 5});
    CHECK(in[1].first == Interval{5, 6});
    // Full overwrite swallows inner pieces.
    psi.write(Interval{0, 20}, 9, 9);
    REQUIRE(psi.all_pieces().size() == 1);
    CHECK(psi.value_at(Big(3)) == 9);
    CHECK_THROWS_AS(psi.write(Interval{5, 5}, 1, 1), std::invalid_argument);
}

TEST_CASE("axiom admission against the slot bound") {
    Clock clk;
    clk.tick = 1;
    AllocCounters ctr;
    TraceState tr("T", tiny_table(), &ctr);
    CHECK(tr.domain() == Interval{0, 8});
    CHECK(tr.h_value(Big(0)) == 1);
    CHECK(tr.h_value(Big(7)) == 2);

    bool ok = false;
    tr.post(Interval{0, 8}, 10, 20, clk, ok);
    CHECK(ok);
    // A second value on the 1-slot cells must wait...
    auto id2 = tr.post(Interval{0, 4}, 11, 21, clk, ok);
    CHECK_FALSE(ok);
    REQUIRE(tr.pending().size() == 1);
    // ...but fits fine where two slots exist.
    tr.post(Interval{4, 8}, 11, 21, clk, ok);
    CHECK(ok);
    CHECK(tr.member(Big(2), 10));
    CHECK_FALSE(tr.member(Big(2), 11));
    CHECK(tr.member(Big(5), 11));
    CHECK(tr.values_at(Big(5)) == std::set<std::uint64_t>{10, 11});

    // The blocked axiom reports what holds it back.
    auto blocker = tr.min_blocking_use(id2);
    REQUIRE(blocker.has_value());
    CHECK(*blocker == 20);

    // An oracle change below every use kills the board and frees the queue.
    clk.tick = 2;
    auto admitted = tr.on_oracle_element(5, clk);
    REQUIRE(admitted.size() == 1);
    CHECK(admitted[0] == id2);
    CHECK_FALSE(tr.member(Big(2), 10));
    CHECK(tr.member(Big(2), 11));  // the late axiom now governs
    CHECK(tr.pending().empty());
}

TEST_CASE("same value never costs a second slot") {
    Clock clk;
    clk.tick = 1;
    TraceState tr("T", tiny_table(), nullptr);
    bool ok = false;
    tr.post(Interval{0, 4}, 5, 30, clk, ok);
    CHECK(ok);
    tr.post(Interval{0, 4}, 5, 40, clk, ok);
    CHECK(ok);  // duplicate value, distinct use
    CHECK(tr.values_at(Big(1)) == std::set<std::uint64_t>{5});
    // Killing only the younger use leaves the value traced.
    clk.tick = 2;
    tr.on_oracle_element(35, clk);
    CHECK(tr.member(Big(1), 5));
    auto v = tr.v_use(Interval{0, 4}, 5);
    REQUIRE(v.has_value());
    CHECK(*v == 30);
}

TEST_CASE("computation use takes the worst cell") {
    Clock clk;
    clk.tick = 1;
    TraceState tr("T", tiny_table(), nullptr);
    bool ok = false;
    tr.post(Interval{0, 6}, 10, 7, clk, ok);
    REQUIRE(ok);
    tr.post(Interval{4, 8}, 10, 3, clk, ok);
    REQUIRE(ok);
    // Per point: least covering use; over the region: the maximum.
    auto v = tr.v_use(Interval{0, 8}, 10);
    REQUIRE(v.has_value());
    CHECK(*v == 7);
    auto v2 = tr.v_use(Interval{4, 8}, 10);
    REQUIRE(v2.has_value());
    CHECK(*v2 == 3);
    CHECK_FALSE(tr.v_use(Interval{0, 8}, 99).has_value());
    // Kill the wide axiom: [0,4) loses the value entirely.
    clk.tick = 2;
    tr.on_oracle_element(4, clk);
    CHECK_FALSE(tr.v_use(Interval{0, 8}, 10).has_value());
    CHECK(tr.covers_value(Interval{4, 8}, 10));  // use 3 survives an element 4
}

TEST_CASE("bad axiom regions are rejected") {
    Clock clk;
    TraceState tr("T", tiny_table(), nullptr);
    bool ok = false;
    CHECK_THROWS_AS(tr.post(Interval{3, 3}, 1, 1, clk, ok), std::invalid_argument);
    CHECK_THROWS_AS(tr.post(Interval{6, 9}, 1, 1, clk, ok), std::invalid_argument);
    // Rows must ascend; gaps are allowed but nothing can be posted into one.
    CHECK_THROWS_AS(TraceState("bad", {{Interval{2, 4}, 1}, {Interval{0, 2}, 1}}, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(TraceState("bad", {{Interval{0, 3}, 1}, {Interval{2, 4}, 1}}, nullptr),
                    std::invalid_argument);
    TraceState gappy("G", {{Interval{0, 2}, 1}, {Interval{3, 5}, 1}}, nullptr);
    CHECK_THROWS_AS(gappy.post(Interval{2, 3}, 1, 1, clk, ok), std::invalid_argument);
    CHECK_THROWS_AS(gappy.post(Interval{1, 4}, 1, 1, clk, ok), std::invalid_argument);
    gappy.post(Interval{3, 5}, 1, 1, clk, ok);
    CHECK(ok);
}

TEST_CASE("stage obligations") {
    Clock clk;
    clk.tick = 1;
    TraceState tr("T", tiny_table(), nullptr);
    PsiState psi;
    psi.write(Interval{0, 4}, 1, 1);
    std::vector<UnmetObligation> unmet;
    CHECK_FALSE(obligations_met(psi, tr, tr.domain(), &unmet));
    REQUIRE(unmet.size() == 1);
    CHECK(unmet[0].region == Interval{0, 4});
    CHECK(unmet[0].value == 1);
    CHECK(unmet[0].witness == 0);
    bool ok = false;
    tr.post(Interval{0, 3}, 1, 9, clk, ok);
    unmet.clear();
    CHECK_FALSE(obligations_met(psi, tr, tr.domain(), &unmet));
    REQUIRE(unmet.size() == 1);
    CHECK(unmet[0].witness == 3);  // the uncovered tail
    tr.post(Interval{3, 4}, 1, 9, clk, ok);
    CHECK(obligations_met(psi, tr, tr.domain()));
    // Scoped check only sees pieces inside the scope.
    psi.write(Interval{6, 8}, 2, 2);
    CHECK(obligations_met(psi, tr, Interval{0, 4}));
    CHECK_FALSE(obligations_met(psi, tr, tr.domain()));
    // A death reopens the obligation.
    clk.tick = 3;
    tr.post(Interval{6, 8}, 2, 5, clk, ok);
    CHECK(obligations_met(psi, tr, tr.domain()));
    clk.tick = 4;
    tr.on_oracle_element(2, clk);
    CHECK_FALSE(obligations_met(psi, tr, tr.domain()));
}

TEST_CASE("halt declarations are single shot") {
    PcfState pcf;
    CHECK(pcf.declare(2, 7, 0, 5));
    CHECK_FALSE(pcf.declare(2, 7, 1, 6));  // immutable
    REQUIRE(pcf.value(2, 7).has_value());
    CHECK(*pcf.value(2, 7) == 0);
    CHECK_FALSE(pcf.value(2, 8).has_value());
    CHECK(pcf.declared(2, 7));
}

// Randomized equivalence against a per-point mirror. The mirror stores, for
// every integer point, the set of live values, and replays admission, death
// and the FIFO retry rule directly.
TEST_CASE("trace agrees with a per-point mirror") {
    struct MirrorAx {
        std::uint64_t lo, hi, value, use;
        bool accepted = false, dead = false;
    };
    const std::uint64_t H[6] = {1, 1, 1, 2, 2, 2};
    auto table = std::vector<std::pair<Interval, std::uint64_t>>{
        {Interval{0, 3}, 1}, {Interval{3, 6}, 2}};

    std::mt19937_64 rng(424242);
    for (int round = 0; round < 20; ++round) {
        Clock clk;
        TraceState tr("T", table, nullptr);
        std::vector<MirrorAx> axs;
        std::deque<std::size_t> mirror_pending;

        auto mirror_values = [&](std::uint64_t z) {
            std::set<std::uint64_t> vals;
            for (const auto& m : axs)
                if (m.accepted && !m.dead && m.lo <= z && z < m.hi) vals.insert(m.value);
            return vals;
        };
        auto mirror_fits = [&](const MirrorAx& m) {
            for (std::uint64_t z = m.lo; z < m.hi; ++z) {
                auto vals = mirror_values(z);
                vals.insert(m.value);
                if (vals.size() > H[z]) return false;
            }
            return true;
        };
        auto mirror_retry = [&] {
            std::deque<std::size_t> keep;
            for (std::size_t id : mirror_pending) {
                if (mirror_fits(axs[id]))
                    axs[id].accepted = true;
                else
                    keep.push_back(id);
            }
            mirror_pending = std::move(keep);
        };

        for (Tick t = 1; t <= 40; ++t) {
            clk.tick = t;
            tr.retry_pending(clk);
            mirror_retry();
            int burst = static_cast<int>(rng() % 3);
            for (int b = 0; b < burst; ++b) {
                if (rng() % 4 == 0) {
                    std::uint64_t elem = rng() % 30;
                    for (auto& m : axs)
                        if (m.accepted && !m.dead && m.use > elem) m.dead = true;
                    mirror_retry();
                    tr.on_oracle_element(elem, clk);
                } else {
                    std::uint64_t lo = rng() % 6;
                    std::uint64_t hi = lo + 1 + rng() % (6 - lo);
                    std::uint64_t value = rng() % 5;
                    std::uint64_t use = 1 + rng() % 40;
                    MirrorAx m{lo, hi, value, use};
                    if (mirror_fits(m)) m.accepted = true;
                    axs.push_back(m);
                    if (!m.accepted) mirror_pending.push_back(axs.size() - 1);
                    bool ok = false;
                    tr.post(Interval{lo, hi}, value, use, clk, ok);
                    REQUIRE(ok == axs.back().accepted);
                }
            }
            for (std::uint64_t z = 0; z < 6; ++z) {
                auto want = mirror_values(z);
                REQUIRE(tr.values_at(Big(z)) == want);
                REQUIRE(want.size() <= H[z]);  // bound always enforced
            }
            REQUIRE(tr.pending().size() == mirror_pending.size());
        }
    }
}
