#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "boxsim/layout_tree.hpp"

using namespace boxsim;

TEST_CASE("single column layout stacks levels in order") {
    auto t = StrategyTree::with_defaults(2, 0);
    LayoutTree lay(&t, 0);  // only the root guards functional 0
    REQUIRE(lay.columns().size() == 1);
    CHECK(lay.interval_of(t.root(), 0) == Interval{0, 26});
    CHECK(lay.interval_of(t.root(), 1) == Interval{26, 26 + 14643});
    CHECK(lay.interval_of(t.root(), 2).size() == big_parse("192100037"));
    CHECK(lay.domain_end() == Big(26) + 14643 + big_parse("192100037"));
    // Slot bound: positive everywhere, nondecreasing, equals the level above 1.
    CHECK(lay.h_value(Big(0)) == 1);
    CHECK(lay.h_value(Big(25)) == 1);
    CHECK(lay.h_value(Big(26)) == 1);
    CHECK(lay.h_value(Big(26 + 14642)) == 1);
    CHECK(lay.h_value(Big(26 + 14643)) == 2);
    CHECK_THROWS_AS(lay.h_value(lay.domain_end()), std::invalid_argument);
}

TEST_CASE("two columns interleave level-major") {
    auto t = StrategyTree::with_defaults(2, 0);
    LayoutTree lay(&t, 1);  // N:1,0 sits at both "f" and "ip"
    REQUIRE(lay.columns().size() == 2);
    int f = t.find("f");
    int ip = t.find("ip");
    // Level 0 is empty (both columns start below the root); level 1 holds
    // only "f"; level 2 holds both, in BFS order.
    CHECK(lay.interval_of(f, 1) == Interval{0, 14643});
    CHECK_THROWS_AS(lay.interval_of(ip, 1), std::invalid_argument);
    Big i2 = big_parse("192100037");
    CHECK(lay.interval_of(f, 2) == Interval{14643, 14643 + i2});
    CHECK(lay.interval_of(ip, 2) == Interval{14643 + i2, 14643 + i2 * 2});
    CHECK(lay.node_of(Big(5)) == f);
    CHECK(lay.node_of(Big(14643)) == f);
    CHECK(lay.node_of(Big(14643) + i2) == ip);
    // Column listing matches.
    auto col = lay.column_of(ip);
    REQUIRE(col.size() == 1);
    CHECK(col[0] == lay.interval_of(ip, 2));
}

TEST_CASE("level sizes match the closed forms") {
    CHECK(LayoutTree::level_size(0) == 26);
    CHECK(LayoutTree::level_size(1) == 14643);
    CHECK(LayoutTree::level_size(2) == big_parse("192100037"));
    CHECK(LayoutTree::level_size(6) ==
          big_parse("89835739103340072745656888527226157121"));
}

TEST_CASE("carving leaves the private block alone") {
    auto t = StrategyTree::with_defaults(2, 0);
    LayoutTree lay(&t, 0);
    int root = t.root();
    Interval i1 = lay.interval_of(root, 1);
    Interval rootbox = lay.carve(root, 1, {});
    CHECK(rootbox.lo == i1.lo + 2);  // 2^1 private slots first
    CHECK(rootbox.hi == i1.hi);
    CHECK(rootbox.size() == 121 * 121);
    // Private slot for the positive node "i" anchored at the root.
    Big slot = lay.private_slot(root, 1, t.find("i"));
    CHECK(slot == i1.lo);
    CHECK_FALSE(rootbox.contains(slot));
    CHECK_THROWS_AS(lay.private_slot(root, 2, t.find("i")), std::invalid_argument);
}

TEST_CASE("private slots follow anchor rank") {
    auto t = StrategyTree::with_defaults(2, 0);
    LayoutTree lay(&t, 1);
    int f = t.find("f");
    // "fi" (P:0, length 2) anchors at "f"; its slot sits in I("f", 2).
    Big slot = lay.private_slot(f, 2, t.find("fi"));
    CHECK(slot == lay.interval_of(f, 2).lo);
}

TEST_CASE("exhaustive carving laws at level zero") {
    auto t = StrategyTree::with_defaults(1, 0);
    LayoutTree lay(&t, 0);
    int root = t.root();
    Interval i0 = lay.interval_of(root, 0);
    // All addresses of length <= 1 over 25 digits.
    std::vector<Address> addrs{{}};
    for (std::uint64_t d = 0; d < 25; ++d) addrs.push_back({d});
    Interval rootbox = lay.carve(root, 0, {});
    CHECK(rootbox == Interval{i0.lo + 1, i0.hi});
    Big at = rootbox.lo;
    for (std::uint64_t d = 0; d < 25; ++d) {
        Interval leaf = lay.carve(root, 0, {d});
        CHECK(leaf.lo == at);
        CHECK(leaf.size() == 1);
        at = leaf.hi;
    }
    CHECK(at == rootbox.hi);
    for (std::size_t i = 1; i < addrs.size(); ++i)
        for (std::size_t j = i + 1; j < addrs.size(); ++j)
            CHECK_FALSE(lay.carve(root, 0, addrs[i]).overlaps(lay.carve(root, 0, addrs[j])));
}

TEST_CASE("randomized carving laws at deep levels") {
    auto t = StrategyTree::with_defaults(6, 1);
    LayoutTree lay(&t, 3);
    REQUIRE_FALSE(lay.columns().empty());
    int tau = lay.columns()[0];
    std::uint64_t tau_len = t.node(tau).length();
    std::mt19937_64 rng(20250825);
    for (int trial = 0; trial < 200; ++trial) {
        std::uint64_t k = tau_len + rng() % (6 - tau_len + 1);
        Big a = cap_tree(k);
        std::uint64_t a_small = a.convert_to<std::uint64_t>();
        // Random address, then check the whole prefix chain.
        std::uint64_t len = rng() % (k + 2);
        Address alpha;
        for (std::uint64_t i = 0; i < len; ++i) alpha.push_back(rng() % a_small);
        Interval prev = lay.carve(tau, k, {});
        Interval ik = lay.interval_of(tau, k);
        CHECK(prev.hi == ik.hi);
        CHECK(prev.lo == ik.lo + (Big(1) << k));
        for (std::uint64_t i = 0; i < len; ++i) {
            Address pre(alpha.begin(), alpha.begin() + i + 1);
            Interval box = lay.carve(tau, k, pre);
            CHECK(prev.contains(box));
            CHECK(box.size() == pow_big(a, k + 1 - pre.size()));
            // Sibling just to the right, when it exists, is adjacent and
            // disjoint.
            if (pre.back() + 1 < a_small) {
                Address sib = pre;
                ++sib.back();
                Interval sbox = lay.carve(tau, k, sib);
                CHECK(sbox.lo == box.hi);
                CHECK_FALSE(sbox.overlaps(box));
            }
            prev = box;
        }
    }
}

TEST_CASE("all laid out intervals are pairwise disjoint and exhaustive") {
    auto t = StrategyTree::with_defaults(4, 1);
    for (std::uint64_t e = 0; e <= 4; ++e) {
        auto negs = t.negative_nodes_for(e);
        if (negs.empty()) continue;
        LayoutTree lay(&t, e);
        Big covered = 0;
        std::vector<Interval> all;
        for (int tau : lay.columns())
            for (auto& iv : lay.column_of(tau)) {
                all.push_back(iv);
                covered += iv.size();
            }
        CHECK(covered == lay.domain_end());
        std::uint64_t prev_h = 1;
        std::sort(all.begin(), all.end(),
                  [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
        Big at = 0;
        for (auto& iv : all) {
            CHECK(iv.lo == at);  // contiguous, no gaps
            at = iv.hi;
            std::uint64_t h = lay.h_value(iv.lo);
            CHECK(h >= prev_h);  // nondecreasing bound
            prev_h = h;
        }
    }
}

TEST_CASE("layout for an unguarded functional is rejected") {
    auto t = StrategyTree::with_defaults(1, 0);
    CHECK_THROWS_AS(LayoutTree(&t, 9), std::invalid_argument);
}
