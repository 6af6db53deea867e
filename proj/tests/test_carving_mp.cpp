#include <catch2/catch_amalgamated.hpp>

#include "boxsim/carve.hpp"
#include "helpers/carving_check.hpp"

using namespace boxsim;

TEST_CASE("layout places levels consecutively from zero") {
    LayoutMP lay(1, 3);
    CHECK(lay.interval_of(1) == Interval{0, 17});
    CHECK(lay.interval_of(2) == Interval{17, 234});
    CHECK(lay.interval_of(3) == Interval{234, 4331});
    CHECK(lay.domain_end() == 4331);
    CHECK(lay.private_slot(1) == 0);
    CHECK(lay.private_slot(2) == 17);
}

TEST_CASE("worked carving examples at level one") {
    LayoutMP lay(1, 2);
    CHECK(lay.carve(1, {}) == Interval{1, 17});
    CHECK(lay.carve(1, {0}) == Interval{1, 5});
    CHECK(lay.carve(1, {3}) == Interval{13, 17});
    CHECK(lay.carve(1, {0, 0}) == Interval{1, 2});
    CHECK(lay.carve(1, {3, 3}) == Interval{16, 17});
    CHECK(lay.carve(2, {}) == Interval{18, 234});
    CHECK(lay.carve(2, {5}) == Interval{198, 234});
}

TEST_CASE("h equals the level everywhere") {
    LayoutMP lay(1, 3);
    CHECK(lay.h_value(Big(0)) == 1);
    CHECK(lay.h_value(Big(16)) == 1);
    CHECK(lay.h_value(Big(17)) == 2);
    CHECK(lay.h_value(Big(233)) == 2);
    CHECK(lay.h_value(Big(234)) == 3);
    CHECK(lay.h_value(Big(4330)) == 3);
    CHECK_THROWS_AS(lay.h_value(Big(4331)), std::invalid_argument);
}

TEST_CASE("layout respects the recursion constant") {
    LayoutMP lay(2, 3);
    CHECK(lay.interval_of(2) == Interval{0, 217});
    CHECK(lay.interval_of(3) == Interval{217, 4314});
    CHECK_THROWS_AS(lay.interval_of(1), std::invalid_argument);
    CHECK_THROWS_AS(lay.carve(1, {}), std::invalid_argument);
}

TEST_CASE("rejected addresses") {
    LayoutMP lay(1, 2);
    CHECK_THROWS_AS(lay.carve(1, {4}), std::invalid_argument);       // digit >= a(1)
    CHECK_THROWS_AS(lay.carve(1, {0, 0, 0}), std::invalid_argument); // length > k+1
    CHECK_THROWS_AS(lay.carve(3, {}), std::invalid_argument);        // level outside layout
}

TEST_CASE("carving algebra is exhaustively correct at small levels") {
    auto rep = boxsim_check::check_carving(1, 3);
    INFO(rep.detail);
    CHECK(rep.ok);
    // Levels 1..3 contribute (1+4+16) + (1+6+36+216) + (1+8+64+512+4096) addresses.
    CHECK(rep.addresses == 21 + 259 + 4681);
}

TEST_CASE("carving algebra holds for a larger recursion constant") {
    auto rep = boxsim_check::check_carving(2, 3);
    INFO(rep.detail);
    CHECK(rep.ok);
}
