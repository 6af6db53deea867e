#include <catch2/catch_amalgamated.hpp>

#include "boxsim/carve.hpp"
#include "boxsim/ints.hpp"

using namespace boxsim;

TEST_CASE("interval basics") {
    Interval a{3, 10};
    CHECK(a.size() == 7);
    CHECK(a.contains(Big(3)));
    CHECK(a.contains(Big(9)));
    CHECK_FALSE(a.contains(Big(10)));
    CHECK(a.contains(Interval{4, 6}));
    CHECK_FALSE(a.contains(Interval{4, 11}));
    CHECK(a.overlaps(Interval{9, 20}));
    CHECK_FALSE(a.overlaps(Interval{10, 20}));
    CHECK(a.intersect(Interval{5, 20}) == Interval{5, 10});
    CHECK(a.intersect(Interval{20, 30}).empty());
    CHECK(Interval{5, 5}.empty());
    CHECK(singleton(Big(7)) == Interval{7, 8});
}

TEST_CASE("interval set coverage") {
    IntervalSet s;
    CHECK(s.covers(Interval{0, 0}));
    CHECK_FALSE(s.covers(Interval{0, 1}));
    s.add(Interval{0, 5});
    s.add(Interval{7, 9});
    CHECK(s.covers(Interval{1, 4}));
    CHECK_FALSE(s.covers(Interval{4, 8}));
    Big gap;
    REQUIRE(s.first_gap(Interval{4, 8}, gap));
    CHECK(gap == 5);
    s.add(Interval{5, 7});  // merges everything
    CHECK(s.parts.size() == 1);
    CHECK(s.covers(Interval{0, 9}));
    CHECK(s.contains(Big(6)));
    CHECK_FALSE(s.contains(Big(9)));
}

TEST_CASE("interval set merge with overlap") {
    IntervalSet s;
    s.add(Interval{10, 20});
    s.add(Interval{15, 30});
    s.add(Interval{0, 2});
    REQUIRE(s.parts.size() == 2);
    CHECK(s.parts[0] == Interval{0, 2});
    CHECK(s.parts[1] == Interval{10, 30});
}

TEST_CASE("decimal round trip") {
    Big v = big_parse("192100037");
    CHECK(big_str(v) == "192100037");
    Big w = pow_big(Big(577), 3) + 4;
    CHECK(w == v);
    CHECK_THROWS_AS(big_parse(""), std::invalid_argument);
    CHECK_THROWS_AS(big_parse("12x"), std::invalid_argument);
}

TEST_CASE("big values survive the round trip") {
    Big v = (Big(1) << 200) + 12345;
    CHECK(big_parse(big_str(v)) == v);
}
