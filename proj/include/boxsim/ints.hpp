#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace boxsim {

// Addresses into the marker layouts can exceed 1e37, so they are arbitrary
// precision throughout. Ticks, uses, oracle elements and follower ids are
// ordinary machine integers.
using Big = boost::multiprecision::cpp_int;
using Tick = std::uint64_t;

inline std::string big_str(const Big& v) { return v.str(); }

inline Big big_parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("bad integer literal: " + s);
    for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9')
            throw std::invalid_argument("bad integer literal: " + s);
    return Big(s);
}

// Half-open interval [lo, hi). Empty iff hi <= lo.
struct Interval {
    Big lo{0};
    Big hi{0};

    bool empty() const { return hi <= lo; }
    Big size() const { return empty() ? Big(0) : hi - lo; }
    bool contains(const Big& z) const { return lo <= z && z < hi; }
    bool contains(const Interval& o) const {
        return o.empty() || (lo <= o.lo && o.hi <= hi);
    }
    bool overlaps(const Interval& o) const {
        return !empty() && !o.empty() && lo < o.hi && o.lo < hi;
    }
    Interval intersect(const Interval& o) const {
        Interval r{std::max(lo, o.lo), std::min(hi, o.hi)};
        if (r.hi < r.lo) r.hi = r.lo;
        return r;
    }
    bool operator==(const Interval& o) const = default;
};

inline Interval singleton(const Big& z) { return Interval{z, z + 1}; }

// Sorted union of disjoint intervals. Used for coverage questions: "is this
// region fully covered by that set of regions". All operations are symbolic;
// nothing here is proportional to interval length.
struct IntervalSet {
    std::vector<Interval> parts;  // disjoint, sorted by lo

    void add(Interval v) {
        if (v.empty()) return;
        std::vector<Interval> out;
        out.reserve(parts.size() + 1);
        for (auto& p : parts) {
            if (p.hi < v.lo || v.hi < p.lo) {
                out.push_back(p);
            } else {
                v.lo = std::min(v.lo, p.lo);
                v.hi = std::max(v.hi, p.hi);
            }
        }
        out.push_back(v);
        std::sort(out.begin(), out.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        parts = std::move(out);
    }

    bool covers(const Interval& region) const {
        if (region.empty()) return true;
        Big need = region.lo;
        for (const auto& p : parts) {
            if (p.hi <= need) continue;
            if (p.lo > need) return false;
            need = p.hi;
            if (need >= region.hi) return true;
        }
        return need >= region.hi;
    }

    bool contains(const Big& z) const {
        for (const auto& p : parts)
            if (p.contains(z)) return true;
        return false;
    }

    // First point of `region` not covered, if any (for diagnostics).
    bool first_gap(const Interval& region, Big& out) const {
        if (region.empty()) return false;
        Big need = region.lo;
        for (const auto& p : parts) {
            if (p.hi <= need) continue;
            if (p.lo > need) { out = need; return true; }
            need = p.hi;
            if (need >= region.hi) return false;
        }
        if (need < region.hi) { out = need; return true; }
        return false;
    }
};

// Counters backing the "no per-element materialization" check: every
// long-lived per-point entry (private slots, singleton boxes, axiom records,
// state pieces) bumps these, and a run asserts the totals stay small even
// when the address space has ~1e8 points.
struct AllocCounters {
    std::uint64_t explicit_z_entries = 0;  // entries keyed by a single address
    std::uint64_t region_records = 0;      // stored interval records of any width
};

}  // namespace boxsim
