#pragma once

// Marker layout for the two-sided (minimal pair) construction, plus the
// capacity formulas shared with the tree layout.
//
// The address space is split into successive intervals I(k), one per level
// k >= c. Each I(k) holds one reserved private slot J(k) (its minimum) and a
// root box B(k, <>) of size a(k)^(k+1). Boxes are addressed by digit strings
// alpha of length <= k+1 over the alphabet {0, ..., a(k)-1}; the children of
// a box are its a(k) consecutive equal sub-blocks. Everything is computed
// arithmetically; no box is ever materialized element by element.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "boxsim/ints.hpp"

namespace boxsim {

// Branching capacity per level for the two-sided construction.
inline Big cap_mp(std::uint64_t k) { return Big(2 * k + 2); }

// Per-level follower budget used by the tree capacity.
inline Big cap_b(std::uint64_t k) {
    return Big(k + 1) * (Big(1) + (Big(1) << k));
}

// Branching capacity per level for the tree construction.
inline Big cap_tree(std::uint64_t k) {
    return Big(1) + (Big(1) << (k + 2)) * Big(k + 2) * (Big(1) + (Big(1) << (k + 1)));
}

enum class Variant { mp, tree };

inline Big capacity(Variant v, std::uint64_t k) {
    return v == Variant::mp ? cap_mp(k) : cap_tree(k);
}

// Digit string addressing a box within a level. Digits at level k run over
// {0, ..., a(k)-1}; the root box has the empty address.
using Address = std::vector<std::uint64_t>;

inline std::string address_str(const Address& a) {
    std::string s = "<";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(a[i]);
    }
    return s + ">";
}

inline Big pow_big(const Big& base, std::uint64_t exp) {
    Big r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) r *= base;
    return r;
}

// Generic carving inside one root box [root_lo, root_lo + a^(k+1)): walking
// the digits of alpha narrows to consecutive sub-blocks of width a^(k-j).
inline Interval carve_in_root(const Big& root_lo, const Big& a, std::uint64_t k,
                              const Address& alpha) {
    if (alpha.size() > k + 1)
        throw std::invalid_argument("box address longer than level depth: " +
                                    address_str(alpha));
    Big lo = root_lo;
    Big width = pow_big(a, k + 1);
    for (std::uint64_t d : alpha) {
        if (Big(d) >= a)
            throw std::invalid_argument("box digit out of range: " + address_str(alpha));
        width /= a;  // exact: width was a^(k+1-j)
        lo += Big(d) * width;
    }
    return Interval{lo, lo + width};
}

// Two-sided layout: consecutive intervals I(c), I(c+1), ..., I(k_max) from 0.
// Both sides use the same address space; the per-side state (traces, marker
// assignments) is kept elsewhere.
class LayoutMP {
public:
    LayoutMP(std::uint64_t c, std::uint64_t k_max) : c_(c), k_max_(k_max) {
        if (c < 1) throw std::invalid_argument("recursion constant must be >= 1");
        if (k_max < c) throw std::invalid_argument("layout needs at least one level");
        Big at = 0;
        for (std::uint64_t k = c; k <= k_max; ++k) {
            starts_.push_back(at);
            at += level_size(k);
        }
        end_ = at;
    }

    std::uint64_t c() const { return c_; }
    std::uint64_t k_max() const { return k_max_; }
    Big domain_end() const { return end_; }

    // |I(k)| = 1 + a(k)^(k+1): one private slot plus the root box.
    static Big level_size(std::uint64_t k) {
        return Big(1) + pow_big(cap_mp(k), k + 1);
    }

    Interval interval_of(std::uint64_t k) const {
        check_level(k);
        return Interval{starts_[k - c_], starts_[k - c_] + level_size(k)};
    }

    // Trace slot bound: h(z) = k on I(k).
    std::uint64_t h_value(const Big& z) const {
        for (std::uint64_t k = c_; k <= k_max_; ++k)
            if (interval_of(k).contains(z)) return k;
        throw std::invalid_argument("address outside the laid-out domain: " + big_str(z));
    }

    // The reserved private slot of level k.
    Big private_slot(std::uint64_t k) const {
        check_level(k);
        return starts_[k - c_];
    }

    Interval carve(std::uint64_t k, const Address& alpha) const {
        check_level(k);
        return carve_in_root(starts_[k - c_] + 1, cap_mp(k), k, alpha);
    }

private:
    void check_level(std::uint64_t k) const {
        if (k < c_ || k > k_max_)
            throw std::invalid_argument("level outside layout: " + std::to_string(k));
    }

    std::uint64_t c_;
    std::uint64_t k_max_;
    std::vector<Big> starts_;
    Big end_;
};

}  // namespace boxsim
