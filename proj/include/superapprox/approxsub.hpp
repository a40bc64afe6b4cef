#pragma once

// Approximate-subgroup diagnostics on finite quotients: product sets, the
// level-Q predicate (walk mass, walk length, tripling), bounded generation
// of congruence kernels, and commutator width.

#include <cstdint>
#include <vector>

#include "superapprox/groupgen.hpp"
#include "superapprox/spectral.hpp"
#include "superapprox/treereg.hpp"  // Rational

namespace superapprox {

struct SubsetView {
    const Quotient* quotient;
    std::vector<std::uint32_t> positions;  // sorted, unique
    bool symmetric = false;

    SubsetView(const Quotient& g, std::vector<std::uint32_t> pos, bool check_symmetric = false);
    size_t size() const { return positions.size(); }
};

// {x y : x in X, y in Y}
SubsetView product_set(const SubsetView& x, const SubsetView& y);

struct PredicateReport {
    bool mass_ok;      // P_Omega^{(l)}(A) > Q^{-delta}
    bool length_ok;    // l > (1/delta) log Q  (natural log)
    bool tripling_ok;  // |A A A| <= |A|^{1+delta}, exact for rational delta
    bool overall;

    double walk_mass;
    double mass_threshold;
    unsigned walk_length;
    double length_threshold;
    std::uint64_t size_a;
    std::uint64_t size_aaa;
    double tripling_exponent;  // log |AAA| / log |A|
};

PredicateReport pq_predicate(const SubsetView& a, const Rational& delta, unsigned walk_length);

// containment of the level-m congruence kernel in the C-fold product of A
bool bounded_gen_check(const SubsetView& a, unsigned c, unsigned level);

// least C <= c_max with the containment, or 0 if none
unsigned bounded_gen_min_c(const SubsetView& a, unsigned level, unsigned c_max);

struct CommutatorFill {
    unsigned t_min;  // least t with prod_t w(G) = [G,G]; 0 for abelian G
    bool is_p_group;
    bool bound_ok;                  // t_min <= n - m for p-groups, else true
    std::uint64_t derived_order;    // |[G,G]|
    std::uint64_t abelian_order;    // |G/[G,G]|
    std::uint64_t commutator_count; // |w(G)|
};

CommutatorFill commutator_fill(const Quotient& g, std::uint64_t guard = 100'000);

}  // namespace superapprox
