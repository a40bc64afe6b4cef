#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "superapprox/approxsub.hpp"

using namespace superapprox;

namespace {

Quotient cyclic(std::uint64_t n) {
    GeneratorSet u({RationalMatrix(2, {1, 1, 0, 1}, 1, 0)});
    return enumerate_quotient(u, Modulus::from_value(Int(static_cast<unsigned long>(n))));
}

std::uint32_t cyclic_pos(const Quotient& g, std::uint64_t j) {
    std::vector<Int> e{1, Int(static_cast<unsigned long>(j)), 0, 1};
    auto pos = g.find(ResidueMatrix(2, std::move(e), g.modulus()));
    REQUIRE(pos.has_value());
    return *pos;
}

}  // namespace

TEST_CASE("product set basics") {
    Quotient z12 = cyclic(12);

    // identity singleton leaves Y unchanged
    SubsetView ident(z12, {0});
    SubsetView y(z12, {cyclic_pos(z12, 2), cyclic_pos(z12, 5), cyclic_pos(z12, 7)});
    SubsetView prod = product_set(ident, y);
    CHECK(prod.positions == y.positions);

    // a subgroup is closed: {0,4,8} in Z/12
    SubsetView sub(z12, {cyclic_pos(z12, 0), cyclic_pos(z12, 4), cyclic_pos(z12, 8)});
    CHECK(product_set(sub, sub).positions == sub.positions);

    // interval sumset {0..3} + {0..3} = {0..6}
    std::vector<std::uint32_t> interval;
    for (std::uint64_t j = 0; j <= 3; ++j) interval.push_back(cyclic_pos(z12, j));
    SubsetView x(z12, interval);
    SubsetView xx = product_set(x, x);
    CHECK(xx.size() == 7);

    Quotient other = cyclic(12);
    SubsetView foreign(other, {0});
    CHECK_THROWS_WITH_AS(product_set(x, foreign), "mismatched quotients", std::invalid_argument);
}

TEST_CASE("subset symmetry flag is checked") {
    Quotient z12 = cyclic(12);
    CHECK_THROWS(SubsetView(z12, {cyclic_pos(z12, 1)}, true));
    CHECK_NOTHROW(SubsetView(z12, {cyclic_pos(z12, 1), cyclic_pos(z12, 11)}, true));
}

TEST_CASE("pq predicate conjuncts") {
    Quotient sl2 = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("5"));

    // whole group with a long walk: mass and tripling hold
    std::vector<std::uint32_t> all(sl2.order());
    for (std::uint32_t i = 0; i < sl2.order(); ++i) all[i] = i;
    PredicateReport whole = pq_predicate(SubsetView(sl2, all), Rational{1, 10}, 100);
    CHECK(whole.mass_ok);
    CHECK(whole.tripling_ok);
    CHECK(whole.length_ok);
    CHECK(whole.overall);

    // identity singleton after one step has zero mass: 0 < 5^{-1/10}
    PredicateReport ident = pq_predicate(SubsetView(sl2, {0}), Rational{1, 10}, 1);
    CHECK_FALSE(ident.mass_ok);
    CHECK(ident.walk_mass == doctest::Approx(0.0));

    // proper subgroups triple exactly
    Quotient z12 = cyclic(12);
    SubsetView sub(z12, {cyclic_pos(z12, 0), cyclic_pos(z12, 4), cyclic_pos(z12, 8)});
    PredicateReport psub = pq_predicate(sub, Rational{1, 100}, 1);
    CHECK(psub.size_aaa == psub.size_a);
    CHECK(psub.tripling_ok);
}

TEST_CASE("tripling of cosets is exact") {
    Quotient z12 = cyclic(12);
    // coset {1, 5, 9} of the subgroup {0, 4, 8}
    SubsetView coset(z12, {cyclic_pos(z12, 1), cyclic_pos(z12, 5), cyclic_pos(z12, 9)});
    SubsetView sq = product_set(coset, coset);
    SubsetView cube = product_set(sq, coset);
    CHECK(cube.size() == coset.size());
}

TEST_CASE("bounded generation") {
    Quotient sl2_9 = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3^2"));

    // A = whole group covers everything at C = 1
    std::vector<std::uint32_t> all(sl2_9.order());
    for (std::uint32_t i = 0; i < sl2_9.order(); ++i) all[i] = i;
    CHECK(bounded_gen_check(SubsetView(sl2_9, all), 1, 1));

    // identity alone never covers a nontrivial kernel
    CHECK_FALSE(bounded_gen_check(SubsetView(sl2_9, {0}), 8, 1));

    // generators plus identity cover the level-1 kernel at some C <= 20,
    // and the minimal C is stable across runs
    std::vector<std::uint32_t> gen_pos{0};
    for (size_t s = 0; s < sl2_9.generator_count(); ++s) gen_pos.push_back(sl2_9.act(s, 0));
    SubsetView a(sl2_9, gen_pos);
    unsigned c1 = bounded_gen_min_c(a, 1, 20);
    unsigned c2 = bounded_gen_min_c(a, 1, 20);
    CHECK(c1 != 0);
    CHECK(c1 == c2);
    CHECK(bounded_gen_check(a, c1, 1));
    if (c1 > 1) CHECK_FALSE(bounded_gen_check(a, c1 - 1, 1));

    // monotone in C when the identity is in A; in particular C = 12 covers
    for (unsigned c = c1; c <= std::min(c1 + 3, 20u); ++c) CHECK(bounded_gen_check(a, c, 1));
    CHECK(bounded_gen_check(a, 12, 1));

    CHECK_THROWS(bounded_gen_check(a, 65, 1));  // C guard
    CHECK_THROWS(bounded_gen_min_c(a, 3, 1));   // level > n
}

TEST_CASE("commutator fill") {
    // abelian: t_min = 0
    CommutatorFill ab = commutator_fill(cyclic(12));
    CHECK(ab.t_min == 0);
    CHECK(ab.derived_order == 1);
    CHECK(ab.bound_ok);

    // Heisenberg mod 3: order 27, abelianization 9, t_min = 1 <= 1
    Quotient h3 = enumerate_quotient(unitriangular_generators(3), Modulus::parse("3"));
    REQUIRE(h3.order() == 27);
    CommutatorFill ch3 = commutator_fill(h3);
    CHECK(ch3.is_p_group);
    CHECK(ch3.abelian_order == 9);
    CHECK(ch3.t_min == 1);
    CHECK(ch3.bound_ok);

    // SL2 mod 3: derived subgroup of order 8
    Quotient sl2_3 = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3"));
    CommutatorFill c3 = commutator_fill(sl2_3);
    CHECK(c3.derived_order == 8);
    CHECK(c3.abelian_order == 3);
    CHECK(c3.t_min == oracles::commutator_fill_by_bfs(sl2_3));

    // SL2 mod 5 is perfect: the commutator products fill the whole group
    Quotient sl2_5 = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("5"));
    CommutatorFill c5 = commutator_fill(sl2_5);
    CHECK(c5.derived_order == sl2_5.order());
    CHECK(c5.abelian_order == 1);
    CHECK(c5.t_min == oracles::commutator_fill_by_bfs(sl2_5));

    // SL2 mod 9: the fill reaches the derived subgroup at a finite t
    Quotient sl2_9 = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3^2"));
    CommutatorFill c9 = commutator_fill(sl2_9);
    CHECK(c9.t_min >= 1);
    CHECK(c9.derived_order < sl2_9.order());  // abelianization is nontrivial
    CHECK(c9.t_min == oracles::commutator_fill_by_bfs(sl2_9));
}

TEST_CASE("commutator p-group bound across the unitriangular suite") {
    struct Case {
        int dim;
        const char* mod;
    };
    for (const Case& c : {Case{3, "3"}, Case{3, "3^2"}, Case{3, "5"}, Case{4, "3"}}) {
        Quotient g = enumerate_quotient(unitriangular_generators(c.dim), Modulus::parse(c.mod));
        CommutatorFill r = commutator_fill(g);
        CHECK(r.is_p_group);
        CHECK(r.bound_ok);
    }
}
