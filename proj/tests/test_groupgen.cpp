#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "superapprox/groupgen.hpp"

using namespace superapprox;

namespace {

GeneratorSet single_unipotent() {
    return GeneratorSet({RationalMatrix(2, {1, 1, 0, 1}, 1, 0)});
}

}  // namespace

TEST_CASE("generator sets adjoin inverses") {
    GeneratorSet sl2 = sl2_elementary_generators();
    CHECK(sl2.size() == 4);
    CHECK(sl2.symmetric_closure_applied());

    // an involution needs no extra copy
    GeneratorSet invol({RationalMatrix(2, {0, 1, 1, 0}, 1, 0)});
    CHECK(invol.size() == 1);
    CHECK_FALSE(invol.symmetric_closure_applied());
}

TEST_CASE("quotient orders match the determinant-enumeration oracle") {
    GeneratorSet sl2 = sl2_elementary_generators();
    for (std::uint64_t q : {3ull, 5ull}) {
        Quotient G = enumerate_quotient(sl2, Modulus::from_value(Int(static_cast<unsigned long>(q))));
        CHECK(G.order() == oracles::sl2_order_by_enumeration(q));
    }
    CHECK(enumerate_quotient(sl2, Modulus::parse("3")).order() == 24);
    CHECK(enumerate_quotient(sl2, Modulus::parse("5")).order() == 120);
}

TEST_CASE("single unipotent generator gives a cycle") {
    Quotient G = enumerate_quotient(single_unipotent(), Modulus::parse("7"));
    CHECK(G.order() == 7);
    // cyclic: the orbit of the generator exhausts the group
    std::set<std::uint32_t> orbit;
    std::uint32_t x = 0;
    for (int t = 0; t < 7; ++t) {
        orbit.insert(x);
        x = G.act(0, x);
    }
    CHECK(orbit.size() == 7);
}

TEST_CASE("wide moduli fall back to the unpacked element index") {
    // 2x2 entries mod 65537 need 17 bits each, past the packed-key limit
    Quotient g = enumerate_quotient(single_unipotent(), Modulus::parse("65537"), 70000);
    CHECK(g.order() == 65537);
    CHECK(g.element(0).is_identity());
    std::uint32_t u = g.act(0, 0);
    CHECK(g.mul(u, g.inverse_pos(u)) == 0);
}

TEST_CASE("max_order guard carries the partial count") {
    GeneratorSet sl2 = sl2_elementary_generators();
    CHECK_THROWS_AS(enumerate_quotient(sl2, Modulus::parse("7"), 100), QuotientTooLarge);
    try {
        enumerate_quotient(sl2, Modulus::parse("7"), 100);
    } catch (const QuotientTooLarge& e) {
        CHECK(e.partial_count > 100);
        CHECK(e.partial_count <= 336);
    }
}

TEST_CASE("element order is deterministic and BFS-level sorted") {
    GeneratorSet sl2 = sl2_elementary_generators();
    Quotient a = enumerate_quotient(sl2, Modulus::parse("5"));
    Quotient b = enumerate_quotient(sl2, Modulus::parse("5"));
    REQUIRE(a.order() == b.order());
    for (std::uint32_t i = 0; i < a.order(); ++i) CHECK(a.element(i) == b.element(i));
    CHECK(a.element(0).is_identity());
}

TEST_CASE("gen_action tables are permutations and closure holds") {
    Quotient G = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("5"));
    for (size_t s = 0; s < G.generator_count(); ++s) {
        std::vector<bool> hit(G.order(), false);
        for (std::uint32_t x = 0; x < G.order(); ++x) {
            std::uint32_t y = G.act(s, x);
            REQUIRE(y < G.order());
            CHECK_FALSE(hit[y]);
            hit[y] = true;
        }
    }
}

TEST_CASE("cayley graph shapes") {
    // 5-cycle
    Quotient c5 = enumerate_quotient(single_unipotent(), Modulus::parse("5"));
    CayleyGraph g5 = cayley_graph(c5);
    CHECK(g5.vertices == 5);
    CHECK(g5.edges.size() == 5);  // |V| k / 2 with k = 2

    // SL2 mod 3 with 4 generators: 24 vertices, 48 undirected edges
    Quotient sl2 = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3"));
    CayleyGraph g24 = cayley_graph(sl2);
    CHECK(g24.vertices == 24);
    CHECK(g24.edges.size() == 48);

    // trivial quotient: one vertex, |Omega| self-loops
    GeneratorSet ident({RationalMatrix::identity(2, 1)});
    Quotient triv = enumerate_quotient(ident, Modulus::parse("5"));
    CayleyGraph gt = cayley_graph(triv);
    CHECK(gt.vertices == 1);
    CHECK(gt.edges.size() == ident.size());
    for (const auto& e : gt.edges) CHECK(e[0] == e[1]);
}

TEST_CASE("congruence filter levels") {
    Quotient G = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3^2"));
    CHECK(G.order() == 648);

    KernelFilter whole = congruence_filter(G, 0);
    CHECK(whole.positions.size() == 648);

    KernelFilter ident = congruence_filter(G, 2);
    REQUIRE(ident.positions.size() == 1);
    CHECK(ident.positions[0] == 0);

    KernelFilter level1 = congruence_filter(G, 1);
    CHECK(level1.positions.size() == 27);

    CHECK_THROWS_WITH_AS(congruence_filter(G, 3), "level exceeds modulus", std::invalid_argument);

    // normality: conjugation by every generator preserves the kernel
    std::vector<bool> in_kernel(G.order(), false);
    for (auto p : level1.positions) in_kernel[p] = true;
    for (size_t s = 0; s < G.generator_count(); ++s) {
        std::uint32_t gpos = G.act(s, 0);
        for (auto p : level1.positions) CHECK(in_kernel[G.mul(G.mul(G.inverse_pos(gpos), p), gpos)]);
    }
}

TEST_CASE("lagrange counts for SL2 mod 25") {
    Quotient G = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("5^2"));
    CHECK(G.order() == 15000);
    KernelFilter k1 = congruence_filter(G, 1);
    CHECK(G.order() % k1.positions.size() == 0);
    CHECK(k1.positions.size() == 125);  // p^3 = dim sl_2
}

TEST_CASE("finite_log examples") {
    Modulus q25 = Modulus::parse("5^2");
    ResidueMatrix g(2, {1, 5, 0, 1}, q25);
    ResidueMatrix lg = finite_log(g, 5, 1);
    CHECK(lg.at(0, 1) == 1);
    CHECK(lg.at(0, 0) == 0);

    Modulus q9 = Modulus::parse("3^2");
    ResidueMatrix ident = ResidueMatrix::identity(2, q9);
    CHECK(finite_log(ident, 3, 1).is_identity() == false);  // zero matrix, not identity
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(finite_log(ident, 3, 1).at(i, j) == 0);

    // additivity: finite_log(gh) = finite_log(g) + finite_log(h) mod p
    ResidueMatrix a(2, {1, 3, 0, 1}, q9), b(2, {1, 0, 3, 1}, q9);
    ResidueMatrix log_ab = finite_log(a.multiply(b), 3, 1);
    CHECK(log_ab.at(0, 1) == 1);
    CHECK(log_ab.at(1, 0) == 1);
    CHECK(log_ab.at(0, 0) == 0);
    CHECK(log_ab.at(1, 1) == 0);

    ResidueMatrix off(2, {1, 1, 0, 1}, q9);
    CHECK_THROWS_WITH_AS(finite_log(off, 3, 1), "not in congruence kernel", std::domain_error);
}

TEST_CASE("finite_log additivity on random kernel elements") {
    Quotient G = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3^2"));
    KernelFilter k = congruence_filter(G, 1);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::uint32_t ga = k.positions[rng() % k.positions.size()];
        std::uint32_t gb = k.positions[rng() % k.positions.size()];
        ResidueMatrix la = finite_log(G.element(ga), 3, 1);
        ResidueMatrix lb = finite_log(G.element(gb), 3, 1);
        ResidueMatrix lab = finite_log(G.element(G.mul(ga, gb)), 3, 1);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(lab.at(i, j) == (la.at(i, j) + lb.at(i, j)) % 3);
    }
}

TEST_CASE("abelianization orders") {
    CHECK(abelianization_order(enumerate_quotient(sl2_elementary_generators(), Modulus::parse("5"))) == 1);
    CHECK(abelianization_order(enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3"))) == 3);
    CHECK(abelianization_order(enumerate_quotient(single_unipotent(), Modulus::parse("7"))) == 7);
}

TEST_CASE("unipotent power images") {
    // 2x2 unitriangular mod 9 is Z/9; cube image and kernel are {0,3,6}
    Quotient z9 = enumerate_quotient(unitriangular_generators(2), Modulus::parse("3^2"));
    REQUIRE(z9.order() == 9);
    UnipotentPowerImages im = unipotent_power_images(z9, 1);
    CHECK(im.powers == im.kernel);
    CHECK(im.powers.size() == 3);
    for (auto pos : im.powers) CHECK(z9.element(pos).at(0, 1) % 3 == 0);

    // m = 0: both sets are the whole group
    UnipotentPowerImages all = unipotent_power_images(z9, 0);
    CHECK(all.powers.size() == 9);
    CHECK(all.kernel.size() == 9);

    // 3x3 unitriangular mod 25: both sets have 125 elements and coincide
    Quotient u3 = enumerate_quotient(unitriangular_generators(3), Modulus::parse("5^2"));
    REQUIRE(u3.order() == 15625);
    UnipotentPowerImages im3 = unipotent_power_images(u3, 1);
    CHECK(im3.powers.size() == 125);
    CHECK(im3.powers == im3.kernel);
}

TEST_CASE("frattini generation at truncation p^3") {
    // any subset of G[p] whose finite_log image spans sl_2(f_p) generates the
    // whole truncated kernel by closure
    Quotient G = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3^3"));
    REQUIRE(G.order() == 17496);
    KernelFilter kp = congruence_filter(G, 1);
    REQUIRE(kp.positions.size() == 729);

    // finite_log is a bijection G[p]/G[p^2] -> its image (27 values)
    std::set<std::vector<int>> log_values;
    std::set<std::vector<std::uint64_t>> cosets;
    for (auto pos : kp.positions) {
        ResidueMatrix lg = finite_log(G.element(pos), 3, 1);
        std::vector<int> key;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) key.push_back(static_cast<int>(lg.at(i, j).get_si()));
        log_values.insert(key);
        std::vector<std::uint64_t> coset;
        const std::uint64_t* raw = G.raw(pos);
        for (int t = 0; t < 4; ++t) coset.push_back(raw[t] % 9);
        cosets.insert(coset);
    }
    CHECK(log_values.size() == 27);
    CHECK(cosets.size() == 27);

    std::mt19937_64 rng(17);
    int generating_trials = 0;
    for (int trial = 0; trial < 10; ++trial) {
        // sample positions until the log image spans (f_3)^3 additively
        std::vector<std::uint32_t> subset;
        std::set<std::vector<int>> image;
        std::vector<bool> closure;
        for (int draws = 0; draws < 40; ++draws) {
            subset.push_back(kp.positions[rng() % kp.positions.size()]);
            closure = subgroup_closure(G, subset);
            if (popcount(closure) == kp.positions.size()) break;
        }
        if (popcount(closure) == kp.positions.size()) ++generating_trials;
        // once closure is the full kernel, the images must span; the converse
        // (span implies generation) is the Frattini property checked in the
        // acceptance suite
        CHECK(popcount(closure) <= kp.positions.size());
    }
    CHECK(generating_trials == 10);
}

TEST_CASE("commutator BFS oracle agrees on small groups") {
    Quotient sl2_3 = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3"));
    std::vector<bool> w = commutator_set(sl2_3);
    std::vector<std::uint32_t> w_pos;
    for (std::uint32_t i = 0; i < sl2_3.order(); ++i)
        if (w[i]) w_pos.push_back(i);
    std::vector<bool> derived = subgroup_closure(sl2_3, w_pos);
    CHECK(popcount(derived) == 8);  // quaternion subgroup of SL2(F_3)
}
