#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "superapprox/modring.hpp"

using namespace superapprox;

TEST_CASE("valuation by repeated trial division") {
    CHECK(valuation(18, 3) == 2);
    CHECK(valuation(1, 5) == 0);
    CHECK(valuation(-8, 2) == 3);
    CHECK_THROWS_WITH_AS(valuation(0, 7), "valuation of zero", std::domain_error);
}

TEST_CASE("valuation of p^a times a unit") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Int p(std::vector<unsigned long>{2, 3, 5, 7, 11, 13}[rng() % 6]);
        int a = static_cast<int>(rng() % 8);
        Int u(static_cast<unsigned long>(rng() % 1000 + 1));
        while (u % p == 0) u += 1;
        Int pa;
        mpz_pow_ui(pa.get_mpz_t(), p.get_mpz_t(), a);
        CHECK(valuation(pa * u, p) == a);
    }
}

TEST_CASE("modulus parsing") {
    Modulus q = Modulus::parse("3^2*5");
    CHECK(q.value() == 45);
    CHECK(q.factors().size() == 2);
    CHECK(q.factors()[0].prime == 3);
    CHECK(q.factors()[0].exponent == 2);

    CHECK(Modulus::parse("45").value() == 45);
    CHECK(Modulus::parse("101").factors().size() == 1);
    CHECK_THROWS(Modulus::parse("5^2*3"));  // primes must increase
    CHECK_THROWS(Modulus::parse("4^2"));    // not prime
}

TEST_CASE("reduce_matrix examples") {
    Modulus q3 = Modulus::parse("3");
    RationalMatrix ident = RationalMatrix::identity(2, 1);
    ResidueMatrix r = reduce_matrix(ident, q3);
    CHECK(r.is_identity());

    RationalMatrix u(2, {1, 1, 0, 1}, 1, 0);
    ResidueMatrix ru = reduce_matrix(u, q3);
    CHECK(ru.at(0, 1) == 1);
    CHECK(ru.at(1, 0) == 0);

    // [[1,0],[0,4]] / 2 mod 5 -> [[3,0],[0,2]]
    RationalMatrix m(2, {1, 0, 0, 4}, 2, 1);
    ResidueMatrix rm = reduce_matrix(m, Modulus::parse("5"));
    CHECK(rm.at(0, 0) == 3);
    CHECK(rm.at(1, 1) == 2);

    CHECK_THROWS_WITH_AS(reduce_matrix(m, Modulus::parse("2")), "modulus not coprime to q0", std::domain_error);
}

TEST_CASE("reduction is multiplicative") {
    std::mt19937_64 rng(11);
    Modulus q = Modulus::parse("3^2*7");
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Int> a(4), b(4);
        for (auto& x : a) x = Int(static_cast<long>(rng() % 41) - 20);
        for (auto& x : b) x = Int(static_cast<long>(rng() % 41) - 20);
        RationalMatrix ma(2, a, 1, 0), mb(2, b, 1, 0);
        ResidueMatrix lhs = reduce_matrix(ma.multiply(mb), q);
        ResidueMatrix rhs = reduce_matrix(ma, q).multiply(reduce_matrix(mb, q));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("rational matrix inverse over Z[1/q0]") {
    // SL2 elementary matrix over Z
    RationalMatrix u(2, {1, 1, 0, 1}, 1, 0);
    RationalMatrix inv = u.inverse();
    CHECK(inv.num(0, 1) == -1);
    CHECK(u.multiply(inv) == RationalMatrix::identity(2, 1));

    // denominator example: [[1,0],[0,4]]/2 over Z[1/2]
    RationalMatrix m(2, {1, 0, 0, 4}, 2, 1);
    RationalMatrix minv = m.inverse();
    CHECK(m.multiply(minv) == RationalMatrix::identity(2, 2));

    // det 3 is not a unit of Z
    RationalMatrix bad(2, {3, 0, 0, 1}, 1, 0);
    CHECK_THROWS_AS(bad.inverse(), std::domain_error);
}

TEST_CASE("crt split examples") {
    Modulus q = Modulus::parse("3^2*5");
    auto parts = crt_split(17, q);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == 8);
    CHECK(parts[1] == 2);

    auto zeros = crt_split(0, q);
    CHECK(zeros[0] == 0);
    CHECK(zeros[1] == 0);

    Modulus single = Modulus::parse("7^2");
    auto one = crt_split(13, single);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 13);
}

TEST_CASE("crt roundtrip on 10^4 random instances") {
    std::mt19937_64 rng(0xC0FFEE);
    const std::vector<std::string> moduli = {"3^2*5", "2*7^3", "11*13", "2^5*3^3*5^2", "101", "3*5*7*11*13"};
    for (int trial = 0; trial < 10000; ++trial) {
        Modulus q = Modulus::parse(moduli[rng() % moduli.size()]);
        Int x(static_cast<unsigned long>(rng()));
        x %= q.value();
        CHECK(crt_combine(crt_split(x, q), q) == x);
    }
}
