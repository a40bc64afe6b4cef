#pragma once

// Exact arithmetic over Z, Z[1/q0] and Z/qZ for moduli q = prod p_i^{n_i}.
// Residues are kept canonically in [0, q); equality is entry-wise integer
// equality so group elements can be hashed and deduplicated exactly.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace superapprox {

using Int = mpz_class;

// ---------------------------------------------------------------------------
// basic number theory helpers

// largest v with p^v | x; x = 0 signals "valuation of zero".
int valuation(const Int& x, const Int& p);

// inverse of a mod q; throws if gcd(a, q) != 1.
Int inverse_mod(const Int& a, const Int& q);

Int pow_mod(Int base, Int exp, const Int& q);

bool is_prime_small(std::uint64_t n);

// ---------------------------------------------------------------------------

class Modulus {
public:
    struct Factor {
        Int prime;
        unsigned exponent;
    };

    // factors must have strictly increasing primes, exponents >= 1
    explicit Modulus(std::vector<Factor> factors);

    // "p1^n1*p2^n2*..." or a plain integer (factored by trial division up
    // to 10^6; anything with a larger prime factor must use the explicit
    // form).
    static Modulus parse(const std::string& text);
    static Modulus from_value(const Int& value);

    const Int& value() const { return value_; }
    const std::vector<Factor>& factors() const { return factors_; }

    bool coprime_to(const Int& x) const;

    std::string to_string() const;

    bool operator==(const Modulus& other) const { return value_ == other.value_; }

private:
    std::vector<Factor> factors_;
    Int value_;
};

// ---------------------------------------------------------------------------

// Element of GL_{n0}(Z[1/q0]): integer matrix over a denominator q0^e.
class RationalMatrix {
public:
    RationalMatrix(int dim, std::vector<Int> numerators, const Int& q0, unsigned den_exponent);

    static RationalMatrix identity(int dim, const Int& q0);

    int dim() const { return dim_; }
    const Int& q0() const { return q0_; }
    unsigned den_exponent() const { return den_exponent_; }
    const Int& num(int i, int j) const { return num_[static_cast<size_t>(i) * dim_ + j]; }
    const std::vector<Int>& numerators() const { return num_; }

    RationalMatrix multiply(const RationalMatrix& other) const;

    // exact inverse over Q; throws unless det is a unit of Z[1/q0].
    RationalMatrix inverse() const;

    Int determinant_numerator() const;  // det of the numerator matrix

    bool operator==(const RationalMatrix& other) const;

private:
    void normalize();  // strip common q0 factors from (num, den_exponent)

    int dim_;
    std::vector<Int> num_;
    Int q0_;
    unsigned den_exponent_;
};

// ---------------------------------------------------------------------------

class ResidueMatrix {
public:
    ResidueMatrix(int dim, std::vector<Int> entries, Modulus modulus);

    static ResidueMatrix identity(int dim, const Modulus& q);

    int dim() const { return dim_; }
    const Modulus& modulus() const { return modulus_; }
    const Int& at(int i, int j) const { return entries_[static_cast<size_t>(i) * dim_ + j]; }
    const std::vector<Int>& entries() const { return entries_; }

    ResidueMatrix multiply(const ResidueMatrix& other) const;
    bool is_identity() const;
    bool operator==(const ResidueMatrix& other) const;

private:
    int dim_;
    std::vector<Int> entries_;
    Modulus modulus_;
};

// entry-wise numerator * denominator^{-1} mod q; the map is a ring
// homomorphism on products of reducible matrices.
// throws "modulus not coprime to q0" when the denominator is not a unit mod q.
ResidueMatrix reduce_matrix(const RationalMatrix& m, const Modulus& q);

// residue of x for each prime-power factor of q, and the inverse map.
std::vector<Int> crt_split(const Int& x, const Modulus& q);
Int crt_combine(const std::vector<Int>& residues, const Modulus& q);

}  // namespace superapprox
