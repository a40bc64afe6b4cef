#pragma once

// Truncated p-adic analytic maps (polynomial, integer coefficients), divided
// differences, the max-minor norm N, quantitative Hensel lifting with the
// l_{i+1} = 2(l_i - k0) residual schedule, curve reduction t -> x0 + p(t,
// t^s, t^{s^2}, ...), and exhaustive sumset open-image coverage.
//
// Precision discipline: a scalar is a residue mod p^M together with M; any
// division by p^v drops M by v and errors once nothing is left.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace superapprox {

using Int = mpz_class;

struct TruncatedScalar {
    Int value;      // in [0, p^precision)
    int precision;  // M >= 1
};

struct TruncatedPoint {
    Int p;
    int precision;
    std::vector<Int> coordinates;  // each in [0, p^precision)
};

// polynomial map O^{n0} -> O^{d0} with integer coefficients
class AnalyticMap {
public:
    using MultiIndex = std::vector<unsigned>;

    AnalyticMap(Int p, int n0, int d0);

    void add_term(const MultiIndex& exponents, std::vector<Int> coefficient_row);

    const Int& p() const { return p_; }
    int input_dim() const { return n0_; }
    int output_dim() const { return d0_; }
    unsigned degree_bound() const { return degree_bound_; }
    const std::map<MultiIndex, std::vector<Int>>& terms() const { return terms_; }

    // exact evaluation mod p^M
    std::vector<Int> evaluate(const std::vector<Int>& x, int precision) const;
    // exact evaluation over Z (coefficients and points are integers)
    std::vector<Int> evaluate_exact(const std::vector<Int>& x) const;

    // d0 x n0 matrix of exact partial derivatives mod p^M, row-major
    std::vector<Int> jacobian(const std::vector<Int>& x, int precision) const;

    // true when the constant polynomial 1 lies in the Q-span of the
    // component polynomials
    bool constant_in_span() const;

    // univariate component as dense coefficients c_0..c_deg (requires n0 == 1)
    std::vector<Int> univariate_coefficients(int component) const;

private:
    Int p_;
    int n0_, d0_;
    unsigned degree_bound_ = 0;
    std::map<MultiIndex, std::vector<Int>> terms_;
};

// ---------------------------------------------------------------------------
// divided differences

// Phi^k f at k+1 points mod p^M.  Distinct points run the difference-quotient
// recursion with tracked precision loss; coincident points fall back to the
// continuous extension (complete homogeneous symmetric form), which is exact.
TruncatedScalar divided_difference(const AnalyticMap& f, int component, int order, const std::vector<Int>& points,
                                   int precision);

// the continuous extension Phi-bar (exact, any points)
Int divided_difference_extended(const std::vector<Int>& coeffs, int order, const std::vector<Int>& points,
                                const Int& modulus);

// ---------------------------------------------------------------------------
// max-minor norm

struct MinorNorm {
    enum class Kind { exact, at_least, zero } kind;
    int valuation;  // N(X) = |p^valuation|; for at_least: every minor has
                    // valuation >= this (working precision reached)

    bool is_zero() const { return kind == Kind::zero; }
};

// exact integer matrix: min p-valuation over all d x d minors, or zero when
// the matrix has rank < d
MinorNorm max_minor_norm_exact(const std::vector<Int>& matrix, int rows, int cols, const Int& p);
// residues mod p^M: "at_least M" when every minor vanishes at the truncation
MinorNorm max_minor_norm(const std::vector<Int>& matrix, int rows, int cols, const Int& p, int precision);

// ---------------------------------------------------------------------------
// Hensel

struct HenselResult {
    TruncatedPoint x;
    std::vector<int> residual_valuations;  // measured after each update
    int achieved_precision;                // F(x) == F(x0) + p^{l+k0} y mod p^this
};

// solve F(x) = F(x0) + p^{l+k0} y with x in x0 + p^l O^{n0}; requires
// N(dF(x0)) >= |p^{k0}| and l >= k0 + 1.  x0.precision should leave the
// default margin of 4 above l + k0.
HenselResult hensel_solve(const AnalyticMap& f, const TruncatedPoint& x0, const std::vector<Int>& y, int l, int k0);

// ---------------------------------------------------------------------------
// curve reduction and sumset coverage

// symbolic composition with r(t) = x0 + p (t, t^s, t^{s^2}, ..., t^{s^{n0-1}})
AnalyticMap curve_reduce(const AnalyticMap& f, const std::vector<Int>& x0, unsigned s);

struct SumsetCoverage {
    bool covered;
    int e;                     // least e with (span lattice cap p^e O^{d0}) mod p^M inside D
    std::uint64_t d_size;      // |D|
    std::uint64_t lattice_points_checked;
};

// D = { sum_{i<=C} F(x_i) - sum_{j<=C} F(y_j) mod p^M : x, y in p^l O^{n0} },
// assembled by iterated sumsets over the value set of F on p^l O^{n0}.
// Guard: p^M <= 2187 per coordinate and C <= 3.
SumsetCoverage sumset_coverage(const AnalyticMap& f, int l, int c, int precision);

// independent path over sorted difference vectors; must agree bit-for-bit
SumsetCoverage sumset_coverage_sorted(const AnalyticMap& f, int l, int c, int precision);

}  // namespace superapprox
