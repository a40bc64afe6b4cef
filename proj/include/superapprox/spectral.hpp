#pragma once

// Random-walk distributions, the averaging operator T_mu of the walk on a
// finite quotient, and its spectral gap lambda = largest |eigenvalue| on the
// mean-zero subspace.
//
// The walk kernel exists twice: apply_walk_serial is the reference scatter
// implementation; apply_walk is the OpenMP gather form used by the power
// iteration.  Both compute the same operator because the generator multiset
// is symmetric; tests and the benchmark compare them.

#include <cstdint>
#include <string>
#include <vector>

#include "superapprox/groupgen.hpp"

namespace superapprox {

struct WalkSpec {
    size_t generator_count;  // |Omega| with multiplicity
    unsigned length;
};

struct SpectralResult {
    double lambda = 0.0;
    enum class Method { dense, power_iteration } method = Method::dense;
    std::uint64_t iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

inline const char* method_name(SpectralResult::Method m) {
    return m == SpectralResult::Method::dense ? "dense" : "power-iteration";
}

inline constexpr std::uint32_t kDenseThreshold = 4000;
inline constexpr double kDefaultTol = 1e-9;
inline constexpr std::uint64_t kDefaultMaxIter = 2'000'000;
inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

// out[y] = (1/k) sum_s v[y * s]; parallel gather
void apply_walk(const Quotient& g, const std::vector<double>& v, std::vector<double>& out);
// out[x * s] += v[x] / k; serial scatter reference
void apply_walk_serial(const Quotient& g, const std::vector<double>& v, std::vector<double>& out);

// distribution of the length-l word in uniform generators, started at the
// identity and pushed to the quotient
std::vector<double> walk_distribution(const Quotient& g, unsigned length);

SpectralResult spectral_gap(const Quotient& g, double tol = kDefaultTol,
                            std::uint64_t max_iter = kDefaultMaxIter, std::uint64_t seed = kDefaultSeed);

// force a particular path (the automatic switchover is at kDenseThreshold)
SpectralResult spectral_gap_method(const Quotient& g, SpectralResult::Method method, double tol = kDefaultTol,
                                   std::uint64_t max_iter = kDefaultMaxIter, std::uint64_t seed = kDefaultSeed);

struct SurveyRow {
    std::string modulus;
    std::uint64_t order = 0;
    SpectralResult gap;
    double seconds = 0.0;
    std::string error;  // nonempty when the row failed (e.g. quotient too large)
};

struct SurveyOptions {
    double tol = kDefaultTol;
    std::uint64_t max_iter = kDefaultMaxIter;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t max_order = kDefaultMaxOrder;
    int jobs = 1;
    bool record_seconds = true;
};

std::vector<SurveyRow> expander_survey(const GeneratorSet& gens, const std::vector<Modulus>& moduli,
                                       const SurveyOptions& opts = {});

struct EquidistributionCheck {
    double lhs;
    double rhs;
    bool pass;
    std::uint64_t orbit_size;
};

// |sum_x P^(l)(x) f(x) - mean f|  vs  ||f - mean f||_2 sqrt(orbit) lambda^l,
// with the L2 norm under the uniform probability measure and the orbit taken
// under right translation of the argument
EquidistributionCheck equidistribution_check(const Quotient& g, const std::vector<double>& f, unsigned length,
                                             double lambda);

}  // namespace superapprox
