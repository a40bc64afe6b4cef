#include "superapprox/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace superapprox {

void apply_walk(const Quotient& g, const std::vector<double>& v, std::vector<double>& out) {
    const std::int64_t n = g.order();
    const size_t k = g.generator_count();
    out.resize(v.size());
    const double inv_k = 1.0 / static_cast<double>(k);
#pragma omp parallel for schedule(static)
    for (std::int64_t y = 0; y < n; ++y) {
        double acc = 0.0;
        for (size_t s = 0; s < k; ++s) acc += v[g.gen_action(s)[static_cast<size_t>(y)]];
        out[static_cast<size_t>(y)] = acc * inv_k;
    }
}

void apply_walk_serial(const Quotient& g, const std::vector<double>& v, std::vector<double>& out) {
    const std::uint32_t n = g.order();
    const size_t k = g.generator_count();
    out.assign(v.size(), 0.0);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::uint32_t x = 0; x < n; ++x) {
        double m = v[x] * inv_k;
        if (m == 0.0) continue;
        for (size_t s = 0; s < k; ++s) out[g.act(s, x)] += m;
    }
}

std::vector<double> walk_distribution(const Quotient& g, unsigned length) {
    std::vector<double> v(g.order(), 0.0);
    v[0] = 1.0;
    std::vector<double> w(g.order());
    for (unsigned t = 0; t < length; ++t) {
        apply_walk_serial(g, v, w);
        v.swap(w);
    }
    return v;
}

namespace {

// integer symmetry check of the operator: #(j -> i) edges == #(i -> j)
void assert_walk_symmetric(const Quotient& g) {
    std::unordered_map<std::uint64_t, int> count;
    const size_t k = g.generator_count();
    for (std::uint32_t j = 0; j < g.order(); ++j)
        for (size_t s = 0; s < k; ++s) {
            std::uint32_t i = g.act(s, j);
            if (i == j) continue;
            count[(static_cast<std::uint64_t>(std::min(i, j)) << 32) | std::max(i, j)] += (i > j) ? 1 : -1;
        }
    for (const auto& [key, c] : count)
        if (c != 0) throw std::logic_error("walk operator is not symmetric; generator multiset asymmetry");
}

double subtract_mean(std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double& x : v) x -= mean;
    return mean;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

SpectralResult dense_gap(const Quotient& g) {
    const std::uint32_t n = g.order();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    const size_t k = g.generator_count();
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::uint32_t j = 0; j < n; ++j)
        for (size_t s = 0; s < k; ++s) m(g.act(s, j), j) += inv_k;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();  // ascending
    SpectralResult r;
    r.method = SpectralResult::Method::dense;
    if (n == 1) {
        r.lambda = 0.0;  // trivial group: empty nontrivial spectrum
        return r;
    }
    // the top eigenvalue is 1 (constant function); it must be simple for a
    // generated quotient (connected Cayley graph)
    if (ev(n - 1) < 1.0 - 1e-8) throw std::logic_error("principal eigenvalue missing");
    if (ev(n - 2) > 1.0 - 1e-12 && n > 1) throw std::logic_error("eigenvalue 1 has multiplicity > 1 (disconnected)");
    r.lambda = std::max(std::abs(ev(0)), std::abs(ev(n - 2)));
    return r;
}

SpectralResult power_gap(const Quotient& g, double tol, std::uint64_t max_iter, std::uint64_t seed) {
    const std::uint32_t n = g.order();
    SpectralResult r;
    r.method = SpectralResult::Method::power_iteration;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = unif(rng);
    subtract_mean(v);
    double norm = std::sqrt(dot(v, v));
    for (double& x : v) x /= norm;

    // iterate T^2 on the mean-zero subspace; bipartite (-1) components are
    // captured because eigenvalues enter squared
    std::vector<double> w(n), w2(n);
    double rho = 0.0;
    double residual = 0.0;
    std::uint64_t it = 0;
    for (; it < max_iter; ++it) {
        apply_walk(g, v, w);
        apply_walk(g, w, w2);
        subtract_mean(w2);  // deflate the constant direction every step
        rho = dot(v, w2);   // Rayleigh quotient for T^2
        double rr = 0.0;
        for (std::uint32_t i = 0; i < n; ++i) {
            double d = w2[i] - rho * v[i];
            rr += d * d;
        }
        residual = std::sqrt(rr);
        double nn = std::sqrt(dot(w2, w2));
        if (nn == 0.0) {
            rho = 0.0;
            residual = 0.0;
            ++it;
            break;
        }
        for (std::uint32_t i = 0; i < n; ++i) v[i] = w2[i] / nn;
        if (residual <= tol) {
            ++it;
            break;
        }
    }
    if (rho < 0.0) {
        if (rho < -1e-9) throw std::logic_error("negative Rayleigh quotient for T^2");
        rho = 0.0;
    }
    r.lambda = std::sqrt(rho);
    r.iterations = it;
    r.residual = residual;
    r.converged = residual <= tol;
    return r;
}

}  // namespace

SpectralResult spectral_gap(const Quotient& g, double tol, std::uint64_t max_iter, std::uint64_t seed) {
    return spectral_gap_method(
        g, g.order() <= kDenseThreshold ? SpectralResult::Method::dense : SpectralResult::Method::power_iteration, tol,
        max_iter, seed);
}

SpectralResult spectral_gap_method(const Quotient& g, SpectralResult::Method method, double tol,
                                   std::uint64_t max_iter, std::uint64_t seed) {
    assert_walk_symmetric(g);
    if (g.order() == 1) {
        SpectralResult r;
        r.lambda = 0.0;
        r.method = method;
        return r;
    }
    if (method == SpectralResult::Method::dense) return dense_gap(g);
    return power_gap(g, tol, max_iter, seed);
}

std::vector<SurveyRow> expander_survey(const GeneratorSet& gens, const std::vector<Modulus>& moduli,
                                       const SurveyOptions& opts) {
    std::vector<SurveyRow> rows(moduli.size());
    int jobs = std::max(1, opts.jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs) if (jobs > 1)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(moduli.size()); ++i) {
        SurveyRow& row = rows[static_cast<size_t>(i)];
        row.modulus = moduli[static_cast<size_t>(i)].to_string();
        auto t0 = std::chrono::steady_clock::now();
        try {
            Quotient G = enumerate_quotient(gens, moduli[static_cast<size_t>(i)], opts.max_order);
            row.order = G.order();
            row.gap = spectral_gap(G, opts.tol, opts.max_iter, opts.seed);
        } catch (const QuotientTooLarge& e) {
            row.order = e.partial_count;
            row.error = "quotient too large";
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        if (opts.record_seconds) {
            auto t1 = std::chrono::steady_clock::now();
            row.seconds = std::chrono::duration<double>(t1 - t0).count();
        }
    }
    return rows;
}

EquidistributionCheck equidistribution_check(const Quotient& g, const std::vector<double>& f, unsigned length,
                                             double lambda) {
    const std::uint32_t n = g.order();
    if (f.size() != n) throw std::invalid_argument("function size must match quotient order");

    double mean = 0.0;
    for (double x : f) mean += x;
    mean /= static_cast<double>(n);

    std::vector<double> dist = walk_distribution(g, length);
    double lhs = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) lhs += dist[i] * f[i];
    lhs = std::abs(lhs - mean);

    double norm2 = 0.0;
    for (double x : f) norm2 += (x - mean) * (x - mean);
    norm2 = std::sqrt(norm2 / static_cast<double>(n));  // probability-normalized L2

    // orbit of f under right translation of the argument: distinct vectors
    // x -> f(x * h) over h in G
    std::uint64_t orbit = 0;
    {
        struct VecHash {
            size_t operator()(const std::vector<double>& v) const {
                size_t h = 1469598103934665603ull;
                for (double d : v) {
                    std::uint64_t bits;
                    static_assert(sizeof(double) == 8);
                    std::memcpy(&bits, &d, 8);
                    h = (h ^ bits) * 1099511628211ull;
                }
                return h;
            }
        };
        std::unordered_map<std::vector<double>, int, VecHash> seen;
        std::vector<double> translate(n);
        for (std::uint32_t h = 0; h < n; ++h) {
            for (std::uint32_t x = 0; x < n; ++x) translate[x] = f[g.mul(x, h)];
            seen.emplace(translate, 0);
        }
        orbit = seen.size();
    }

    EquidistributionCheck out;
    out.lhs = lhs;
    out.rhs = norm2 * std::sqrt(static_cast<double>(orbit)) * std::pow(lambda, static_cast<double>(length));
    out.orbit_size = orbit;
    out.pass = lhs <= out.rhs + 1e-9;
    return out;
}

}  // namespace superapprox
