#include "superapprox/approxsub.hpp"

#include <algorithm>
#include <cmath>

namespace superapprox {

SubsetView::SubsetView(const Quotient& g, std::vector<std::uint32_t> pos, bool check_symmetric)
    : quotient(&g), positions(std::move(pos)), symmetric(check_symmetric) {
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    for (std::uint32_t p : positions)
        if (p >= g.order()) throw std::invalid_argument("subset position out of range");
    if (check_symmetric) {
        for (std::uint32_t p : positions)
            if (!std::binary_search(positions.begin(), positions.end(), g.inverse_pos(p)))
                throw std::invalid_argument("subset is not symmetric");
    }
}

SubsetView product_set(const SubsetView& x, const SubsetView& y) {
    if (x.quotient != y.quotient) throw std::invalid_argument("mismatched quotients");
    const Quotient& g = *x.quotient;
    std::vector<bool> mark(g.order(), false);
    for (std::uint32_t a : x.positions)
        for (std::uint32_t b : y.positions) mark[g.mul(a, b)] = true;
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < g.order(); ++i)
        if (mark[i]) out.push_back(i);
    return SubsetView(g, std::move(out));
}

PredicateReport pq_predicate(const SubsetView& a, const Rational& delta, unsigned walk_length) {
    if (delta.num <= 0) throw std::invalid_argument("delta must be positive");
    const Quotient& g = *a.quotient;
    const double d = static_cast<double>(delta.num) / static_cast<double>(delta.den);
    const double q = g.modulus().value().get_d();

    PredicateReport r{};
    r.walk_length = walk_length;

    std::vector<double> dist = walk_distribution(g, walk_length);
    r.walk_mass = 0.0;
    for (std::uint32_t p : a.positions) r.walk_mass += dist[p];
    r.mass_threshold = std::pow(q, -d);
    r.mass_ok = r.walk_mass > r.mass_threshold;

    r.length_threshold = std::log(q) / d;
    r.length_ok = static_cast<double>(walk_length) > r.length_threshold;

    SubsetView aa = product_set(a, a);
    SubsetView aaa = product_set(aa, a);
    r.size_a = a.size();
    r.size_aaa = aaa.size();
    // |AAA| <= |A|^{1+delta}  <=>  |AAA|^den <= |A|^{den+num}, exact
    mpz_class lhs, rhs;
    mpz_ui_pow_ui(lhs.get_mpz_t(), r.size_aaa, static_cast<unsigned long>(delta.den));
    mpz_ui_pow_ui(rhs.get_mpz_t(), r.size_a, static_cast<unsigned long>(delta.den + delta.num));
    r.tripling_ok = lhs <= rhs;
    r.tripling_exponent =
        (a.size() > 1) ? std::log(static_cast<double>(r.size_aaa)) / std::log(static_cast<double>(r.size_a)) : 1.0;

    r.overall = r.mass_ok && r.length_ok && r.tripling_ok;
    return r;
}

bool bounded_gen_check(const SubsetView& a, unsigned c, unsigned level) {
    if (c < 1 || c > 64) throw std::invalid_argument("product count out of the [1, 64] guard");
    return bounded_gen_min_c(a, level, c) != 0;
}

unsigned bounded_gen_min_c(const SubsetView& a, unsigned level, unsigned c_max) {
    if (c_max < 1 || c_max > 64) throw std::invalid_argument("product count out of the [1, 64] guard");
    const Quotient& g = *a.quotient;
    KernelFilter kernel = congruence_filter(g, level);

    auto contains_kernel = [&](const std::vector<bool>& set) {
        for (std::uint32_t p : kernel.positions)
            if (!set[p]) return false;
        return true;
    };

    std::vector<bool> cur(g.order(), false);
    for (std::uint32_t p : a.positions) cur[p] = true;
    if (contains_kernel(cur)) return 1;

    for (unsigned c = 2; c <= c_max; ++c) {
        std::vector<bool> next(g.order(), false);
        for (std::uint32_t x = 0; x < g.order(); ++x) {
            if (!cur[x]) continue;
            for (std::uint32_t p : a.positions) next[g.mul(x, p)] = true;
        }
        cur.swap(next);
        if (contains_kernel(cur)) return c;
    }
    return 0;
}

CommutatorFill commutator_fill(const Quotient& g, std::uint64_t guard) {
    if (g.order() > guard) throw std::invalid_argument("quotient exceeds the commutator_fill size guard");

    CommutatorFill r{};
    std::vector<bool> w = commutator_set(g);
    std::vector<std::uint32_t> w_pos;
    for (std::uint32_t i = 0; i < g.order(); ++i)
        if (w[i]) w_pos.push_back(i);
    r.commutator_count = w_pos.size();

    std::vector<bool> derived = subgroup_closure(g, w_pos);
    r.derived_order = popcount(derived);
    r.abelian_order = g.order() / r.derived_order;

    // p-group test: |G| = p^n
    mpz_class order(static_cast<unsigned long>(g.order()));
    r.is_p_group = false;
    std::uint64_t pn_n = 0, pn_m = 0;
    for (std::uint64_t p = 2; p * p <= g.order() || p <= g.order(); ++p) {
        if (g.order() % p != 0) continue;
        std::uint64_t v = g.order();
        std::uint64_t n = 0;
        while (v % p == 0) {
            v /= p;
            ++n;
        }
        if (v == 1) {
            r.is_p_group = true;
            pn_n = n;
            std::uint64_t ab = r.abelian_order, m = 0;
            while (ab % p == 0) {
                ab /= p;
                ++m;
            }
            pn_m = m;
        }
        break;  // smallest prime factor settles it either way
    }

    if (r.derived_order == 1) {
        r.t_min = 0;
    } else {
        std::vector<bool> cur(g.order(), false);
        cur[0] = true;
        unsigned t = 0;
        while (true) {
            ++t;
            std::vector<bool> next(g.order(), false);
            for (std::uint32_t x = 0; x < g.order(); ++x) {
                if (!cur[x]) continue;
                for (std::uint32_t p : w_pos) next[g.mul(x, p)] = true;
            }
            cur.swap(next);
            std::uint64_t size = popcount(cur);
            if (size == r.derived_order) break;
            if (t > 64) throw std::logic_error("commutator fill failed to reach the derived subgroup");
        }
        r.t_min = t;
    }

    r.bound_ok = !r.is_p_group || (r.t_min <= pn_n - pn_m);
    return r;
}

}  // namespace superapprox
