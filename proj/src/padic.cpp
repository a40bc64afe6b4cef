#include "superapprox/padic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace superapprox {

namespace {

Int pow_int(const Int& base, unsigned long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

Int mod_reduce(const Int& x, const Int& modulus) {
    Int r;
    mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), modulus.get_mpz_t());
    return r;
}

Int invert(const Int& a, const Int& modulus) {
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t()) == 0)
        throw std::domain_error("element not invertible at this precision");
    return r;
}

// valuation of a residue mod p^M; returns M when the residue is zero
int residue_valuation(const Int& r, const Int& p, int precision) {
    if (r == 0) return precision;
    Int a = r;
    int v = 0;
    while (v < precision && a % p == 0) {
        a /= p;
        ++v;
    }
    return v;
}

Int det_int(const std::vector<Int>& m, std::vector<int> rows, std::vector<int> cols, int stride) {
    const size_t n = rows.size();
    if (n == 1) return m[static_cast<size_t>(rows[0]) * stride + cols[0]];
    Int det = 0;
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    for (size_t j = 0; j < n; ++j) {
        const Int& a = m[static_cast<size_t>(rows[0]) * stride + cols[j]];
        if (a == 0) continue;
        std::vector<int> sub_cols;
        for (size_t t = 0; t < n; ++t)
            if (t != j) sub_cols.push_back(cols[t]);
        Int minor = det_int(m, sub_rows, sub_cols, stride);
        if (j % 2 == 0)
            det += a * minor;
        else
            det -= a * minor;
    }
    return det;
}

// adjugate of a square matrix given as a flat row-major block
std::vector<Int> adjugate_int(const std::vector<Int>& m, int d) {
    std::vector<Int> adj(static_cast<size_t>(d) * d);
    if (d == 1) {
        adj[0] = 1;
        return adj;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::vector<int> rows, cols;
            for (int t = 0; t < d; ++t) {
                if (t != j) rows.push_back(t);
                if (t != i) cols.push_back(t);
            }
            Int c = det_int(m, rows, cols, d);
            if ((i + j) % 2 == 1) c = -c;
            adj[static_cast<size_t>(i) * d + j] = c;
        }
    return adj;
}

void combinations(int m, int d, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        visit(idx);
        int t = d - 1;
        while (t >= 0 && idx[t] == m - d + t) --t;
        if (t < 0) break;
        ++idx[t];
        for (int u = t + 1; u < d; ++u) idx[u] = idx[u - 1] + 1;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

AnalyticMap::AnalyticMap(Int p, int n0, int d0) : p_(std::move(p)), n0_(n0), d0_(d0) {
    if (n0_ < 1 || d0_ < 1) throw std::invalid_argument("map dimensions must be >= 1");
    if (p_ < 2) throw std::invalid_argument("p must be a prime >= 2");
}

void AnalyticMap::add_term(const MultiIndex& exponents, std::vector<Int> coefficient_row) {
    if (exponents.size() != static_cast<size_t>(n0_)) throw std::invalid_argument("multi-index arity mismatch");
    if (coefficient_row.size() != static_cast<size_t>(d0_)) throw std::invalid_argument("coefficient row arity mismatch");
    unsigned total = 0;
    for (unsigned e : exponents) total += e;
    degree_bound_ = std::max(degree_bound_, total);
    auto [it, fresh] = terms_.emplace(exponents, std::move(coefficient_row));
    if (!fresh) throw std::invalid_argument("duplicate multi-index");
}

std::vector<Int> AnalyticMap::evaluate_exact(const std::vector<Int>& x) const {
    if (x.size() != static_cast<size_t>(n0_)) throw std::invalid_argument("evaluation arity mismatch");
    std::vector<Int> out(d0_, 0);
    for (const auto& [idx, row] : terms_) {
        Int mono = 1;
        for (int k = 0; k < n0_; ++k)
            if (idx[k] > 0) mono *= pow_int(x[k], idx[k]);
        for (int j = 0; j < d0_; ++j) out[j] += row[j] * mono;
    }
    return out;
}

std::vector<Int> AnalyticMap::evaluate(const std::vector<Int>& x, int precision) const {
    Int modulus = pow_int(p_, precision);
    std::vector<Int> out = evaluate_exact(x);
    for (auto& v : out) v = mod_reduce(v, modulus);
    return out;
}

std::vector<Int> AnalyticMap::jacobian(const std::vector<Int>& x, int precision) const {
    if (x.size() != static_cast<size_t>(n0_)) throw std::invalid_argument("evaluation arity mismatch");
    Int modulus = pow_int(p_, precision);
    std::vector<Int> jac(static_cast<size_t>(d0_) * n0_, 0);
    for (const auto& [idx, row] : terms_)
        for (int k = 0; k < n0_; ++k) {
            if (idx[k] == 0) continue;
            Int mono = idx[k];
            for (int t = 0; t < n0_; ++t) {
                unsigned e = (t == k) ? idx[t] - 1 : idx[t];
                if (e > 0) mono *= pow_int(x[t], e);
            }
            for (int j = 0; j < d0_; ++j) jac[static_cast<size_t>(j) * n0_ + k] += row[j] * mono;
        }
    for (auto& v : jac) v = mod_reduce(v, modulus);
    return jac;
}

bool AnalyticMap::constant_in_span() const {
    // solvability of sum_j a_j f_j = 1 over Q: Gaussian elimination on the
    // (terms x d0) coefficient matrix against the constant-term indicator
    std::vector<std::vector<mpq_class>> rows;
    std::vector<mpq_class> rhs;
    bool has_constant_row = false;
    for (const auto& [idx, row] : terms_) {
        bool constant = std::all_of(idx.begin(), idx.end(), [](unsigned e) { return e == 0; });
        std::vector<mpq_class> r(d0_);
        for (int j = 0; j < d0_; ++j) r[j] = row[j];
        rows.push_back(std::move(r));
        rhs.emplace_back(constant ? 1 : 0);
        has_constant_row = has_constant_row || constant;
    }
    if (!has_constant_row) {
        rows.emplace_back(d0_, mpq_class(0));
        rhs.emplace_back(1);
    }

    size_t pivot_row = 0;
    for (int col = 0; col < d0_ && pivot_row < rows.size(); ++col) {
        size_t sel = pivot_row;
        while (sel < rows.size() && rows[sel][col] == 0) ++sel;
        if (sel == rows.size()) continue;
        std::swap(rows[sel], rows[pivot_row]);
        std::swap(rhs[sel], rhs[pivot_row]);
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r == pivot_row || rows[r][col] == 0) continue;
            mpq_class factor = rows[r][col] / rows[pivot_row][col];
            for (int c = col; c < d0_; ++c) rows[r][c] -= factor * rows[pivot_row][c];
            rhs[r] -= factor * rhs[pivot_row];
        }
        ++pivot_row;
    }
    for (size_t r = 0; r < rows.size(); ++r) {
        bool zero_row = std::all_of(rows[r].begin(), rows[r].end(), [](const mpq_class& x) { return x == 0; });
        if (zero_row && rhs[r] != 0) return false;  // inconsistent: 1 unreachable
    }
    return true;
}

std::vector<Int> AnalyticMap::univariate_coefficients(int component) const {
    if (n0_ != 1) throw std::invalid_argument("univariate coefficients need a one-variable map");
    if (component < 0 || component >= d0_) throw std::invalid_argument("component out of range");
    std::vector<Int> coeffs(degree_bound_ + 1, 0);
    for (const auto& [idx, row] : terms_) coeffs[idx[0]] = row[component];
    return coeffs;
}

// ---------------------------------------------------------------------------

Int divided_difference_extended(const std::vector<Int>& coeffs, int order, const std::vector<Int>& points,
                                const Int& modulus) {
    if (points.size() != static_cast<size_t>(order) + 1) throw std::invalid_argument("need order+1 points");
    // divided difference of x^j over the points is the complete homogeneous
    // symmetric polynomial h_{j-order}; extend by linearity
    const int max_h = static_cast<int>(coeffs.size()) - 1 - order;
    if (max_h < 0) return 0;
    // h[d] over a growing point set
    std::vector<Int> h(max_h + 1, 0);
    h[0] = 1;
    for (const Int& x : points)
        for (int d = 1; d <= max_h; ++d) h[d] = mod_reduce(h[d] + x * h[d - 1], modulus);
    Int acc = 0;
    for (size_t j = order; j < coeffs.size(); ++j) acc += coeffs[j] * h[j - order];
    return mod_reduce(acc, modulus);
}

TruncatedScalar divided_difference(const AnalyticMap& f, int component, int order, const std::vector<Int>& points,
                                   int precision) {
    if (order < 0) throw std::invalid_argument("order must be >= 0");
    if (points.size() != static_cast<size_t>(order) + 1) throw std::invalid_argument("need order+1 points");
    const Int& p = f.p();
    Int modulus = pow_int(p, precision);
    std::vector<Int> pts;
    pts.reserve(points.size());
    for (const auto& x : points) pts.push_back(mod_reduce(x, modulus));

    std::vector<Int> coeffs = f.univariate_coefficients(component);

    bool distinct = true;
    for (size_t i = 0; i < pts.size() && distinct; ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            if (pts[i] == pts[j]) {
                distinct = false;
                break;
            }
    if (!distinct) {
        // continuous extension, exact in the coefficients
        return TruncatedScalar{divided_difference_extended(coeffs, order, pts, modulus), precision};
    }

    struct Entry {
        Int value;
        int prec;
    };
    std::vector<Entry> table;
    table.reserve(pts.size());
    for (const auto& x : pts) table.push_back({f.evaluate({x}, precision)[static_cast<size_t>(component)], precision});

    for (int r = 1; r <= order; ++r)
        for (size_t i = 0; i + r < pts.size(); ++i) {
            Int num = table[i].value - table[i + 1].value;
            Int den = pts[i] - pts[i + static_cast<size_t>(r)];
            den = mod_reduce(den, modulus);
            int v = residue_valuation(den, p, precision);
            int prec = std::min(table[i].prec, table[i + 1].prec) - v;
            if (prec <= 0) throw std::runtime_error("insufficient truncation");
            Int pv = pow_int(p, v);
            Int reduced = mod_reduce(num, pow_int(p, std::min(table[i].prec, table[i + 1].prec)));
            if (reduced % pv != 0) throw std::logic_error("divided difference division is not exact");
            Int unit = den / pv;
            Int scale = pow_int(p, prec);
            table[i].value = mod_reduce((reduced / pv) * invert(mod_reduce(unit, scale), scale), scale);
            table[i].prec = prec;
        }
    table.resize(1);
    return TruncatedScalar{table[0].value, table[0].prec};
}

// ---------------------------------------------------------------------------

MinorNorm max_minor_norm_exact(const std::vector<Int>& matrix, int rows, int cols, const Int& p) {
    if (rows > cols) throw std::invalid_argument("max-minor norm needs rows <= cols");
    std::vector<int> all_rows(rows);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    bool any = false;
    int best = 0;
    combinations(cols, rows, [&](const std::vector<int>& col_sel) {
        Int d = det_int(matrix, all_rows, col_sel, cols);
        if (d == 0) return;
        int v = 0;
        Int a = abs(d);
        while (a % p == 0) {
            a /= p;
            ++v;
        }
        if (!any || v < best) best = v;
        any = true;
    });
    if (!any) return MinorNorm{MinorNorm::Kind::zero, 0};
    return MinorNorm{MinorNorm::Kind::exact, best};
}

MinorNorm max_minor_norm(const std::vector<Int>& matrix, int rows, int cols, const Int& p, int precision) {
    if (rows > cols) throw std::invalid_argument("max-minor norm needs rows <= cols");
    Int modulus = pow_int(p, precision);
    std::vector<int> all_rows(rows);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    int best = precision;
    combinations(cols, rows, [&](const std::vector<int>& col_sel) {
        Int d = mod_reduce(det_int(matrix, all_rows, col_sel, cols), modulus);
        best = std::min(best, residue_valuation(d, p, precision));
    });
    if (best >= precision) return MinorNorm{MinorNorm::Kind::at_least, precision};
    return MinorNorm{MinorNorm::Kind::exact, best};
}

// ---------------------------------------------------------------------------

HenselResult hensel_solve(const AnalyticMap& f, const TruncatedPoint& x0, const std::vector<Int>& y, int l, int k0) {
    const int m = f.input_dim();
    const int d = f.output_dim();
    if (d > m) throw std::invalid_argument("hensel_solve needs output dimension <= input dimension");
    if (x0.coordinates.size() != static_cast<size_t>(m)) throw std::invalid_argument("x0 arity mismatch");
    if (y.size() != static_cast<size_t>(d)) throw std::invalid_argument("target arity mismatch");
    if (k0 < 0) throw std::invalid_argument("k0 must be >= 0");
    if (l < k0 + 1) throw std::invalid_argument("hensel_solve needs l >= k0 + 1");
    const Int& p = f.p();
    const int target_prec = x0.precision;

    // inputs are integers, so arithmetic can run above the target truncation;
    // the margin absorbs the valuation lost to the adjugate solve
    const int work = target_prec + k0 + 4;
    Int work_mod = pow_int(p, work);
    Int target_mod = pow_int(p, target_prec);

    std::vector<Int> x(m);
    for (int i = 0; i < m; ++i) x[i] = mod_reduce(x0.coordinates[i], work_mod);

    {
        MinorNorm n0 = max_minor_norm(f.jacobian(x, work), d, m, p, work);
        if (n0.kind != MinorNorm::Kind::exact || n0.valuation > k0)
            throw std::domain_error("Jacobian minor valuation exceeds k0");
    }

    Int shift = pow_int(p, static_cast<unsigned long>(l + k0));
    std::vector<Int> target = f.evaluate(x, work);
    for (int j = 0; j < d; ++j) target[j] = mod_reduce(target[j] + shift * y[j], work_mod);

    HenselResult result;
    std::vector<int> all_rows(d);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    int last_val = -1;
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<Int> fx = f.evaluate(x, work);
        std::vector<Int> r(d);
        int val = work;
        for (int j = 0; j < d; ++j) {
            r[j] = mod_reduce(target[j] - fx[j], work_mod);
            val = std::min(val, residue_valuation(r[j], p, work));
        }
        if (iter > 0) result.residual_valuations.push_back(std::min(val, target_prec));
        if (val >= target_prec) break;
        if (iter > 0 && val <= last_val) throw std::runtime_error("non-increasing residual; precision exhausted");
        last_val = val;

        // linear solve through the adjugate of the best d x d minor
        std::vector<Int> jac = f.jacobian(x, work);
        std::vector<int> best_cols;
        int best_val = work + 1;
        combinations(m, d, [&](const std::vector<int>& col_sel) {
            Int det = mod_reduce(det_int(jac, all_rows, col_sel, m), work_mod);
            int v = residue_valuation(det, p, work);
            if (v < best_val) {
                best_val = v;
                best_cols = col_sel;
            }
        });
        if (best_val > k0) throw std::runtime_error("Jacobian degenerated along the iteration");

        std::vector<Int> sub(static_cast<size_t>(d) * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) sub[static_cast<size_t>(i) * d + j] = jac[static_cast<size_t>(i) * m + best_cols[j]];
        Int det = mod_reduce(det_int(sub, all_rows, all_rows, d), work_mod);
        int w = residue_valuation(det, p, work);
        Int pw = pow_int(p, w);
        Int unit_inv = invert(det / pw, pow_int(p, work - w));

        std::vector<Int> adj = adjugate_int(sub, d);
        for (int i = 0; i < d; ++i) {
            Int z = 0;
            for (int j = 0; j < d; ++j) z += adj[static_cast<size_t>(i) * d + j] * r[j];
            z = mod_reduce(z, work_mod);
            if (z % pw != 0) throw std::logic_error("adjugate solve is not exact");
            Int xi = mod_reduce((z / pw) * unit_inv, pow_int(p, work - w));
            x[best_cols[i]] = mod_reduce(x[best_cols[i]] + xi, work_mod);
        }
    }

    result.x.p = p;
    result.x.precision = target_prec;
    result.x.coordinates.resize(m);
    for (int i = 0; i < m; ++i) result.x.coordinates[i] = mod_reduce(x[i], target_mod);
    result.achieved_precision = target_prec;

    // the lift stays in x0 + p^l O^m
    for (int i = 0; i < m; ++i) {
        Int diff = mod_reduce(result.x.coordinates[i] - x0.coordinates[i], target_mod);
        if (residue_valuation(diff, p, target_prec) < l) throw std::logic_error("hensel lift escaped x0 + p^l O");
    }
    return result;
}

// ---------------------------------------------------------------------------

AnalyticMap curve_reduce(const AnalyticMap& f, const std::vector<Int>& x0, unsigned s) {
    if (s < 2) throw std::invalid_argument("curve_reduce needs s >= 2");
    const int n0 = f.input_dim();
    const int d0 = f.output_dim();
    if (x0.size() != static_cast<size_t>(n0)) throw std::invalid_argument("x0 arity mismatch");
    const Int& p = f.p();

    // degree of t in variable k is s^{k-1}
    std::vector<unsigned long> tdeg(n0);
    unsigned long acc = 1;
    for (int k = 0; k < n0; ++k) {
        tdeg[k] = acc;
        if (k + 1 < n0) acc *= s;
    }

    std::map<unsigned long, std::vector<Int>> out;  // t-degree -> coefficient row
    for (const auto& [idx, row] : f.terms()) {
        // expand prod_k (x0_k + p t^{s^{k-1}})^{i_k}
        std::map<unsigned long, Int> factor{{0, Int(1)}};
        for (int k = 0; k < n0; ++k) {
            if (idx[k] == 0) continue;
            // binomial expansion of (x0_k + p T)^{i_k} with T = t^{tdeg[k]}
            std::vector<Int> binom(idx[k] + 1);
            Int c = 1;
            for (unsigned j = 0; j <= idx[k]; ++j) {
                binom[j] = c * pow_int(x0[k], idx[k] - j) * pow_int(p, j);
                c = c * (idx[k] - j) / (j + 1);
            }
            std::map<unsigned long, Int> next;
            for (const auto& [deg, coef] : factor)
                for (unsigned j = 0; j <= idx[k]; ++j) {
                    if (binom[j] == 0) continue;
                    next[deg + j * tdeg[k]] += coef * binom[j];
                }
            factor = std::move(next);
        }
        for (const auto& [deg, coef] : factor) {
            if (coef == 0) continue;
            auto& target = out[deg];
            if (target.empty()) target.assign(d0, Int(0));
            for (int j = 0; j < d0; ++j) target[j] += coef * row[j];
        }
    }

    AnalyticMap g(p, 1, d0);
    for (const auto& [deg, row] : out) {
        bool zero = std::all_of(row.begin(), row.end(), [](const Int& x) { return x == 0; });
        if (zero) continue;
        g.add_term({static_cast<unsigned>(deg)}, row);
    }
    return g;
}

// ---------------------------------------------------------------------------

namespace {

struct SumsetContext {
    Int p;
    int d0;
    int precision;
    std::uint64_t pm;     // p^M
    std::uint64_t cells;  // pm^d0

    std::uint64_t encode(const std::vector<std::uint64_t>& tuple) const {
        std::uint64_t code = 0;
        for (int j = d0 - 1; j >= 0; --j) code = code * pm + tuple[static_cast<size_t>(j)];
        return code;
    }
    void decode(std::uint64_t code, std::vector<std::uint64_t>& tuple) const {
        for (int j = 0; j < d0; ++j) {
            tuple[static_cast<size_t>(j)] = code % pm;
            code /= pm;
        }
    }
    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t code = 0, scale = 1;
        for (int j = 0; j < d0; ++j) {
            std::uint64_t s = (a % pm + b % pm) % pm;
            code += s * scale;
            scale *= pm;
            a /= pm;
            b /= pm;
        }
        return code;
    }
    std::uint64_t negate(std::uint64_t a) const {
        std::uint64_t code = 0, scale = 1;
        for (int j = 0; j < d0; ++j) {
            std::uint64_t c = a % pm;
            code += (c == 0 ? 0 : pm - c) * scale;
            scale *= pm;
            a /= pm;
        }
        return code;
    }
};

SumsetContext make_context(const AnalyticMap& f, int precision) {
    SumsetContext ctx;
    ctx.p = f.p();
    ctx.d0 = f.output_dim();
    ctx.precision = precision;
    Int pm = pow_int(ctx.p, precision);
    if (pm > 2187) throw std::invalid_argument("guard exceeded: p^M must stay <= 2187");
    ctx.pm = pm.get_ui();
    Int cells = pow_int(pm, static_cast<unsigned long>(ctx.d0));
    if (cells > 268435456) throw std::invalid_argument("guard exceeded: p^{M d0} cell count too large");
    ctx.cells = cells.get_ui();
    return ctx;
}

// value set F(p^l O^{n0}) mod p^M as sorted codes
std::vector<std::uint64_t> value_set(const AnalyticMap& f, const SumsetContext& ctx, int l) {
    const int n0 = f.input_dim();
    Int pl = pow_int(ctx.p, static_cast<unsigned long>(l));
    Int range_i = pow_int(ctx.p, static_cast<unsigned long>(std::max(0, ctx.precision - l)));
    if (!range_i.fits_ulong_p()) throw std::invalid_argument("guard exceeded: domain too large");
    std::uint64_t range = range_i.get_ui();
    double total = std::pow(static_cast<double>(range), n0);
    if (total > 2e7) throw std::invalid_argument("guard exceeded: domain enumeration too large");

    std::vector<std::uint64_t> codes;
    std::vector<std::uint64_t> odo(static_cast<size_t>(n0), 0);
    std::vector<Int> x(static_cast<size_t>(n0));
    std::vector<std::uint64_t> tuple(static_cast<size_t>(ctx.d0));
    while (true) {
        for (int k = 0; k < n0; ++k) x[static_cast<size_t>(k)] = pl * Int(static_cast<unsigned long>(odo[static_cast<size_t>(k)]));
        std::vector<Int> val = f.evaluate(x, ctx.precision);
        for (int j = 0; j < ctx.d0; ++j) tuple[static_cast<size_t>(j)] = val[static_cast<size_t>(j)].get_ui();
        codes.push_back(ctx.encode(tuple));
        int k = 0;
        while (k < n0 && ++odo[static_cast<size_t>(k)] == range) {
            odo[static_cast<size_t>(k)] = 0;
            ++k;
        }
        if (k == n0) break;
    }
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    return codes;
}

class Bitmap {
public:
    explicit Bitmap(std::uint64_t bits) : words_((bits + 63) / 64, 0), bits_(bits) {}
    void set(std::uint64_t i) { words_[i >> 6] |= (std::uint64_t(1) << (i & 63)); }
    bool get(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    std::uint64_t count() const {
        std::uint64_t c = 0;
        for (auto w : words_) c += static_cast<std::uint64_t>(__builtin_popcountll(w));
        return c;
    }
    template <typename F>
    void for_each(F&& fn) const {
        for (size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            while (word) {
                unsigned b = static_cast<unsigned>(__builtin_ctzll(word));
                fn(static_cast<std::uint64_t>(w) * 64 + b);
                word &= word - 1;
            }
        }
    }
    void merge(const Bitmap& other) {
        for (size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    }

private:
    std::vector<std::uint64_t> words_;
    std::uint64_t bits_;
};

// decoded tuples of the shift set; makes the hot add a few word ops
std::vector<std::uint64_t> decode_shifts(const SumsetContext& ctx, const std::vector<std::uint64_t>& shifts) {
    std::vector<std::uint64_t> flat(shifts.size() * static_cast<size_t>(ctx.d0));
    std::vector<std::uint64_t> tuple(static_cast<size_t>(ctx.d0));
    for (size_t i = 0; i < shifts.size(); ++i) {
        ctx.decode(shifts[i], tuple);
        for (int j = 0; j < ctx.d0; ++j) flat[i * ctx.d0 + static_cast<size_t>(j)] = tuple[static_cast<size_t>(j)];
    }
    return flat;
}

inline std::uint64_t add_decoded(const SumsetContext& ctx, const std::uint64_t* base_tuple,
                                 const std::uint64_t* shift_tuple) {
    std::uint64_t code = 0;
    for (int j = ctx.d0 - 1; j >= 0; --j) {
        std::uint64_t s = base_tuple[j] + shift_tuple[j];
        if (s >= ctx.pm) s -= ctx.pm;
        code = code * ctx.pm + s;
    }
    return code;
}

Bitmap sumset_step_bitmap(const SumsetContext& ctx, const Bitmap& base, const std::vector<std::uint64_t>& shifts) {
    std::vector<std::uint64_t> members;
    base.for_each([&](std::uint64_t c) { members.push_back(c); });
    std::vector<std::uint64_t> flat = decode_shifts(ctx, shifts);
    const size_t k = shifts.size();
    Bitmap out(ctx.cells);
#pragma omp parallel
    {
        Bitmap local(ctx.cells);
        std::vector<std::uint64_t> tuple(static_cast<size_t>(ctx.d0));
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(members.size()); ++i) {
            ctx.decode(members[static_cast<size_t>(i)], tuple);
            for (size_t s = 0; s < k; ++s) local.set(add_decoded(ctx, tuple.data(), flat.data() + s * ctx.d0));
        }
#pragma omp critical
        out.merge(local);
    }
    return out;
}

// same step on sorted unique code vectors, chunked to bound memory
std::vector<std::uint64_t> sumset_step_sorted(const SumsetContext& ctx, const std::vector<std::uint64_t>& base,
                                              const std::vector<std::uint64_t>& shifts) {
    std::vector<std::uint64_t> flat = decode_shifts(ctx, shifts);
    const size_t k = shifts.size();
    std::vector<std::uint64_t> acc;
    std::vector<std::uint64_t> buffer;
    const size_t flush_at = 1 << 22;
    auto flush = [&]() {
        if (buffer.empty()) return;
        std::sort(buffer.begin(), buffer.end());
        buffer.erase(std::unique(buffer.begin(), buffer.end()), buffer.end());
        std::vector<std::uint64_t> merged;
        merged.reserve(acc.size() + buffer.size());
        std::set_union(acc.begin(), acc.end(), buffer.begin(), buffer.end(), std::back_inserter(merged));
        acc = std::move(merged);
        buffer.clear();
    };
    std::vector<std::uint64_t> tuple(static_cast<size_t>(ctx.d0));
    for (std::uint64_t a : base) {
        ctx.decode(a, tuple);
        for (size_t s = 0; s < k; ++s) buffer.push_back(add_decoded(ctx, tuple.data(), flat.data() + s * ctx.d0));
        if (buffer.size() >= flush_at) flush();
    }
    flush();
    return acc;
}

// Hermite-style upper-triangular basis of the lattice spanned by the rows
// plus p^M Z^{d0}; membership is successive division by the pivots
struct LatticeBasis {
    int d0;
    std::vector<Int> rows;  // d0 x d0 upper triangular, row-major

    bool contains(std::vector<Int> z) const {
        for (int i = 0; i < d0; ++i) {
            const Int& pivot = rows[static_cast<size_t>(i) * d0 + i];
            if (z[static_cast<size_t>(i)] % pivot != 0) return false;
            Int mult = z[static_cast<size_t>(i)] / pivot;
            for (int j = i; j < d0; ++j) z[static_cast<size_t>(j)] -= mult * rows[static_cast<size_t>(i) * d0 + j];
        }
        return std::all_of(z.begin(), z.end(), [](const Int& v) { return v == 0; });
    }
};

LatticeBasis lattice_basis(const AnalyticMap& f, const Int& pm) {
    const int d0 = f.output_dim();
    std::vector<std::vector<Int>> rows;
    for (const auto& [idx, row] : f.terms()) rows.push_back(row);
    for (int j = 0; j < d0; ++j) {
        std::vector<Int> e(static_cast<size_t>(d0), 0);
        e[static_cast<size_t>(j)] = pm;
        rows.push_back(std::move(e));
    }
    // integer row echelon via repeated gcd combination
    LatticeBasis basis;
    basis.d0 = d0;
    basis.rows.assign(static_cast<size_t>(d0) * d0, 0);
    for (int col = 0; col < d0; ++col) {
        // reduce all rows with support starting at col to one pivot row
        while (true) {
            int nonzero = -1, second = -1;
            for (size_t r = 0; r < rows.size(); ++r) {
                bool lead = true;
                for (int c = 0; c < col; ++c)
                    if (rows[r][static_cast<size_t>(c)] != 0) lead = false;
                if (!lead || rows[r][static_cast<size_t>(col)] == 0) continue;
                if (nonzero < 0)
                    nonzero = static_cast<int>(r);
                else {
                    second = static_cast<int>(r);
                    break;
                }
            }
            if (nonzero < 0 || second < 0) {
                if (nonzero >= 0) {
                    auto& r = rows[static_cast<size_t>(nonzero)];
                    if (r[static_cast<size_t>(col)] < 0)
                        for (auto& v : r) v = -v;
                    for (int j = 0; j < d0; ++j) basis.rows[static_cast<size_t>(col) * d0 + j] = r[static_cast<size_t>(j)];
                    for (auto& v : r) v = 0;
                }
                break;
            }
            auto& a = rows[static_cast<size_t>(nonzero)];
            auto& b = rows[static_cast<size_t>(second)];
            if (abs(a[static_cast<size_t>(col)]) > abs(b[static_cast<size_t>(col)])) std::swap(a, b);
            Int q = b[static_cast<size_t>(col)] / a[static_cast<size_t>(col)];
            for (int j = 0; j < d0; ++j) b[static_cast<size_t>(j)] -= q * a[static_cast<size_t>(j)];
        }
        if (basis.rows[static_cast<size_t>(col) * d0 + col] == 0)
            throw std::logic_error("lattice basis degenerate despite p^M generators");
    }
    return basis;
}

template <typename Membership>
SumsetCoverage finish_coverage(const AnalyticMap& f, const SumsetContext& ctx, const Membership& in_d,
                               std::uint64_t d_size) {
    Int pm_int(static_cast<unsigned long>(ctx.pm));
    LatticeBasis basis = lattice_basis(f, pm_int);

    SumsetCoverage out;
    out.covered = false;
    out.e = -1;
    out.d_size = d_size;
    out.lattice_points_checked = 0;

    std::vector<std::uint64_t> tuple(static_cast<size_t>(ctx.d0));
    std::vector<Int> z(static_cast<size_t>(ctx.d0));
    for (int e = 0; e < ctx.precision; ++e) {
        Int pe = pow_int(ctx.p, static_cast<unsigned long>(e));
        Int range_i = pow_int(ctx.p, static_cast<unsigned long>(ctx.precision - e));
        std::uint64_t range = range_i.get_ui();
        std::uint64_t pe_u = pe.get_ui();
        bool ok = true;
        std::vector<std::uint64_t> odo(static_cast<size_t>(ctx.d0), 0);
        while (ok) {
            for (int j = 0; j < ctx.d0; ++j) {
                tuple[static_cast<size_t>(j)] = odo[static_cast<size_t>(j)] * pe_u;
                z[static_cast<size_t>(j)] = Int(static_cast<unsigned long>(tuple[static_cast<size_t>(j)]));
            }
            if (basis.contains(z)) {
                ++out.lattice_points_checked;
                if (!in_d(ctx.encode(tuple))) ok = false;
            }
            int k = 0;
            while (k < ctx.d0 && ++odo[static_cast<size_t>(k)] == range) {
                odo[static_cast<size_t>(k)] = 0;
                ++k;
            }
            if (k == ctx.d0) break;
        }
        if (ok) {
            out.covered = true;
            out.e = e;
            return out;
        }
    }
    return out;  // not covered at M
}

}  // namespace

SumsetCoverage sumset_coverage(const AnalyticMap& f, int l, int c, int precision) {
    if (c < 1 || c > 3) throw std::invalid_argument("guard exceeded: C must be in [1, 3]");
    if (l < 0 || l >= precision) throw std::invalid_argument("l must satisfy 0 <= l < M");
    if (f.constant_in_span()) throw std::domain_error("constant in span");
    SumsetContext ctx = make_context(f, precision);

    std::vector<std::uint64_t> v = value_set(f, ctx, l);
    std::vector<std::uint64_t> neg_v;
    neg_v.reserve(v.size());
    for (std::uint64_t x : v) neg_v.push_back(ctx.negate(x));
    std::sort(neg_v.begin(), neg_v.end());

    Bitmap cur(ctx.cells);
    for (std::uint64_t x : v) cur.set(x);
    for (int t = 1; t < c; ++t) cur = sumset_step_bitmap(ctx, cur, v);
    for (int t = 0; t < c; ++t) cur = sumset_step_bitmap(ctx, cur, neg_v);

    return finish_coverage(f, ctx, [&](std::uint64_t code) { return cur.get(code); }, cur.count());
}

SumsetCoverage sumset_coverage_sorted(const AnalyticMap& f, int l, int c, int precision) {
    if (c < 1 || c > 3) throw std::invalid_argument("guard exceeded: C must be in [1, 3]");
    if (l < 0 || l >= precision) throw std::invalid_argument("l must satisfy 0 <= l < M");
    if (f.constant_in_span()) throw std::domain_error("constant in span");
    SumsetContext ctx = make_context(f, precision);

    std::vector<std::uint64_t> v = value_set(f, ctx, l);
    std::vector<std::uint64_t> neg_v;
    neg_v.reserve(v.size());
    for (std::uint64_t x : v) neg_v.push_back(ctx.negate(x));
    std::sort(neg_v.begin(), neg_v.end());

    std::vector<std::uint64_t> cur = v;
    for (int t = 1; t < c; ++t) cur = sumset_step_sorted(ctx, cur, v);
    for (int t = 0; t < c; ++t) cur = sumset_step_sorted(ctx, cur, neg_v);

    return finish_coverage(
        f, ctx, [&](std::uint64_t code) { return std::binary_search(cur.begin(), cur.end(), code); },
        cur.size());
}

}  // namespace superapprox
