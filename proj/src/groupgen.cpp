#include "superapprox/groupgen.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace superapprox {

namespace {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % q);
}

inline std::uint64_t submod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
    return a >= b ? a - b : a + q - b;
}

// cofactor-expansion determinant mod q; dimensions here are tiny
std::uint64_t det_mod(const std::uint64_t* m, const std::vector<int>& rows, const std::vector<int>& cols, int dim,
                      std::uint64_t q) {
    const size_t n = rows.size();
    if (n == 1) return m[static_cast<size_t>(rows[0]) * dim + cols[0]];
    std::uint64_t det = 0;
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    bool plus = true;
    for (size_t j = 0; j < n; ++j) {
        std::uint64_t a = m[static_cast<size_t>(rows[0]) * dim + cols[j]];
        std::vector<int> sub_cols;
        sub_cols.reserve(n - 1);
        for (size_t t = 0; t < n; ++t)
            if (t != j) sub_cols.push_back(cols[t]);
        std::uint64_t minor = det_mod(m, sub_rows, sub_cols, dim, q);
        std::uint64_t term = mulmod(a, minor, q);
        det = plus ? (det + term) % q : submod(det, term, q);
        plus = !plus;
    }
    return det;
}

std::uint64_t inverse_mod_u64(std::uint64_t a, std::uint64_t q) {
    Int r = inverse_mod(Int(static_cast<unsigned long>(a % q)), Int(static_cast<unsigned long>(q)));
    return r.get_ui();
}

// adjugate-based inverse of a raw matrix mod q
void invert_raw(const std::uint64_t* m, std::uint64_t* out, int dim, std::uint64_t q) {
    std::vector<int> all(dim);
    for (int i = 0; i < dim; ++i) all[i] = i;
    std::uint64_t det = det_mod(m, all, all, dim, q);
    std::uint64_t det_inv = inverse_mod_u64(det, q);
    if (dim == 1) {
        out[0] = det_inv;
        return;
    }
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            std::vector<int> rows, cols;
            for (int t = 0; t < dim; ++t) {
                if (t != j) rows.push_back(t);
                if (t != i) cols.push_back(t);
            }
            std::uint64_t c = det_mod(m, rows, cols, dim, q);
            if ((i + j) % 2 == 1) c = (q - c) % q;
            out[static_cast<size_t>(i) * dim + j] = mulmod(c, det_inv, q);
        }
}

}  // namespace

// ---------------------------------------------------------------------------

GeneratorSet::GeneratorSet(std::vector<RationalMatrix> generators) : generators_(std::move(generators)) {
    if (generators_.empty()) throw std::invalid_argument("generator set must be nonempty");
    const int d = generators_.front().dim();
    const Int& q0 = generators_.front().q0();
    for (const auto& g : generators_)
        if (g.dim() != d || g.q0() != q0) throw std::invalid_argument("generators disagree on dimension or q0");

    // make the multiset symmetric: for each generator with more copies than
    // its inverse has, adjoin the missing inverse copies
    const size_t original = generators_.size();
    auto count_of = [&](const RationalMatrix& m) {
        size_t c = 0;
        for (const auto& g : generators_)
            if (g == m) ++c;
        return c;
    };
    for (size_t i = 0; i < original; ++i) {
        RationalMatrix inv = generators_[i].inverse();  // throws unless invertible over Z[1/q0]
        size_t have = count_of(inv);
        size_t want = count_of(generators_[i]);
        for (size_t t = have; t < want; ++t) {
            generators_.push_back(inv);
            closure_applied_ = true;
        }
    }
}

// ---------------------------------------------------------------------------

ResidueMatrix Quotient::element(std::uint32_t pos) const {
    const std::uint64_t* e = raw(pos);
    std::vector<Int> entries(entry_count_);
    for (size_t t = 0; t < entry_count_; ++t) entries[t] = Int(static_cast<unsigned long>(e[t]));
    return ResidueMatrix(dim_, std::move(entries), modulus_);
}

void Quotient::mul_raw(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* out) const {
    const int d = dim_;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::uint64_t acc = 0;
            for (int k = 0; k < d; ++k) acc = (acc + mulmod(a[i * d + k], b[k * d + j], q_)) % q_;
            out[i * d + j] = acc;
        }
}

std::uint64_t Quotient::pack(const std::uint64_t* entries) const {
    std::uint64_t code = 0;
    for (size_t t = 0; t < entry_count_; ++t) code = (code << bits_per_entry_) | entries[t];
    return code;
}

std::uint32_t Quotient::lookup(const std::uint64_t* entries) const {
    if (packable_) {
        auto it = packed_index_.find(pack(entries));
        if (it == packed_index_.end()) throw std::logic_error("product left the enumerated closure");
        return it->second;
    }
    std::vector<std::uint64_t> key(entries, entries + entry_count_);
    auto it = wide_index_.find(key);
    if (it == wide_index_.end()) throw std::logic_error("product left the enumerated closure");
    return it->second;
}

std::optional<std::uint32_t> Quotient::find(const std::vector<std::uint64_t>& entries) const {
    if (entries.size() != entry_count_) return std::nullopt;
    if (packable_) {
        auto it = packed_index_.find(pack(entries.data()));
        if (it == packed_index_.end()) return std::nullopt;
        return it->second;
    }
    auto it = wide_index_.find(entries);
    if (it == wide_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> Quotient::find(const ResidueMatrix& m) const {
    if (!(m.modulus() == modulus_) || m.dim() != dim_) return std::nullopt;
    std::vector<std::uint64_t> entries(entry_count_);
    for (size_t t = 0; t < entry_count_; ++t) entries[t] = m.entries()[t].get_ui();
    return find(entries);
}

std::uint32_t Quotient::mul(std::uint32_t a, std::uint32_t b) const {
    std::uint64_t buf[36];
    std::vector<std::uint64_t> heap;
    std::uint64_t* out = buf;
    if (entry_count_ > 36) {
        heap.resize(entry_count_);
        out = heap.data();
    }
    mul_raw(raw(a), raw(b), out);
    return lookup(out);
}

std::uint32_t Quotient::power_pos(std::uint32_t pos, const Int& exponent) const {
    if (exponent < 0) throw std::invalid_argument("power_pos expects a nonnegative exponent");
    std::uint32_t result = 0;  // identity
    std::uint32_t base = pos;
    Int e = exponent;
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) result = mul(result, base);
        e >>= 1;
        if (e > 0) base = mul(base, base);
    }
    return result;
}

bool Quotient::congruent_to_identity(std::uint32_t pos, std::uint64_t m) const {
    if (m == 1) return true;
    const std::uint64_t* e = raw(pos);
    const int d = dim_;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::uint64_t want = (i == j) ? 1u : 0u;
            if (e[i * d + j] % m != want) return false;
        }
    return true;
}

// ---------------------------------------------------------------------------

Quotient enumerate_quotient(const GeneratorSet& gens, const Modulus& q, std::uint64_t max_order) {
    Quotient G;
    G.modulus_ = q;
    G.dim_ = gens.dim();
    G.entry_count_ = static_cast<size_t>(G.dim_) * G.dim_;
    if (mpz_sizeinbase(q.value().get_mpz_t(), 2) > 63)
        throw std::invalid_argument("modulus too large for quotient enumeration");
    G.q_ = q.value().get_ui();

    int bits = 1;
    while ((std::uint64_t(1) << bits) < G.q_) ++bits;
    G.bits_per_entry_ = bits;
    G.packable_ = static_cast<size_t>(bits) * G.entry_count_ <= 64;

    // reduce the generators; this also rejects moduli not coprime to q0
    const size_t k = gens.size();
    std::vector<std::vector<std::uint64_t>> rgens(k);
    for (size_t s = 0; s < k; ++s) {
        ResidueMatrix r = reduce_matrix(gens[s], q);
        rgens[s].resize(G.entry_count_);
        for (size_t t = 0; t < G.entry_count_; ++t) rgens[s][t] = r.entries()[t].get_ui();
    }

    auto insert_elem = [&](const std::uint64_t* e) {
        std::uint32_t pos = static_cast<std::uint32_t>(G.count_);
        G.elems_.insert(G.elems_.end(), e, e + G.entry_count_);
        if (G.packable_)
            G.packed_index_.emplace(G.pack(e), pos);
        else
            G.wide_index_.emplace(std::vector<std::uint64_t>(e, e + G.entry_count_), pos);
        ++G.count_;
    };
    auto contains = [&](const std::uint64_t* e) {
        if (G.packable_) return G.packed_index_.count(G.pack(e)) != 0;
        return G.wide_index_.count(std::vector<std::uint64_t>(e, e + G.entry_count_)) != 0;
    };

    std::vector<std::uint64_t> ident(G.entry_count_, 0);
    for (int i = 0; i < G.dim_; ++i) ident[static_cast<size_t>(i) * G.dim_ + i] = 1 % G.q_;
    insert_elem(ident.data());

    std::vector<std::uint32_t> frontier{0};
    std::vector<std::uint64_t> prod(G.entry_count_);
    while (!frontier.empty()) {
        if (G.packable_) {
            std::vector<std::uint64_t> fresh;  // packed codes; numeric order == lex order
            for (std::uint32_t x : frontier)
                for (size_t s = 0; s < k; ++s) {
                    G.mul_raw(G.raw(x), rgens[s].data(), prod.data());
                    if (!contains(prod.data())) fresh.push_back(G.pack(prod.data()));
                }
            std::sort(fresh.begin(), fresh.end());
            fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
            frontier.clear();
            const std::uint64_t mask = (bits == 64) ? ~0ull : ((std::uint64_t(1) << bits) - 1);
            for (std::uint64_t code : fresh) {
                for (size_t t = 0; t < G.entry_count_; ++t)
                    prod[G.entry_count_ - 1 - t] = (code >> (bits * t)) & mask;
                frontier.push_back(static_cast<std::uint32_t>(G.count_));
                insert_elem(prod.data());
            }
        } else {
            std::vector<std::vector<std::uint64_t>> fresh;
            for (std::uint32_t x : frontier)
                for (size_t s = 0; s < k; ++s) {
                    G.mul_raw(G.raw(x), rgens[s].data(), prod.data());
                    if (!contains(prod.data())) fresh.emplace_back(prod);
                }
            std::sort(fresh.begin(), fresh.end());
            fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
            frontier.clear();
            for (auto& e : fresh) {
                frontier.push_back(static_cast<std::uint32_t>(G.count_));
                insert_elem(e.data());
            }
        }
        if (G.count_ > max_order) throw QuotientTooLarge(G.count_);
    }

    // right-multiplication permutation tables
    const std::uint32_t n = static_cast<std::uint32_t>(G.count_);
    G.gen_action_.assign(k, std::vector<std::uint32_t>(n));
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(G.entry_count_);
#pragma omp for schedule(static)
        for (std::int64_t x = 0; x < static_cast<std::int64_t>(n); ++x)
            for (size_t s = 0; s < k; ++s) {
                G.mul_raw(G.raw(static_cast<std::uint32_t>(x)), rgens[s].data(), local.data());
                G.gen_action_[s][static_cast<size_t>(x)] = G.lookup(local.data());
            }
    }

    G.inverse_pos_.assign(n, 0);
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(G.entry_count_);
#pragma omp for schedule(static)
        for (std::int64_t x = 0; x < static_cast<std::int64_t>(n); ++x) {
            invert_raw(G.raw(static_cast<std::uint32_t>(x)), local.data(), G.dim_, G.q_);
            G.inverse_pos_[static_cast<size_t>(x)] = G.lookup(local.data());
        }
    }
    return G;
}

// ---------------------------------------------------------------------------

CayleyGraph cayley_graph(const Quotient& g) {
    CayleyGraph graph;
    graph.vertices = g.order();
    const size_t k = g.generator_count();
    for (std::uint32_t u = 0; u < g.order(); ++u)
        for (size_t s = 0; s < k; ++s) {
            std::uint32_t v = g.act(s, u);
            if (u < v || u == v) graph.edges.push_back({u, v, static_cast<std::uint32_t>(s)});
        }
    // each u<v edge appears once from each endpoint (via s and s^{-1}); keep
    // the copy recorded from the smaller endpoint, which we already did by
    // skipping u > v, so the count is |V| k / 2 plus one per self-loop.
    return graph;
}

KernelFilter congruence_filter(const Quotient& g, unsigned m) {
    const auto& factors = g.modulus().factors();
    if (factors.size() != 1) throw std::invalid_argument("congruence filter needs a prime-power modulus");
    if (m > factors[0].exponent) throw std::invalid_argument("level exceeds modulus");
    std::uint64_t pm = 1;
    for (unsigned t = 0; t < m; ++t) pm *= factors[0].prime.get_ui();
    KernelFilter f;
    f.level = m;
    for (std::uint32_t x = 0; x < g.order(); ++x)
        if (g.congruent_to_identity(x, pm)) f.positions.push_back(x);
    return f;
}

ResidueMatrix finite_log(const ResidueMatrix& g, const Int& p, unsigned a) {
    if (a < 1) throw std::invalid_argument("finite_log needs level a >= 1");
    Int pa, pa1;
    mpz_pow_ui(pa.get_mpz_t(), p.get_mpz_t(), a);
    mpz_pow_ui(pa1.get_mpz_t(), p.get_mpz_t(), a + 1);
    if (g.modulus().value() % pa1 != 0) throw std::invalid_argument("matrix modulus too coarse for finite_log");
    const int d = g.dim();
    std::vector<Int> out(static_cast<size_t>(d) * d);
    Modulus modp({{p, 1}});
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Int diff = g.at(i, j) - ((i == j) ? 1 : 0);
            Int r = diff % pa;
            if (r != 0) throw std::domain_error("not in congruence kernel");
            out[static_cast<size_t>(i) * d + j] = (diff / pa) % p;
        }
    return ResidueMatrix(d, std::move(out), modp);
}

// ---------------------------------------------------------------------------

namespace {

// center of the quotient: elements commuting with every generator
std::vector<std::uint32_t> center_positions(const Quotient& g) {
    std::vector<std::uint32_t> z;
    const size_t k = g.generator_count();
    // generator positions: act(s, identity)
    std::vector<std::uint32_t> gen_pos(k);
    for (size_t s = 0; s < k; ++s) gen_pos[s] = g.act(s, 0);
    for (std::uint32_t x = 0; x < g.order(); ++x) {
        bool central = true;
        for (size_t s = 0; s < k && central; ++s) central = g.mul(x, gen_pos[s]) == g.mul(gen_pos[s], x);
        if (central) z.push_back(x);
    }
    return z;
}

}  // namespace

std::vector<bool> commutator_set(const Quotient& g) {
    const std::uint32_t n = g.order();
    // commutators only depend on arguments modulo the center
    std::vector<std::uint32_t> z = center_positions(g);
    std::vector<std::uint32_t> reps;
    {
        std::vector<bool> covered(n, false);
        for (std::uint32_t x = 0; x < n; ++x) {
            if (covered[x]) continue;
            reps.push_back(x);
            for (std::uint32_t c : z) covered[g.mul(x, c)] = true;
        }
    }

    std::vector<bool> w(n, false);
    w[0] = true;  // [e, e]
#pragma omp parallel
    {
        std::vector<bool> local(n, false);
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t ia = 0; ia < static_cast<std::int64_t>(reps.size()); ++ia) {
            std::uint32_t a = reps[static_cast<size_t>(ia)];
            std::uint32_t inv_a = g.inverse_pos(a);
            for (size_t ib = static_cast<size_t>(ia); ib < reps.size(); ++ib) {
                std::uint32_t b = reps[ib];
                // [a,b] = a^{-1} (b^{-1} a b)
                std::uint32_t c = g.mul(inv_a, g.mul(g.inverse_pos(b), g.mul(a, b)));
                local[c] = true;
                local[g.inverse_pos(c)] = true;  // [b,a] = [a,b]^{-1}
            }
        }
#pragma omp critical
        for (std::uint32_t i = 0; i < n; ++i)
            if (local[i]) w[i] = true;
    }
    return w;
}

std::vector<bool> subgroup_closure(const Quotient& g, const std::vector<std::uint32_t>& generators) {
    const std::uint32_t n = g.order();
    std::vector<bool> in(n, false);
    std::vector<std::uint32_t> gens;
    for (std::uint32_t s : generators) {
        gens.push_back(s);
        gens.push_back(g.inverse_pos(s));
    }
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());

    std::vector<std::uint32_t> queue{0};
    in[0] = true;
    while (!queue.empty()) {
        std::uint32_t x = queue.back();
        queue.pop_back();
        for (std::uint32_t s : gens) {
            std::uint32_t y = g.mul(x, s);
            if (!in[y]) {
                in[y] = true;
                queue.push_back(y);
            }
        }
    }
    return in;
}

std::uint64_t popcount(const std::vector<bool>& v) {
    std::uint64_t c = 0;
    for (bool b : v)
        if (b) ++c;
    return c;
}

std::uint64_t abelianization_order(const Quotient& g) {
    std::vector<bool> w = commutator_set(g);
    std::vector<std::uint32_t> gens;
    for (std::uint32_t i = 0; i < g.order(); ++i)
        if (w[i]) gens.push_back(i);
    std::vector<bool> derived = subgroup_closure(g, gens);
    return g.order() / popcount(derived);
}

// ---------------------------------------------------------------------------

UnipotentPowerImages unipotent_power_images(const Quotient& g, unsigned m) {
    const auto& factors = g.modulus().factors();
    if (factors.size() != 1) throw std::invalid_argument("unipotent power images need a prime-power modulus");
    const Int& p = factors[0].prime;
    unsigned N = factors[0].exponent;
    if (m >= N) throw std::invalid_argument("power level must satisfy m < N");
    if (p < g.dim()) throw std::invalid_argument("unipotent power images require p >= dimension");

    // sanity: |U_d(Z/p^N)| = p^{N d(d-1)/2}
    Int expect;
    mpz_pow_ui(expect.get_mpz_t(), p.get_mpz_t(), N * static_cast<unsigned>(g.dim() * (g.dim() - 1) / 2));
    if (expect != static_cast<unsigned long>(g.order()))
        throw std::invalid_argument("quotient is not the full unitriangular group");

    Int pm;
    mpz_pow_ui(pm.get_mpz_t(), p.get_mpz_t(), m);

    UnipotentPowerImages out;
    std::vector<bool> seen(g.order(), false);
    for (std::uint32_t x = 0; x < g.order(); ++x) {
        std::uint32_t y = g.power_pos(x, pm);
        if (!seen[y]) {
            seen[y] = true;
            out.powers.push_back(y);
        }
    }
    std::sort(out.powers.begin(), out.powers.end());

    std::uint64_t pm_u = pm.get_ui();
    for (std::uint32_t x = 0; x < g.order(); ++x)
        if (g.congruent_to_identity(x, pm_u)) out.kernel.push_back(x);
    return out;
}

GeneratorSet unitriangular_generators(int dim) {
    if (dim < 2) throw std::invalid_argument("unitriangular generators need dimension >= 2");
    std::vector<RationalMatrix> gens;
    for (int i = 0; i + 1 < dim; ++i) {
        std::vector<Int> e(static_cast<size_t>(dim) * dim, 0);
        for (int t = 0; t < dim; ++t) e[static_cast<size_t>(t) * dim + t] = 1;
        e[static_cast<size_t>(i) * dim + (i + 1)] = 1;
        gens.emplace_back(dim, std::move(e), Int(1), 0);
    }
    return GeneratorSet(std::move(gens));
}

GeneratorSet sl2_elementary_generators() {
    std::vector<RationalMatrix> gens;
    gens.emplace_back(2, std::vector<Int>{1, 1, 0, 1}, Int(1), 0);
    gens.emplace_back(2, std::vector<Int>{1, 0, 1, 1}, Int(1), 0);
    return GeneratorSet(std::move(gens));
}

}  // namespace superapprox
