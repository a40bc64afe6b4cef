#include "superapprox/treereg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace superapprox {

namespace {

using Int = mpz_class;

Int pow_int(const Int& base, unsigned long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

// x^a < y^b and x^a >= y^b in exact integer arithmetic
bool pow_less(const Int& x, unsigned long a, const Int& y, unsigned long b) {
    return pow_int(x, a) < pow_int(y, b);
}
bool pow_geq(const Int& x, unsigned long a, const Int& y, unsigned long b) {
    return pow_int(x, a) >= pow_int(y, b);
}

bool leaf_prefix_equal(const Leaf& a, const Leaf& b, std::uint32_t len) {
    for (std::uint32_t t = 0; t < len; ++t)
        if (a[t] != b[t]) return false;
    return true;
}

}  // namespace

Rational Rational::parse(const std::string& text) {
    Rational r;
    auto slash = text.find('/');
    if (slash == std::string::npos) {
        r.num = std::stoll(text);
        r.den = 1;
    } else {
        r.num = std::stoll(text.substr(0, slash));
        r.den = std::stoll(text.substr(slash + 1));
    }
    if (r.den < 1) throw std::invalid_argument("rational denominator must be positive");
    return r;
}

std::string Rational::to_string() const { return std::to_string(num) + "/" + std::to_string(den); }

LeafSet::LeafSet(TreeShape shape, std::vector<Leaf> leaves) : shape_(shape), leaves_(std::move(leaves)) {
    if (shape_.k < 2) throw std::invalid_argument("branching factor must be >= 2");
    if (shape_.n < 1) throw std::invalid_argument("tree depth must be >= 1");
    for (const auto& leaf : leaves_) {
        if (leaf.size() != shape_.n) throw std::invalid_argument("leaf length must equal tree depth");
        for (auto d : leaf)
            if (d >= shape_.k) throw std::invalid_argument("leaf digit out of range");
    }
    std::sort(leaves_.begin(), leaves_.end());
    leaves_.erase(std::unique(leaves_.begin(), leaves_.end()), leaves_.end());
}

std::vector<Leaf> project(const LeafSet& a, std::uint32_t l) {
    if (l > a.shape().n) throw std::invalid_argument("projection level out of range");
    std::vector<Leaf> out;
    for (const auto& leaf : a.leaves()) {
        Leaf prefix(leaf.begin(), leaf.begin() + l);
        if (out.empty() || out.back() != prefix) out.push_back(std::move(prefix));
    }
    return out;
}

namespace {

// One strided regularization pass: prefixes of length child_len are the
// "children", grouped under prefixes of length parent_len.  Keeps, per parent
// in the winning dyadic class, the k' smallest children, and returns the
// surviving leaves (entire child subtrees are kept).
struct LevelOutcome {
    std::uint64_t k_prime;
    std::vector<Leaf> kept;    // surviving leaves
    size_t children_before;    // |pi_child(A)|
    size_t children_after;     // |pi_child(A')|
};

LevelOutcome regularize_level(const std::vector<Leaf>& sorted_leaves, std::uint32_t parent_len,
                              std::uint32_t child_len, const Int& branching) {
    struct Parent {
        size_t first_leaf;
        std::vector<size_t> child_starts;  // leaf index where each distinct child prefix begins
        size_t end_leaf;
    };
    std::vector<Parent> parents;
    size_t total_children = 0;
    for (size_t i = 0; i < sorted_leaves.size();) {
        Parent p;
        p.first_leaf = i;
        size_t j = i;
        while (j < sorted_leaves.size() && leaf_prefix_equal(sorted_leaves[i], sorted_leaves[j], parent_len)) {
            p.child_starts.push_back(j);
            size_t t = j;
            while (t < sorted_leaves.size() && leaf_prefix_equal(sorted_leaves[j], sorted_leaves[t], child_len)) ++t;
            j = t;
        }
        p.end_leaf = j;
        total_children += p.child_starts.size();
        parents.push_back(std::move(p));
        i = j;
    }

    // dyadic classes 2^c <= deg < 2^{c+1}; retained mass = (#parents) * 2^c
    std::vector<std::uint64_t> class_count;
    for (const auto& p : parents) {
        unsigned c = 0;
        while ((std::uint64_t(2) << c) <= p.child_starts.size()) ++c;
        if (class_count.size() <= c) class_count.resize(c + 1, 0);
        ++class_count[c];
    }
    unsigned best = 0;
    unsigned __int128 best_mass = 0;
    for (unsigned c = 0; c < class_count.size(); ++c) {
        unsigned __int128 mass = static_cast<unsigned __int128>(class_count[c]) << c;
        if (mass > best_mass) {
            best_mass = mass;
            best = c;
        }
    }

    LevelOutcome out;
    out.k_prime = std::uint64_t(1) << best;
    out.children_before = total_children;
    out.children_after = 0;
    for (const auto& p : parents) {
        std::uint64_t deg = p.child_starts.size();
        if (deg < out.k_prime || deg >= out.k_prime * 2) continue;
        for (std::uint64_t c = 0; c < out.k_prime; ++c) {
            size_t from = p.child_starts[c];
            size_t to = (c + 1 < deg) ? p.child_starts[c + 1] : p.end_leaf;
            out.kept.insert(out.kept.end(), sorted_leaves.begin() + from, sorted_leaves.begin() + to);
            ++out.children_after;
        }
    }

    // |A'| >= |A| / (2 log2 K): equivalent to K^{2 |A'|} >= 2^{|A|}, exact
    if (!pow_geq(branching, 2 * out.children_after, Int(2), total_children))
        throw std::logic_error("parents regularization mass bound violated");
    return out;
}

struct ChainOutcome {
    std::vector<Leaf> survivors;              // A_0 as truncated leaves
    std::vector<std::uint64_t> degrees;       // k_0 .. k_{levels-1}
    std::vector<std::uint64_t> chain_sizes;   // |A_i| for i = 0..levels
};

ChainOutcome run_chain(std::vector<Leaf> leaves, std::uint32_t levels, std::uint32_t stride, const Int& branching) {
    ChainOutcome out;
    out.degrees.assign(levels, 1);
    out.chain_sizes.assign(levels + 1, 0);
    out.chain_sizes[levels] = leaves.size();
    for (std::uint32_t i = levels; i >= 1; --i) {
        LevelOutcome lvl = regularize_level(leaves, (i - 1) * stride, i * stride, branching);
        out.degrees[i - 1] = lvl.k_prime;
        leaves = std::move(lvl.kept);
        out.chain_sizes[i - 1] = leaves.size();
    }
    out.survivors = std::move(leaves);
    return out;
}

// m = max{ i in [0, levels] : prod_{j<i} k_j < K^{i eps/2} }, 0 if none
std::uint32_t compute_m(const std::vector<std::uint64_t>& degrees, const Int& branching, const Rational& eps) {
    std::uint32_t m = 0;
    Int prod = 1;
    const unsigned long a = static_cast<unsigned long>(eps.num);
    const unsigned long b = static_cast<unsigned long>(eps.den);
    for (std::uint32_t i = 0; i <= degrees.size(); ++i) {
        if (i > 0) prod *= degrees[i - 1];
        // note: the index i enters the exponent, so recompute per i
        if (i > 0 && pow_less(prod, 2 * b, branching, i * a)) m = i;
    }
    return m;
}

void verify_growth(const std::vector<std::uint64_t>& degrees, std::uint32_t m, const Int& branching,
                   const Rational& eps) {
    const unsigned long a = static_cast<unsigned long>(eps.num);
    const unsigned long b = static_cast<unsigned long>(eps.den);
    Int prod = 1;
    for (std::uint32_t l = m + 1; l <= degrees.size(); ++l) {
        prod *= degrees[l - 1];
        if (!pow_geq(prod, 2 * b, branching, (l - m) * a))
            throw std::logic_error("regularization growth bound violated");
    }
}

bool large_k_hypothesis(std::uint64_t k, const Rational& eps) {
    // k^{eps/4} > 2 log2 k, checked in floating point (it only gates which
    // conclusions get asserted)
    double lk = std::log2(static_cast<double>(k));
    double lhs = (static_cast<double>(eps.num) / (4.0 * static_cast<double>(eps.den))) * lk;
    double rhs = std::log2(2.0 * lk);
    return lhs > rhs + 1e-12;
}

}  // namespace

ParentsResult parents_regularize(const LeafSet& a) {
    if (a.empty()) throw std::invalid_argument("empty leaf set");
    LevelOutcome lvl = regularize_level(a.leaves(), a.shape().n - 1, a.shape().n, Int(static_cast<unsigned long>(a.shape().k)));
    return ParentsResult{lvl.k_prime, LeafSet(a.shape(), std::move(lvl.kept))};
}

RegularizationResult regularize(const LeafSet& a, const Rational& eps) {
    if (a.empty()) throw std::invalid_argument("empty leaf set");
    if (eps.num < 1 || eps.num > eps.den) throw std::invalid_argument("epsilon must lie in (0, 1]");
    const TreeShape shape = a.shape();
    const Int k(static_cast<unsigned long>(shape.k));

    ChainOutcome chain = run_chain(a.leaves(), shape.n, 1, k);
    std::uint32_t m = compute_m(chain.degrees, k, eps);
    verify_growth(chain.degrees, m, k, eps);

    // |A_0| = prod k_i
    {
        Int prod = 1;
        for (auto d : chain.degrees) prod *= d;
        if (prod != static_cast<unsigned long>(chain.survivors.size()))
            throw std::logic_error("survivor count does not match degree product");
    }

    RegularizationResult r;
    r.level_stride = 1;
    r.m = m;
    r.v = Leaf(chain.survivors.front().begin(), chain.survivors.front().begin() + m);
    std::vector<Leaf> b_leaves;
    for (const auto& leaf : chain.survivors)
        if (leaf_prefix_equal(leaf, chain.survivors.front(), m)) b_leaves.push_back(leaf);
    r.b = LeafSet(shape, std::move(b_leaves));
    r.degrees.assign(chain.degrees.begin() + m, chain.degrees.end());
    r.all_degrees = chain.degrees;
    r.chain_sizes = chain.chain_sizes;

    const unsigned long ea = static_cast<unsigned long>(eps.num);
    const unsigned long eb = static_cast<unsigned long>(eps.den);
    r.hypotheses_hold =
        pow_geq(Int(static_cast<unsigned long>(a.size())), eb, k, shape.n * ea) && large_k_hypothesis(shape.k, eps);
    if (r.hypotheses_hold) {
        // m <= n (1 - eps/4)  and  |B| >= k^{n eps^2 / 8}
        if (!(static_cast<std::uint64_t>(4) * eb * m <= static_cast<std::uint64_t>(shape.n) * (4 * eb - ea)))
            throw std::logic_error("regularization level bound m <= n(1 - eps/4) violated");
        if (!pow_geq(Int(static_cast<unsigned long>(r.b.size())), 8 * eb * eb, k, shape.n * ea * ea))
            throw std::logic_error("regularization size bound |B| >= k^{n eps^2/8} violated");
    }
    return r;
}

double k_epsilon_log2(const Rational& eps) {
    // solve (eps/4) L = 1 + log2 L for the largest root; the function
    // h(L) = (eps/4)L - 1 - log2(L) is convex with minimum at 4/(eps ln 2)
    const double e = static_cast<double>(eps.num) / static_cast<double>(eps.den);
    auto h = [&](double L) { return 0.25 * e * L - 1.0 - std::log2(L); };
    double lmin = 4.0 / (e * std::numbers::ln2_v<double>);
    if (h(lmin) >= 0.0) return 0.0;  // inequality holds for every K >= 1
    double lo = lmin, hi = lmin * 2;
    while (h(hi) <= 0.0) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (h(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * hi) break;
    }
    return 0.5 * (lo + hi);
}

RegularizationResult block_regularize(const LeafSet& a, const Rational& eps) {
    if (a.empty()) throw std::invalid_argument("empty leaf set");
    if (eps.num < 1 || eps.num > eps.den) throw std::invalid_argument("epsilon must lie in (0, 1]");
    const TreeShape shape = a.shape();

    const double lambda_star = k_epsilon_log2(eps);
    const double log2k = std::log2(static_cast<double>(shape.k));
    std::uint32_t s = 1;
    while (static_cast<double>(s) * log2k < lambda_star) ++s;

    RegularizationResult r;
    r.level_stride = s;
    r.k_epsilon = std::exp2(lambda_star);
    r.block_size = s;

    const std::uint32_t levels = shape.n / s;
    if (levels == 0) {
        // block size exceeds the depth; everything collapses to the root
        r.b = a;
        r.m = 0;
        r.v = Leaf{};
        return r;
    }

    // truncate to length s*levels and deduplicate
    std::vector<Leaf> trunc;
    trunc.reserve(a.size());
    for (const auto& leaf : a.leaves()) {
        Leaf t(leaf.begin(), leaf.begin() + static_cast<size_t>(s) * levels);
        if (trunc.empty() || trunc.back() != t) trunc.push_back(std::move(t));
    }

    Int k_blk = pow_int(Int(static_cast<unsigned long>(shape.k)), s);
    Rational half{eps.num, 2 * eps.den};

    ChainOutcome chain = run_chain(std::move(trunc), levels, s, k_blk);
    std::uint32_t m_blk = compute_m(chain.degrees, k_blk, half);
    verify_growth(chain.degrees, m_blk, k_blk, half);

    r.m = m_blk * s;
    r.v = Leaf(chain.survivors.front().begin(), chain.survivors.front().begin() + r.m);
    r.all_degrees = chain.degrees;
    r.degrees.assign(chain.degrees.begin() + m_blk, chain.degrees.end());
    r.chain_sizes = chain.chain_sizes;

    // lift: keep every original leaf whose truncation survived under v
    std::vector<Leaf> b_leaves;
    {
        const Leaf& first = chain.survivors.front();
        std::vector<Leaf> block_set;
        for (const auto& t : chain.survivors)
            if (leaf_prefix_equal(t, first, r.m)) block_set.push_back(t);
        for (const auto& leaf : a.leaves()) {
            Leaf t(leaf.begin(), leaf.begin() + static_cast<size_t>(s) * levels);
            if (std::binary_search(block_set.begin(), block_set.end(), t)) b_leaves.push_back(leaf);
        }
    }
    r.b = LeafSet(shape, std::move(b_leaves));

    const unsigned long ea = static_cast<unsigned long>(eps.num);
    const unsigned long eb = static_cast<unsigned long>(eps.den);
    const Int k(static_cast<unsigned long>(shape.k));
    const double need = std::max(64.0 * eb * eb / (static_cast<double>(ea) * ea), 2.0 * eb / ea);
    // largeness hypotheses of the blocked variant, plus the ones the inner
    // eps/2 pass actually uses
    const bool inner_large_k =
        0.125 * (static_cast<double>(ea) / eb) * static_cast<double>(s) * log2k >
        std::log2(2.0 * static_cast<double>(s) * log2k) + 1e-12;
    const bool inner_mass =
        pow_geq(Int(static_cast<unsigned long>(chain.chain_sizes[levels])), 2 * eb, k_blk, levels * ea);
    r.hypotheses_hold = pow_geq(Int(static_cast<unsigned long>(a.size())), eb, k, shape.n * ea) &&
                        static_cast<double>(shape.n) * log2k > lambda_star * need + 1e-12 && inner_large_k &&
                        inner_mass;
    if (r.hypotheses_hold) {
        if (!(static_cast<std::uint64_t>(4) * eb * r.m <= static_cast<std::uint64_t>(shape.n) * (4 * eb - ea)))
            throw std::logic_error("block regularization level bound violated");
        if (!pow_geq(Int(static_cast<unsigned long>(r.b.size())), 32 * eb * eb, k, shape.n * ea * ea))
            throw std::logic_error("block regularization size bound violated");
        // |pi_{l,n}(B)| >= K^{-2} k^{(l-m) eps/4}, float check with slack
        for (std::uint32_t l = r.m; l <= shape.n; ++l) {
            size_t proj = project(r.b, l).size();
            double bound = std::exp2(-2.0 * lambda_star + (static_cast<double>(l) - r.m) * log2k * 0.25 * ea / eb);
            if (static_cast<double>(proj) < bound - 1e-9)
                throw std::logic_error("block regularization projection bound violated");
        }
    }
    return r;
}

LeafSet read_leafset(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("missing leaf set header");
    TreeShape shape{};
    if (std::sscanf(header.c_str(), "k=%lu n=%u", &shape.k, &shape.n) != 2)
        throw std::invalid_argument("leaf set header must be \"k=<k> n=<n>\"");
    std::vector<Leaf> leaves;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Leaf leaf;
        std::stringstream ss(line);
        std::string digit;
        while (std::getline(ss, digit, ',')) leaf.push_back(std::stoull(digit));
        leaves.push_back(std::move(leaf));
    }
    return LeafSet(shape, std::move(leaves));
}

void write_leafset(std::ostream& out, const LeafSet& a) {
    out << "k=" << a.shape().k << " n=" << a.shape().n << "\n";
    for (const auto& leaf : a.leaves()) {
        for (size_t t = 0; t < leaf.size(); ++t) {
            if (t) out << ',';
            out << leaf[t];
        }
        out << "\n";
    }
}

}  // namespace superapprox
