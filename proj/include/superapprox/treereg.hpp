#pragma once

// Regularization of a subset of the leaves of the rooted k-regular depth-n
// tree: extraction of a subset with uniform power-of-two branching per level
// and controlled mass loss, plus the blocked variant for small k.
//
// Leaves are digit sequences (digits < k).  Digits are machine words, which
// caps k below 2^63; every count and growth-bound comparison is done in exact
// arbitrary-precision integer arithmetic (cross-multiplied powers, never
// floating point).

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace superapprox {

struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 1;
    static Rational parse(const std::string& text);  // "a/b" or "a"
    std::string to_string() const;
};

struct TreeShape {
    std::uint64_t k;  // branching factor, >= 2
    std::uint32_t n;  // generations, >= 1
};

using Leaf = std::vector<std::uint64_t>;

class LeafSet {
public:
    LeafSet() : shape_{2, 1} {}
    LeafSet(TreeShape shape, std::vector<Leaf> leaves);  // sorts and deduplicates

    const TreeShape& shape() const { return shape_; }
    const std::vector<Leaf>& leaves() const { return leaves_; }
    size_t size() const { return leaves_.size(); }
    bool empty() const { return leaves_.empty(); }

private:
    TreeShape shape_;
    std::vector<Leaf> leaves_;
};

// distinct length-l prefixes of members of A, sorted
std::vector<Leaf> project(const LeafSet& a, std::uint32_t l);

struct ParentsResult {
    std::uint64_t k_prime;  // power of two
    LeafSet pruned;
};

// one level of regularization at the deepest generation: picks the dyadic
// degree class maximizing retained mass (ties to the smallest class), keeps
// the k' lexicographically smallest children per parent.
// Postcondition |A'| >= |A| / (2 log2 k), verified exactly.
ParentsResult parents_regularize(const LeafSet& a);

struct RegularizationResult {
    LeafSet b;
    std::uint32_t m = 0;
    Leaf v;                              // length-m prefix with pi_{m,n}(B) = {v}
    std::vector<std::uint64_t> degrees;  // k_m .. k_{n-1} at stride granularity
    std::uint32_t level_stride = 1;      // 1 for regularize, block size s for block_regularize

    // trace for verification
    std::vector<std::uint64_t> all_degrees;  // k_0 .. k_{n-1}
    std::vector<std::uint64_t> chain_sizes;  // |A_0| .. |A_n|
    bool hypotheses_hold = false;            // |A| >= k^{n eps} and k^{eps/4} > 2 log2 k
    double k_epsilon = 1.0;                  // K(eps), block variant only
    std::uint32_t block_size = 1;            // s, block variant only
};

// chain of parents_regularize passes from the deepest level up, then the
// maximal subtree with the growth guarantee
// |pi_{l,n}(B)| = prod_{i=m}^{l-1} k_i >= k^{(l-m) eps/2} for all m < l <= n.
RegularizationResult regularize(const LeafSet& a, const Rational& epsilon);

// reindexes on blocks of s digits with k^s-ary branching (s minimal with
// k^s >= K(eps)), regularizes at eps/2, and lifts back
RegularizationResult block_regularize(const LeafSet& a, const Rational& epsilon);

// largest K with K^{eps/4} = 2 log2 K, i.e. the threshold above which
// k^{eps/4} >= 2 log2 k holds for every k; returns log2 of it
double k_epsilon_log2(const Rational& epsilon);

// text format: header "k=<k> n=<n>", then one leaf per line, comma-separated
LeafSet read_leafset(std::istream& in);
void write_leafset(std::ostream& out, const LeafSet& a);

}  // namespace superapprox
