#pragma once

// Finite congruence quotients pi_q(Gamma): BFS enumeration from a symmetric
// generator set, Cayley graphs, congruence-kernel filtration, the finite
// logarithm, and brute-force commutator machinery.
//
// A Quotient stores elements as packed machine words (the modulus must fit
// in 63 bits; this covers everything enumerable at desk scale), reachable
// through the exact ResidueMatrix view.  Element position 0 is the identity
// and positions follow BFS levels with a lexicographic tie-break on entries,
// so indices are reproducible across runs.

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "superapprox/modring.hpp"

namespace superapprox {

inline constexpr std::uint64_t kDefaultMaxOrder = 2'000'000;

class GeneratorSet {
public:
    // adjoins missing inverses over Q so the multiset is symmetric
    explicit GeneratorSet(std::vector<RationalMatrix> generators);

    int dim() const { return generators_.front().dim(); }
    const Int& q0() const { return generators_.front().q0(); }
    size_t size() const { return generators_.size(); }
    const RationalMatrix& operator[](size_t i) const { return generators_[i]; }
    const std::vector<RationalMatrix>& generators() const { return generators_; }
    bool symmetric_closure_applied() const { return closure_applied_; }

private:
    std::vector<RationalMatrix> generators_;
    bool closure_applied_ = false;
};

struct QuotientTooLarge : std::runtime_error {
    explicit QuotientTooLarge(std::uint64_t partial)
        : std::runtime_error("quotient too large (partial count " + std::to_string(partial) + ")"),
          partial_count(partial) {}
    std::uint64_t partial_count;
};

class Quotient {
public:
    friend Quotient enumerate_quotient(const GeneratorSet&, const Modulus&, std::uint64_t);

    std::uint32_t order() const { return static_cast<std::uint32_t>(count_); }
    int dim() const { return dim_; }
    std::uint64_t q() const { return q_; }
    const Modulus& modulus() const { return modulus_; }
    size_t generator_count() const { return gen_action_.size(); }

    const std::vector<std::uint32_t>& gen_action(size_t gen) const { return gen_action_[gen]; }
    std::uint32_t act(size_t gen, std::uint32_t pos) const { return gen_action_[gen][pos]; }

    // raw entries of element i, row-major, values in [0, q)
    const std::uint64_t* raw(std::uint32_t pos) const { return elems_.data() + static_cast<size_t>(pos) * entry_count_; }
    ResidueMatrix element(std::uint32_t pos) const;

    std::optional<std::uint32_t> find(const std::vector<std::uint64_t>& entries) const;
    std::optional<std::uint32_t> find(const ResidueMatrix& m) const;

    // position of elems[a] * elems[b]
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const;
    std::uint32_t inverse_pos(std::uint32_t pos) const { return inverse_pos_[pos]; }
    std::uint32_t power_pos(std::uint32_t pos, const Int& exponent) const;

    // true when every entry of element pos is congruent to the identity mod m
    bool congruent_to_identity(std::uint32_t pos, std::uint64_t m) const;

private:
    Quotient() = default;

    void mul_raw(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* out) const;
    std::uint64_t pack(const std::uint64_t* entries) const;
    std::uint32_t lookup(const std::uint64_t* entries) const;

    Modulus modulus_{Modulus::parse("2")};
    std::uint64_t q_ = 0;
    int dim_ = 0;
    size_t entry_count_ = 0;
    size_t count_ = 0;
    bool packable_ = false;
    int bits_per_entry_ = 0;
    std::vector<std::uint64_t> elems_;
    std::vector<std::vector<std::uint32_t>> gen_action_;
    std::vector<std::uint32_t> inverse_pos_;
    std::unordered_map<std::uint64_t, std::uint32_t> packed_index_;
    // fallback index for moduli whose matrices do not pack into 64 bits
    struct VecHash {
        size_t operator()(const std::vector<std::uint64_t>& v) const {
            size_t h = 1469598103934665603ull;
            for (auto x : v) h = (h ^ x) * 1099511628211ull;
            return h;
        }
    };
    std::unordered_map<std::vector<std::uint64_t>, std::uint32_t, VecHash> wide_index_;
};

// BFS closure of the identity under right multiplication by pi_q(Omega).
// Deterministic element order: per BFS level, new elements are sorted
// lexicographically by entries.  Throws QuotientTooLarge past max_order.
Quotient enumerate_quotient(const GeneratorSet& gens, const Modulus& q,
                            std::uint64_t max_order = kDefaultMaxOrder);

struct CayleyGraph {
    std::uint64_t vertices;
    // (u, v, generator index); one record per undirected edge, self-loops
    // recorded once per generator that fixes the vertex
    std::vector<std::array<std::uint32_t, 3>> edges;
};

CayleyGraph cayley_graph(const Quotient& g);

struct KernelFilter {
    unsigned level;                        // m with q = p^n, 0 <= m <= n
    std::vector<std::uint32_t> positions;  // sorted; elements == I mod p^m
};

// positions of elements congruent to the identity mod p^m inside a quotient
// at prime-power modulus p^n
KernelFilter congruence_filter(const Quotient& g, unsigned m);

// (g - I) / p^a mod p for g == I mod p^a; additive across the congruence level
ResidueMatrix finite_log(const ResidueMatrix& g, const Int& p, unsigned a);

// |G / [G,G]| by brute-force commutator generation and subgroup closure
std::uint64_t abelianization_order(const Quotient& g);

// full set of commutators {[g,h]} as a position bitmap
std::vector<bool> commutator_set(const Quotient& g);

// subgroup generated by the marked positions (BFS closure)
std::vector<bool> subgroup_closure(const Quotient& g, const std::vector<std::uint32_t>& generators);

std::uint64_t popcount(const std::vector<bool>& v);

struct UnipotentPowerImages {
    std::vector<std::uint32_t> powers;  // sorted positions of {x^{p^m}}
    std::vector<std::uint32_t> kernel;  // sorted positions of U[p^m]
};

// both the p^m-th power image and the congruence kernel of the full
// unitriangular group mod p^N; the caller compares them
UnipotentPowerImages unipotent_power_images(const Quotient& g, unsigned m);

// the full upper-unitriangular group mod p^N from elementary generators
GeneratorSet unitriangular_generators(int dim);

// the standard SL2 elementary pair {[[1,1],[0,1]], [[1,0],[1,1]]}
GeneratorSet sl2_elementary_generators();

}  // namespace superapprox
