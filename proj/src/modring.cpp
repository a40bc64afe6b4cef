#include "superapprox/modring.hpp"

#include <algorithm>
#include <sstream>

namespace superapprox {

int valuation(const Int& x, const Int& p) {
    if (x == 0) throw std::domain_error("valuation of zero");
    Int a = abs(x);
    int v = 0;
    Int r, q;
    while (true) {
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
        if (r != 0) break;
        a = q;
        ++v;
    }
    return v;
}

Int inverse_mod(const Int& a, const Int& q) {
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), q.get_mpz_t()) == 0)
        throw std::domain_error("element not invertible mod q");
    return r;
}

Int pow_mod(Int base, Int exp, const Int& q) {
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), q.get_mpz_t());
    return r;
}

bool is_prime_small(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// ---------------------------------------------------------------------------

Modulus::Modulus(std::vector<Factor> factors) : factors_(std::move(factors)), value_(1) {
    if (factors_.empty()) throw std::invalid_argument("modulus needs at least one prime factor");
    Int prev = 0;
    for (const auto& f : factors_) {
        if (f.prime <= prev) throw std::invalid_argument("modulus primes must be strictly increasing");
        if (f.exponent < 1) throw std::invalid_argument("modulus exponents must be >= 1");
        if (f.prime < 2 || (f.prime.fits_ulong_p() && !is_prime_small(f.prime.get_ui())))
            throw std::invalid_argument("modulus factor is not prime: " + f.prime.get_str());
        prev = f.prime;
        Int pw;
        mpz_pow_ui(pw.get_mpz_t(), f.prime.get_mpz_t(), f.exponent);
        value_ *= pw;
    }
}

Modulus Modulus::parse(const std::string& text) {
    if (text.find('^') == std::string::npos && text.find('*') == std::string::npos)
        return from_value(Int(text));
    std::vector<Factor> factors;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '*')) {
        auto caret = part.find('^');
        Factor f;
        if (caret == std::string::npos) {
            f.prime = Int(part);
            f.exponent = 1;
        } else {
            f.prime = Int(part.substr(0, caret));
            f.exponent = static_cast<unsigned>(std::stoul(part.substr(caret + 1)));
        }
        factors.push_back(std::move(f));
    }
    return Modulus(std::move(factors));
}

Modulus Modulus::from_value(const Int& value) {
    if (value < 2) throw std::invalid_argument("modulus must be >= 2");
    std::vector<Factor> factors;
    Int rest = value;
    for (std::uint64_t d = 2; d <= 1000000 && Int(d) * Int(d) <= rest; ++d) {
        if (rest % d == 0) {
            unsigned e = 0;
            while (rest % d == 0) {
                rest /= d;
                ++e;
            }
            factors.push_back({Int(d), e});
        }
    }
    if (rest > 1) {
        // leftover cofactor must itself be prime and under the trial bound,
        // or a single large prime we cannot certify cheaply
        if (rest > Int(1000000) * Int(1000000))
            throw std::invalid_argument("cannot factor modulus by trial division up to 10^6; use p^n form");
        factors.push_back({rest, 1});
    }
    return Modulus(std::move(factors));
}

bool Modulus::coprime_to(const Int& x) const {
    Int g;
    mpz_gcd(g.get_mpz_t(), value_.get_mpz_t(), x.get_mpz_t());
    return g == 1;
}

std::string Modulus::to_string() const { return value_.get_str(); }

// ---------------------------------------------------------------------------

RationalMatrix::RationalMatrix(int dim, std::vector<Int> numerators, const Int& q0, unsigned den_exponent)
    : dim_(dim), num_(std::move(numerators)), q0_(q0), den_exponent_(den_exponent) {
    if (dim_ < 1) throw std::invalid_argument("matrix dimension must be >= 1");
    if (num_.size() != static_cast<size_t>(dim_) * dim_) throw std::invalid_argument("entry count mismatch");
    if (q0_ < 1) throw std::invalid_argument("q0 must be >= 1");
    if (q0_ == 1 && den_exponent_ != 0) den_exponent_ = 0;
    normalize();
}

RationalMatrix RationalMatrix::identity(int dim, const Int& q0) {
    std::vector<Int> e(static_cast<size_t>(dim) * dim, 0);
    for (int i = 0; i < dim; ++i) e[static_cast<size_t>(i) * dim + i] = 1;
    return RationalMatrix(dim, std::move(e), q0, 0);
}

void RationalMatrix::normalize() {
    while (den_exponent_ > 0) {
        bool all = true;
        for (const auto& x : num_)
            if (x % q0_ != 0) {
                all = false;
                break;
            }
        if (!all) break;
        for (auto& x : num_) x /= q0_;
        --den_exponent_;
    }
}

RationalMatrix RationalMatrix::multiply(const RationalMatrix& other) const {
    if (dim_ != other.dim_ || q0_ != other.q0_) throw std::invalid_argument("matrix shape/q0 mismatch");
    std::vector<Int> out(static_cast<size_t>(dim_) * dim_, 0);
    for (int i = 0; i < dim_; ++i)
        for (int k = 0; k < dim_; ++k) {
            const Int& a = num(i, k);
            if (a == 0) continue;
            for (int j = 0; j < dim_; ++j) out[static_cast<size_t>(i) * dim_ + j] += a * other.num(k, j);
        }
    return RationalMatrix(dim_, std::move(out), q0_, den_exponent_ + other.den_exponent_);
}

namespace {

Int det_recursive(const std::vector<Int>& m, std::vector<int> rows, std::vector<int> cols, int dim) {
    const size_t n = rows.size();
    if (n == 1) return m[static_cast<size_t>(rows[0]) * dim + cols[0]];
    Int det = 0;
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    for (size_t j = 0; j < n; ++j) {
        const Int& a = m[static_cast<size_t>(rows[0]) * dim + cols[j]];
        if (a == 0) continue;
        std::vector<int> sub_cols;
        sub_cols.reserve(n - 1);
        for (size_t t = 0; t < n; ++t)
            if (t != j) sub_cols.push_back(cols[t]);
        Int minor = det_recursive(m, sub_rows, sub_cols, dim);
        if (j % 2 == 0)
            det += a * minor;
        else
            det -= a * minor;
    }
    return det;
}

}  // namespace

Int RationalMatrix::determinant_numerator() const {
    std::vector<int> idx(dim_);
    for (int i = 0; i < dim_; ++i) idx[i] = i;
    return det_recursive(num_, idx, idx, dim_);
}

RationalMatrix RationalMatrix::inverse() const {
    Int det = determinant_numerator();
    if (det == 0) throw std::domain_error("matrix not invertible over Q");

    // det must be (up to sign) q0-smooth for the inverse to stay in Z[1/q0]
    Int d = abs(det);
    if (q0_ > 1) {
        Int g;
        while (d > 1) {
            mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), q0_.get_mpz_t());
            if (g == 1) break;
            d /= g;
        }
    }
    if (d != 1) throw std::domain_error("matrix not invertible over Z[1/q0]");

    // adjugate: inv = q0^e * adj(N) / det(N); clear det into a power of q0
    unsigned e2 = 0;
    Int scale = 1;  // q0^{e2} / det  (integer once e2 large enough)
    if (q0_ == 1) {
        scale = (det > 0) ? 1 : -1;
    } else {
        Int pw = 1;
        Int ad = abs(det);
        while (pw % ad != 0) {
            pw *= q0_;
            ++e2;
        }
        scale = pw / det;
    }

    std::vector<Int> adj(static_cast<size_t>(dim_) * dim_);
    std::vector<int> all(dim_);
    for (int i = 0; i < dim_; ++i) all[i] = i;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
            std::vector<int> rows, cols;
            for (int t = 0; t < dim_; ++t) {
                if (t != j) rows.push_back(t);
                if (t != i) cols.push_back(t);
            }
            Int c = (dim_ == 1) ? Int(1) : det_recursive(num_, rows, cols, dim_);
            if ((i + j) % 2 == 1) c = -c;
            adj[static_cast<size_t>(i) * dim_ + j] = c * scale;
        }

    // result = adj * q0^{den_exponent_} / q0^{e2}
    unsigned e_new;
    if (den_exponent_ >= e2) {
        Int pw;
        mpz_pow_ui(pw.get_mpz_t(), q0_.get_mpz_t(), den_exponent_ - e2);
        for (auto& x : adj) x *= pw;
        e_new = 0;
    } else {
        e_new = e2 - den_exponent_;
    }
    return RationalMatrix(dim_, std::move(adj), q0_, e_new);
}

bool RationalMatrix::operator==(const RationalMatrix& other) const {
    return dim_ == other.dim_ && den_exponent_ == other.den_exponent_ && q0_ == other.q0_ && num_ == other.num_;
}

// ---------------------------------------------------------------------------

ResidueMatrix::ResidueMatrix(int dim, std::vector<Int> entries, Modulus modulus)
    : dim_(dim), entries_(std::move(entries)), modulus_(std::move(modulus)) {
    if (entries_.size() != static_cast<size_t>(dim_) * dim_) throw std::invalid_argument("entry count mismatch");
    for (auto& x : entries_) {
        mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), modulus_.value().get_mpz_t());
    }
}

ResidueMatrix ResidueMatrix::identity(int dim, const Modulus& q) {
    std::vector<Int> e(static_cast<size_t>(dim) * dim, 0);
    for (int i = 0; i < dim; ++i) e[static_cast<size_t>(i) * dim + i] = 1;
    return ResidueMatrix(dim, std::move(e), q);
}

ResidueMatrix ResidueMatrix::multiply(const ResidueMatrix& other) const {
    if (dim_ != other.dim_ || !(modulus_ == other.modulus_)) throw std::invalid_argument("residue matrix mismatch");
    std::vector<Int> out(static_cast<size_t>(dim_) * dim_, 0);
    for (int i = 0; i < dim_; ++i)
        for (int k = 0; k < dim_; ++k) {
            const Int& a = at(i, k);
            if (a == 0) continue;
            for (int j = 0; j < dim_; ++j) out[static_cast<size_t>(i) * dim_ + j] += a * other.at(k, j);
        }
    return ResidueMatrix(dim_, std::move(out), modulus_);
}

bool ResidueMatrix::is_identity() const {
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            if (at(i, j) != ((i == j) ? 1 : 0)) return false;
    return true;
}

bool ResidueMatrix::operator==(const ResidueMatrix& other) const {
    return dim_ == other.dim_ && modulus_ == other.modulus_ && entries_ == other.entries_;
}

ResidueMatrix reduce_matrix(const RationalMatrix& m, const Modulus& q) {
    Int den;
    mpz_pow_ui(den.get_mpz_t(), m.q0().get_mpz_t(), m.den_exponent());
    Int den_inv;
    if (mpz_invert(den_inv.get_mpz_t(), den.get_mpz_t(), q.value().get_mpz_t()) == 0)
        throw std::domain_error("modulus not coprime to q0");
    std::vector<Int> entries;
    entries.reserve(m.numerators().size());
    for (const auto& x : m.numerators()) entries.push_back(x * den_inv);
    return ResidueMatrix(m.dim(), std::move(entries), q);
}

std::vector<Int> crt_split(const Int& x, const Modulus& q) {
    if (x < 0 || x >= q.value()) throw std::invalid_argument("crt_split input out of range");
    std::vector<Int> out;
    out.reserve(q.factors().size());
    for (const auto& f : q.factors()) {
        Int pk;
        mpz_pow_ui(pk.get_mpz_t(), f.prime.get_mpz_t(), f.exponent);
        out.push_back(x % pk);
    }
    return out;
}

Int crt_combine(const std::vector<Int>& residues, const Modulus& q) {
    if (residues.size() != q.factors().size()) throw std::invalid_argument("crt component count mismatch");
    Int result = 0;
    size_t i = 0;
    for (const auto& f : q.factors()) {
        Int pk;
        mpz_pow_ui(pk.get_mpz_t(), f.prime.get_mpz_t(), f.exponent);
        Int rest = q.value() / pk;
        // rest * (rest^{-1} mod pk) is 1 mod pk and 0 mod every other factor
        result += residues[i] * rest * inverse_mod(rest % pk, pk);
        ++i;
    }
    mpz_fdiv_r(result.get_mpz_t(), result.get_mpz_t(), q.value().get_mpz_t());
    return result;
}

}  // namespace superapprox
