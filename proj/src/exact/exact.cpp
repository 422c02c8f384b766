#include "tpe/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "modular.hpp"
#include "tpe/error.hpp"

namespace tpe::exact {

namespace {

void require_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw InvalidParameter("matrix dimensions must be at least 1");
    }
}

std::size_t max_entry_bits(std::span<const Integer> v) {
    std::size_t bits = 0;
    for (const auto& e : v) {
        bits = std::max(bits, mpz_sizeinbase(e.get_mpz_t(), 2));
    }
    return bits;
}

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_square(const Matrix& m, const char* op) {
    if (!m.is_square()) {
        throw DimensionMismatch(std::string(op) + ": expected a square matrix, got " + dims(m));
    }
}

} // namespace

// --- Matrix ---------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    require_dims(rows, cols);
    num_.resize(rows * cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<Integer> numerators, Integer denominator)
    : rows_(rows), cols_(cols), num_(std::move(numerators)), denominator_(std::move(denominator)) {
    require_dims(rows, cols);
    if (num_.size() != rows * cols) {
        throw DimensionMismatch("matrix entry count does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
    }
    if (denominator_ == 0) {
        throw InvalidParameter("matrix denominator must be non-zero");
    }
    normalize();
}

void Matrix::normalize() {
    if (denominator_ < 0) {
        denominator_ = -denominator_;
        for (auto& e : num_) {
            e = -e;
        }
    }
    if (denominator_ == 1) {
        return;
    }
    Integer g = denominator_;
    for (const auto& e : num_) {
        if (g == 1) {
            return;
        }
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), e.get_mpz_t());
    }
    if (g == 1) {
        return;
    }
    for (auto& e : num_) {
        mpz_divexact(e.get_mpz_t(), e.get_mpz_t(), g.get_mpz_t());
    }
    mpz_divexact(denominator_.get_mpz_t(), denominator_.get_mpz_t(), g.get_mpz_t());
}

Matrix Matrix::identity(std::size_t dim) {
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m.num_[i * dim + i] = 1;
    }
    return m;
}

Matrix Matrix::from_integers(std::size_t rows, std::size_t cols, std::vector<Integer> entries) {
    return Matrix(rows, cols, std::move(entries), Integer(1));
}

Matrix Matrix::from_parts(std::size_t rows, std::size_t cols, std::vector<Integer> numerators,
                          Integer denominator) {
    return Matrix(rows, cols, std::move(numerators), std::move(denominator));
}

Matrix Matrix::from_scalars(std::size_t rows, std::size_t cols, std::span<const Scalar> entries) {
    if (entries.size() != rows * cols) {
        throw DimensionMismatch("matrix entry count does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
    }
    Integer common = 1;
    for (const auto& e : entries) {
        mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), e.get_den_mpz_t());
    }
    std::vector<Integer> num(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        mpz_divexact(num[i].get_mpz_t(), common.get_mpz_t(), entries[i].get_den_mpz_t());
        num[i] *= entries[i].get_num();
    }
    return Matrix(rows, cols, std::move(num), std::move(common));
}

Scalar Matrix::at(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) {
        throw DimensionMismatch("matrix index out of range");
    }
    Scalar s(num_[r * cols_ + c], denominator_);
    s.canonicalize();
    return s;
}

std::vector<Scalar> Matrix::entries() const {
    std::vector<Scalar> out;
    out.reserve(num_.size());
    for (const auto& e : num_) {
        Scalar s(e, denominator_);
        s.canonicalize();
        out.push_back(std::move(s));
    }
    return out;
}

// --- Permutation ----------------------------------------------------------

Permutation::Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t v : map_) {
        if (v >= map_.size() || seen[v]) {
            throw InvalidParameter("permutation mapping is not a bijection");
        }
        seen[v] = true;
    }
}

Permutation Permutation::identity(std::size_t size) {
    std::vector<std::size_t> m(size);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return Permutation(std::move(m));
}

Permutation Permutation::random(std::size_t size, RandomSource& rng) {
    std::vector<std::size_t> m(size);
    std::iota(m.begin(), m.end(), std::size_t{0});
    for (std::size_t i = size; i > 1; --i) {
        const std::size_t j = rng.uniform_below(std::uint64_t{i});
        std::swap(m[i - 1], m[j]);
    }
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) {
        inv[map_[i]] = i;
    }
    return Permutation(std::move(inv));
}

void throw_permutation_mismatch(std::size_t expected, std::size_t got) {
    throw DimensionMismatch("permutation of length " + std::to_string(expected) +
                            " applied to vector of length " + std::to_string(got));
}

// --- Construction ---------------------------------------------------------

Matrix rand_nonsingular(std::size_t dim, unsigned bitwidth, RandomSource& rng) {
    require_dims(dim, dim);
    if (bitwidth == 0) {
        throw InvalidParameter("rand_nonsingular: bitwidth must be at least 1");
    }
    for (;;) {
        std::vector<Integer> e(dim * dim);
        for (auto& v : e) {
            v = rng.uniform_signed(bitwidth);
        }
        Matrix m = Matrix::from_integers(dim, dim, std::move(e));
        if (nonsingular_modular(m)) {
            return m;
        }
    }
}

Matrix rand_unit_lower_triangular(std::size_t dim, unsigned bitwidth, RandomSource& rng) {
    require_dims(dim, dim);
    std::vector<Integer> e(dim * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            e[i * dim + j] = rng.uniform_signed(bitwidth);
        }
        e[i * dim + i] = 1;
    }
    return Matrix::from_integers(dim, dim, std::move(e));
}

Matrix diag_matrix(std::span<const Scalar> v) {
    if (v.empty()) {
        throw InvalidParameter("diag_matrix: empty diagonal");
    }
    const std::size_t d = v.size();
    std::vector<Scalar> e(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        e[i * d + i] = v[i];
    }
    return Matrix::from_scalars(d, d, e);
}

Matrix diag_matrix(std::span<const Integer> v) {
    if (v.empty()) {
        throw InvalidParameter("diag_matrix: empty diagonal");
    }
    const std::size_t d = v.size();
    std::vector<Integer> e(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        e[i * d + i] = v[i];
    }
    return Matrix::from_integers(d, d, std::move(e));
}

// --- Products -------------------------------------------------------------

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("mat_mul: " + dims(a) + " times " + dims(b));
    }
    if (a.cols() >= kMultimodularCutoff && max_entry_bits(a.numerators()) >= kMultimodularProductBits &&
        max_entry_bits(b.numerators()) >= kMultimodularProductBits) {
        return mat_mul_multimodular(a, b);
    }
    return mat_mul_classical(a, b);
}

Matrix mat_mul_classical(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("mat_mul: " + dims(a) + " times " + dims(b));
    }
    const std::size_t n = a.rows();
    const std::size_t inner = a.cols();
    const std::size_t m = b.cols();
    std::vector<Integer> out(n * m);
    const auto& an = a.numerators();
    const auto& bn = b.numerators();
    for (std::size_t i = 0; i < n; ++i) {
        Integer* row_out = &out[i * m];
        for (std::size_t k = 0; k < inner; ++k) {
            const Integer& aik = an[i * inner + k];
            if (sgn(aik) == 0) {
                continue;
            }
            const Integer* row_b = &bn[k * m];
            for (std::size_t j = 0; j < m; ++j) {
                mpz_addmul(row_out[j].get_mpz_t(), aik.get_mpz_t(), row_b[j].get_mpz_t());
            }
        }
    }
    return Matrix::from_parts(n, m, std::move(out), a.denominator() * b.denominator());
}

Matrix scale_columns(const Matrix& a, std::span<const Integer> d) {
    if (d.size() != a.cols()) {
        throw DimensionMismatch("scale_columns: " + dims(a) + " with diagonal of length " +
                                std::to_string(d.size()));
    }
    std::vector<Integer> out(a.numerators().begin(), a.numerators().end());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out[i * a.cols() + j] *= d[j];
        }
    }
    return Matrix::from_parts(a.rows(), a.cols(), std::move(out), a.denominator());
}

Matrix scale_rows(std::span<const Integer> d, const Matrix& a) {
    if (d.size() != a.rows()) {
        throw DimensionMismatch("scale_rows: diagonal of length " + std::to_string(d.size()) + " with " +
                                dims(a));
    }
    std::vector<Integer> out(a.numerators().begin(), a.numerators().end());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out[i * a.cols() + j] *= d[i];
        }
    }
    return Matrix::from_parts(a.rows(), a.cols(), std::move(out), a.denominator());
}

Scalar trace(const Matrix& m) {
    require_square(m, "trace");
    Integer sum = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        sum += m.numerator(i, i);
    }
    Scalar s(sum, m.denominator());
    s.canonicalize();
    return s;
}

CountedTrace trace_of_product_counted(const Matrix& a, const Matrix& b) {
    require_square(a, "trace_of_product");
    require_square(b, "trace_of_product");
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("trace_of_product: " + dims(a) + " and " + dims(b));
    }
    const std::size_t d = a.rows();
    const auto& an = a.numerators();
    const auto& bn = b.numerators();
    Integer sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            mpz_addmul(sum.get_mpz_t(), an[i * d + j].get_mpz_t(), bn[j * d + i].get_mpz_t());
            ++count;
        }
    }
    CountedTrace out{Scalar(sum, a.denominator() * b.denominator()), count};
    out.value.canonicalize();
    return out;
}

Scalar trace_of_product(const Matrix& a, const Matrix& b) {
    return trace_of_product_counted(a, b).value;
}

// --- Determinant and inverse ----------------------------------------------

namespace {

// Fraction-free forward elimination; returns det of the integer matrix.
Integer bareiss_determinant(std::vector<Integer> a, std::size_t d) {
    Integer prev = 1;
    bool negate = false;
    Integer tmp;
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t pivot = k;
        while (pivot < d && sgn(a[pivot * d + k]) == 0) {
            ++pivot;
        }
        if (pivot == d) {
            return 0;
        }
        if (pivot != k) {
            for (std::size_t j = k; j < d; ++j) {
                std::swap(a[pivot * d + j], a[k * d + j]);
            }
            negate = !negate;
        }
        const Integer& piv = a[k * d + k];
        for (std::size_t i = k + 1; i < d; ++i) {
            const Integer& aik = a[i * d + k];
            for (std::size_t j = k + 1; j < d; ++j) {
                Integer& aij = a[i * d + j];
                mpz_mul(tmp.get_mpz_t(), piv.get_mpz_t(), aij.get_mpz_t());
                mpz_submul(tmp.get_mpz_t(), aik.get_mpz_t(), a[k * d + j].get_mpz_t());
                mpz_divexact(aij.get_mpz_t(), tmp.get_mpz_t(), prev.get_mpz_t());
            }
        }
        prev = piv;
    }
    return negate ? Integer(-prev) : prev;
}

// Residues of an integer matrix in Montgomery form.
std::vector<detail::u64> reduce_mod(std::span<const Integer> num, const detail::MontgomeryField& f) {
    std::vector<detail::u64> out(num.size());
    const detail::u64 p = f.modulus();
    for (std::size_t i = 0; i < num.size(); ++i) {
        // mpz_fdiv_ui gives the non-negative residue.
        out[i] = f.to_mont(mpz_fdiv_ui(num[i].get_mpz_t(), p));
    }
    return out;
}

// log2 of prod_i max(1, ||row_i||_2): bounds every minor of the matrix.
double log2_hadamard_bound(std::span<const Integer> num, std::size_t d) {
    double total = 0.0;
    Integer sq;
    for (std::size_t i = 0; i < d; ++i) {
        sq = 0;
        for (std::size_t j = 0; j < d; ++j) {
            mpz_addmul(sq.get_mpz_t(), num[i * d + j].get_mpz_t(), num[i * d + j].get_mpz_t());
        }
        if (sgn(sq) == 0) {
            continue;
        }
        long exp = 0;
        const double mant = mpz_get_d_2exp(&exp, sq.get_mpz_t());
        const double log2_sq = std::log2(mant) + static_cast<double>(exp);
        total += std::max(0.0, 0.5 * log2_sq);
    }
    return total;
}

void throw_singular() { throw SingularMatrix("matrix is singular"); }

} // namespace

Scalar determinant(const Matrix& m) {
    require_square(m, "determinant");
    const std::size_t d = m.rows();
    Integer det = bareiss_determinant(std::vector<Integer>(m.numerators().begin(), m.numerators().end()), d);
    Integer den;
    mpz_pow_ui(den.get_mpz_t(), m.denominator().get_mpz_t(), d);
    Scalar s(det, den);
    s.canonicalize();
    return s;
}

bool nonsingular_modular(const Matrix& m) {
    require_square(m, "nonsingular_modular");
    const std::size_t d = m.rows();
    for (std::size_t t = 0; t < 3; ++t) {
        detail::MontgomeryField f(detail::nth_large_prime(t));
        auto residues = reduce_mod(m.numerators(), f);
        if (detail::determinant_in_place(f, residues, d) != 0) {
            return true;
        }
    }
    return false;
}

Matrix invert_bareiss(const Matrix& m) {
    require_square(m, "invert");
    const std::size_t d = m.rows();
    // Fraction-free Gauss-Jordan on [N | I]. Every intermediate entry is a
    // minor of the augmented matrix, so each division by the previous pivot is
    // exact. At the end the left block is delta*I and the right block is
    // delta*N^-1.
    std::vector<Integer> a(m.numerators().begin(), m.numerators().end());
    std::vector<Integer> b(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        b[i * d + i] = 1;
    }
    Integer prev = 1;
    Integer tmp;
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t pivot = k;
        while (pivot < d && sgn(a[pivot * d + k]) == 0) {
            ++pivot;
        }
        if (pivot == d) {
            throw_singular();
        }
        if (pivot != k) {
            for (std::size_t j = 0; j < d; ++j) {
                std::swap(a[pivot * d + j], a[k * d + j]);
                std::swap(b[pivot * d + j], b[k * d + j]);
            }
        }
        const Integer piv = a[k * d + k];
        for (std::size_t i = 0; i < d; ++i) {
            if (i == k) {
                continue;
            }
            const Integer aik = a[i * d + k];
            for (std::size_t j = 0; j < d; ++j) {
                if (j == k) {
                    continue;
                }
                Integer& aij = a[i * d + j];
                if (sgn(aij) == 0 && sgn(a[k * d + j]) == 0) {
                    continue;
                }
                mpz_mul(tmp.get_mpz_t(), piv.get_mpz_t(), aij.get_mpz_t());
                mpz_submul(tmp.get_mpz_t(), aik.get_mpz_t(), a[k * d + j].get_mpz_t());
                mpz_divexact(aij.get_mpz_t(), tmp.get_mpz_t(), prev.get_mpz_t());
            }
            for (std::size_t j = 0; j < d; ++j) {
                Integer& bij = b[i * d + j];
                if (sgn(bij) == 0 && sgn(b[k * d + j]) == 0) {
                    continue;
                }
                mpz_mul(tmp.get_mpz_t(), piv.get_mpz_t(), bij.get_mpz_t());
                mpz_submul(tmp.get_mpz_t(), aik.get_mpz_t(), b[k * d + j].get_mpz_t());
                mpz_divexact(bij.get_mpz_t(), tmp.get_mpz_t(), prev.get_mpz_t());
            }
            a[i * d + k] = 0;
        }
        prev = piv;
    }
    // M = N / D, so M^-1 = D * N^-1 = D * b / delta.
    for (auto& e : b) {
        e *= m.denominator();
    }
    return Matrix::from_parts(d, d, std::move(b), prev);
}

Matrix invert_multimodular(const Matrix& m) {
    require_square(m, "invert");
    const std::size_t d = m.rows();
    auto num = m.numerators();
    // Residues of det(N) and adj(N) are combined until the modulus exceeds
    // twice the Hadamard bound, then lifted to the symmetric range.
    const double needed_bits = log2_hadamard_bound(num, d) + 2.0 + 16.0;

    std::vector<Integer> adj(d * d);
    Integer det = 0;
    Integer modulus = 1;
    double modulus_bits = 0.0;
    std::size_t prime_index = 0;
    std::size_t singular_hits = 0;
    Integer tmp;
    while (modulus_bits < needed_bits) {
        const detail::u64 p = detail::nth_large_prime(prime_index++);
        detail::MontgomeryField f(p);
        auto res = reduce_mod(num, f);
        const detail::u64 det_mont = detail::invert_in_place(f, res, d);
        if (det_mont == 0) {
            // Either det(N) = 0 or p divides it; settle it exactly after a few hits.
            if (++singular_hits == 3 && bareiss_determinant(std::vector<Integer>(num.begin(), num.end()), d) == 0) {
                throw_singular();
            }
            continue;
        }
        // Garner step: x <- x + M * ((r - x) * M^-1 mod p).
        const detail::u64 m_mod = f.to_mont(mpz_fdiv_ui(modulus.get_mpz_t(), p));
        const detail::u64 m_inv = f.inv(m_mod);
        auto lift = [&](Integer& x, detail::u64 r_mont) {
            const detail::u64 x_mont = f.to_mont(mpz_fdiv_ui(x.get_mpz_t(), p));
            const detail::u64 t = f.from_mont(f.mul(f.sub(r_mont, x_mont), m_inv));
            mpz_addmul_ui(x.get_mpz_t(), modulus.get_mpz_t(), t);
        };
        lift(det, det_mont);
        for (std::size_t i = 0; i < d * d; ++i) {
            // adj = det * inverse (mod p)
            lift(adj[i], f.mul(det_mont, res[i]));
        }
        modulus *= p;
        modulus_bits += std::log2(static_cast<double>(p));
    }
    const Integer half = modulus / 2;
    auto symmetric = [&](Integer& x) {
        if (x > half) {
            x -= modulus;
        }
    };
    symmetric(det);
    if (det == 0) {
        throw_singular();
    }
    for (auto& e : adj) {
        symmetric(e);
        e *= m.denominator();
    }
    return Matrix::from_parts(d, d, std::move(adj), det);
}

Matrix mat_mul_multimodular(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("mat_mul: " + dims(a) + " times " + dims(b));
    }
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    const std::size_t m = b.cols();
    const auto an = a.numerators();
    const auto bn = b.numerators();
    // |c_ij| <= k * max|a| * max|b|; the modulus must exceed twice that.
    const double needed_bits = static_cast<double>(max_entry_bits(an) + max_entry_bits(bn)) +
                               std::log2(static_cast<double>(k)) + 2.0;
    std::vector<detail::u64> primes;
    double modulus_bits = 0.0;
    while (modulus_bits < needed_bits) {
        primes.push_back(detail::nth_product_prime(primes.size()));
        modulus_bits += std::log2(static_cast<double>(primes.back()));
    }
    const std::size_t count = primes.size();

    // residues[q] holds c mod primes[q].
    std::vector<std::vector<detail::u64>> residues(count);
    std::vector<detail::u64> ra(n * k);
    std::vector<detail::u64> rb(k * m);
    for (std::size_t q = 0; q < count; ++q) {
        const detail::u64 p = primes[q];
        for (std::size_t i = 0; i < an.size(); ++i) {
            ra[i] = mpz_fdiv_ui(an[i].get_mpz_t(), p);
        }
        for (std::size_t i = 0; i < bn.size(); ++i) {
            rb[i] = mpz_fdiv_ui(bn[i].get_mpz_t(), p);
        }
        detail::mul_mod(ra, rb, residues[q], n, k, m, p);
    }

    // x = sum_q ((r_q * w_q) mod p_q) * (M / p_q) mod M, w_q = (M / p_q)^-1 mod p_q.
    Integer modulus = 1;
    for (auto p : primes) {
        mpz_mul_ui(modulus.get_mpz_t(), modulus.get_mpz_t(), p);
    }
    std::vector<Integer> cofactor(count);
    std::vector<detail::u64> weight(count);
    for (std::size_t q = 0; q < count; ++q) {
        mpz_divexact_ui(cofactor[q].get_mpz_t(), modulus.get_mpz_t(), primes[q]);
        Integer inv;
        const Integer pq(static_cast<unsigned long>(primes[q]));
        Integer residue = cofactor[q] % pq;
        mpz_invert(inv.get_mpz_t(), residue.get_mpz_t(), pq.get_mpz_t());
        weight[q] = inv.get_ui();
    }
    const Integer half = modulus / 2;
    std::vector<Integer> out(n * m);
    for (std::size_t e = 0; e < n * m; ++e) {
        Integer& x = out[e];
        for (std::size_t q = 0; q < count; ++q) {
            const auto t = static_cast<detail::u64>(static_cast<detail::u128>(residues[q][e]) * weight[q] % primes[q]);
            mpz_addmul_ui(x.get_mpz_t(), cofactor[q].get_mpz_t(), t);
        }
        mpz_mod(x.get_mpz_t(), x.get_mpz_t(), modulus.get_mpz_t());
        if (x > half) {
            x -= modulus;
        }
    }
    return Matrix::from_parts(n, m, std::move(out), a.denominator() * b.denominator());
}

Matrix invert(const Matrix& m) {
    require_square(m, "invert");
    if (m.rows() < kMultimodularCutoff) {
        return invert_bareiss(m);
    }
    return invert_multimodular(m);
}

} // namespace tpe::exact
