#ifndef TPE_EXACT_HPP
#define TPE_EXACT_HPP

// Dense linear algebra over exact rationals.
//
// A Matrix is stored as an integer numerator matrix over one shared positive
// denominator, kept in canonical form: the gcd of the denominator and every
// numerator is 1 (so the zero matrix has denominator 1). Individual entries
// are exposed as reduced rationals. The shared denominator keeps products of
// inverses cheap: M^-1 is adj(M)/det(M), and a product of such matrices never
// needs per-entry gcds.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "tpe/random.hpp"

namespace tpe::exact {

using Integer = mpz_class;
// Always canonical: denominator > 0 and gcd(|num|, den) = 1.
using Scalar = mpq_class;

class Matrix {
public:
    // rows x cols zero matrix; both dimensions must be >= 1.
    Matrix(std::size_t rows, std::size_t cols);

    static Matrix identity(std::size_t dim);
    static Matrix from_integers(std::size_t rows, std::size_t cols, std::vector<Integer> entries);
    static Matrix from_scalars(std::size_t rows, std::size_t cols, std::span<const Scalar> entries);
    // numerators / denominator, normalized; denominator must be non-zero.
    static Matrix from_parts(std::size_t rows, std::size_t cols, std::vector<Integer> numerators,
                             Integer denominator);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    bool is_integral() const { return denominator_ == 1; }

    Scalar at(std::size_t r, std::size_t c) const;
    const Integer& numerator(std::size_t r, std::size_t c) const { return num_[r * cols_ + c]; }
    const Integer& denominator() const { return denominator_; }
    std::span<const Integer> numerators() const { return num_; }

    // Entries in row-major order as reduced rationals.
    std::vector<Scalar> entries() const;

    friend bool operator==(const Matrix& a, const Matrix& b) = default;

private:
    Matrix(std::size_t rows, std::size_t cols, std::vector<Integer> numerators, Integer denominator);
    void normalize();

    std::size_t rows_;
    std::size_t cols_;
    std::vector<Integer> num_;
    Integer denominator_{1};
};

// A bijection on {0, ..., size-1}. Applying it to v gives out[i] = v[map[i]].
class Permutation {
public:
    explicit Permutation(std::vector<std::size_t> mapping);

    static Permutation identity(std::size_t size);
    // Uniform over all size! permutations (Fisher-Yates).
    static Permutation random(std::size_t size, RandomSource& rng);

    std::size_t size() const { return map_.size(); }
    const std::vector<std::size_t>& mapping() const { return map_; }
    Permutation inverse() const;

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> map_;
};

// out[i] = v[p.mapping()[i]]. Throws DimensionMismatch on a length mismatch.
template <typename T>
std::vector<T> apply_permutation(const Permutation& p, std::span<const T> v);

// Random dim x dim matrix, integer entries uniform in [-2^bitwidth, 2^bitwidth],
// redrawn until its determinant is non-zero.
Matrix rand_nonsingular(std::size_t dim, unsigned bitwidth, RandomSource& rng);

// Unit diagonal, zero above, uniform [-2^bitwidth, 2^bitwidth] below.
Matrix rand_unit_lower_triangular(std::size_t dim, unsigned bitwidth, RandomSource& rng);

Matrix diag_matrix(std::span<const Scalar> v);
Matrix diag_matrix(std::span<const Integer> v);

// Exact product. Long entries in both operands take the multi-modular route.
Matrix mat_mul(const Matrix& a, const Matrix& b);

// The two product routes, exposed for cross-checking.
Matrix mat_mul_classical(const Matrix& a, const Matrix& b);
Matrix mat_mul_multimodular(const Matrix& a, const Matrix& b);

// a * diag(d) and diag(d) * a without forming the diagonal matrix.
Matrix scale_columns(const Matrix& a, std::span<const Integer> d);
Matrix scale_rows(std::span<const Integer> d, const Matrix& a);

Scalar trace(const Matrix& m);

// sum_{i,j} a[i][j] * b[j][i]; never forms a*b.
Scalar trace_of_product(const Matrix& a, const Matrix& b);

struct CountedTrace {
    Scalar value;
    std::size_t multiplications = 0;
};
// Same as trace_of_product, also reporting the number of scalar products.
CountedTrace trace_of_product_counted(const Matrix& a, const Matrix& b);

// Exact inverse. Uses fraction-free Gauss-Jordan for small matrices and a
// multi-modular reconstruction for large ones. Throws SingularMatrix.
Matrix invert(const Matrix& m);

// The two inversion routes, exposed for cross-checking.
Matrix invert_bareiss(const Matrix& m);
Matrix invert_multimodular(const Matrix& m);

// Exact determinant by fraction-free elimination.
Scalar determinant(const Matrix& m);

// True proves det(m) != 0 (non-zero modulo a prime). False means the
// determinant vanished modulo several large primes; callers treat that as
// singular.
bool nonsingular_modular(const Matrix& m);

// Dimension at which invert() switches to the multi-modular route.
inline constexpr std::size_t kMultimodularCutoff = 16;
// mat_mul() goes multi-modular when the inner dimension reaches
// kMultimodularCutoff and both operands have entries of at least this many bits.
inline constexpr std::size_t kMultimodularProductBits = 512;

void throw_permutation_mismatch(std::size_t expected, std::size_t got);

template <typename T>
std::vector<T> apply_permutation(const Permutation& p, std::span<const T> v) {
    if (v.size() != p.size()) {
        throw_permutation_mismatch(p.size(), v.size());
    }
    std::vector<T> out;
    out.reserve(v.size());
    for (std::size_t src : p.mapping()) {
        out.push_back(v[src]);
    }
    return out;
}

} // namespace tpe::exact

#endif // TPE_EXACT_HPP
