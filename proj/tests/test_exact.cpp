#include <algorithm>
#include <chrono>
#include <tuple>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tpe/error.hpp"
#include "tpe/exact.hpp"
#include "tpe/serialize.hpp"

using namespace tpe;
using namespace tpe::exact;

namespace {

Matrix random_integer_matrix(std::size_t rows, std::size_t cols, unsigned bits, RandomSource& rng) {
    std::vector<Integer> e(rows * cols);
    for (auto& v : e) {
        v = rng.uniform_signed(bits);
    }
    return Matrix::from_integers(rows, cols, std::move(e));
}

} // namespace

TEST(RandNonsingular, OneByOneIsNonzero) {
    auto rng = RandomSource::from_seed(1);
    for (unsigned bits : {1u, 8u, 32u}) {
        auto m = rand_nonsingular(1, bits, rng);
        ASSERT_EQ(m.rows(), 1u);
        EXPECT_NE(m.at(0, 0), 0);
    }
}

TEST(RandNonsingular, DeterminantNonzeroByIndependentElimination) {
    auto rng = RandomSource::from_seed(2);
    auto m = rand_nonsingular(4, 16, rng);
    EXPECT_NE(oracle::det(oracle::dense(m)), 0);
    EXPECT_EQ(determinant(m), oracle::det(oracle::dense(m)));
}

TEST(RandNonsingular, EntriesWithinRange) {
    auto rng = RandomSource::from_seed(3);
    auto m = rand_nonsingular(10, 8, rng);
    ASSERT_TRUE(m.is_integral());
    for (const auto& e : m.numerators()) {
        EXPECT_LE(abs(e), 256);
    }
}

TEST(Invert, Identity) {
    EXPECT_EQ(invert(Matrix::identity(3)), Matrix::identity(3));
}

TEST(Invert, Diagonal) {
    auto m = Matrix::from_integers(2, 2, {2, 0, 0, 4});
    auto inv = invert(m);
    EXPECT_EQ(inv.at(0, 0), Scalar(1, 2));
    EXPECT_EQ(inv.at(1, 1), Scalar(1, 4));
    EXPECT_EQ(inv.at(0, 1), 0);
    EXPECT_EQ(inv.at(1, 0), 0);
}

TEST(Invert, RandomEightByEightAgainstNaiveProduct) {
    auto rng = RandomSource::from_seed(4);
    auto m = rand_nonsingular(8, 32, rng);
    auto inv = invert(m);
    EXPECT_TRUE(oracle::is_identity(oracle::mul(oracle::dense(m), oracle::dense(inv))));
    EXPECT_TRUE(oracle::is_identity(oracle::mul(oracle::dense(inv), oracle::dense(m))));
}

TEST(Invert, SingularThrows) {
    auto m = Matrix::from_integers(3, 3, {1, 2, 3, 2, 4, 6, 0, 1, 1});
    EXPECT_THROW(invert(m), SingularMatrix);
    EXPECT_THROW(invert_bareiss(m), SingularMatrix);
    EXPECT_THROW(invert_multimodular(m), SingularMatrix);
}

TEST(Invert, NonSquareThrows) {
    EXPECT_THROW(invert(Matrix(2, 3)), DimensionMismatch);
}

TEST(Invert, RationalInput) {
    const std::vector<Scalar> e = {Scalar(1, 2), Scalar(1, 3), Scalar(-2, 5), Scalar(7, 1)};
    auto m = Matrix::from_scalars(2, 2, e);
    EXPECT_EQ(mat_mul(m, invert(m)), Matrix::identity(2));
}

// Property: both inversion routes give the exact inverse and agree, up to
// dimension 64.
TEST(InvertProperty, ExactUpToDim64) {
    auto rng = RandomSource::from_seed(5);
    for (std::size_t dim : {2u, 3u, 7u, 15u, 16u, 17u, 33u, 64u}) {
        auto m = rand_nonsingular(dim, 16, rng);
        auto inv = invert(m);
        EXPECT_EQ(mat_mul(m, inv), Matrix::identity(dim)) << "dim " << dim;
        if (dim <= 33) {
            EXPECT_EQ(invert_bareiss(m), invert_multimodular(m)) << "dim " << dim;
        }
    }
}

TEST(RandUnitLowerTriangular, OneByOne) {
    auto rng = RandomSource::from_seed(6);
    EXPECT_EQ(rand_unit_lower_triangular(1, 32, rng), Matrix::identity(1));
}

TEST(RandUnitLowerTriangular, Structure) {
    auto rng = RandomSource::from_seed(7);
    auto s = rand_unit_lower_triangular(3, 32, rng);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(s.at(i, i), 1);
        for (std::size_t j = i + 1; j < 3; ++j) {
            EXPECT_EQ(s.at(i, j), 0);
        }
    }
}

TEST(RandUnitLowerTriangular, ProductKeepsUnitDiagonal) {
    auto rng = RandomSource::from_seed(8);
    auto a = rand_unit_lower_triangular(5, 32, rng);
    auto b = rand_unit_lower_triangular(5, 32, rng);
    auto p = oracle::mul(oracle::dense(a), oracle::dense(b));
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(p[i][i], 1);
    }
    EXPECT_EQ(oracle::dense(mat_mul(a, b)), p);
}

TEST(MatMul, IdentityLaw) {
    auto rng = RandomSource::from_seed(9);
    auto m = random_integer_matrix(4, 4, 20, rng);
    EXPECT_EQ(mat_mul(Matrix::identity(4), m), m);
    EXPECT_EQ(mat_mul(m, Matrix::identity(4)), m);
}

TEST(MatMul, InverseLaw) {
    auto rng = RandomSource::from_seed(10);
    auto m = rand_nonsingular(6, 32, rng);
    EXPECT_EQ(mat_mul(m, invert(m)), Matrix::identity(6));
}

TEST(MatMul, ColumnSwap) {
    auto a = Matrix::from_integers(2, 2, {1, 2, 3, 4});
    auto swap = Matrix::from_integers(2, 2, {0, 1, 1, 0});
    EXPECT_EQ(mat_mul(a, swap), Matrix::from_integers(2, 2, {2, 1, 4, 3}));
}

TEST(MatMul, DimensionMismatch) {
    EXPECT_THROW(mat_mul(Matrix(2, 3), Matrix(2, 3)), DimensionMismatch);
}

TEST(MatMul, RectangularAgainstOracle) {
    auto rng = RandomSource::from_seed(11);
    auto a = random_integer_matrix(3, 5, 40, rng);
    auto b = invert(rand_nonsingular(5, 8, rng));
    EXPECT_EQ(oracle::dense(mat_mul(a, b)), oracle::mul(oracle::dense(a), oracle::dense(b)));
}

TEST(MatMulRoutes, MultimodularAgreesWithClassical) {
    auto rng = RandomSource::from_seed(12);
    for (auto [n, k, m, bits] : {std::tuple{1, 1, 1, 8}, {3, 5, 2, 64}, {7, 16, 9, 600}, {20, 33, 17, 1200}}) {
        auto a = random_integer_matrix(n, k, bits, rng);
        auto b = random_integer_matrix(k, m, bits + 17, rng);
        EXPECT_EQ(mat_mul_multimodular(a, b), mat_mul_classical(a, b)) << n << "x" << k << "x" << m;
    }
}

TEST(MatMulRoutes, RationalOperandsAgree) {
    auto rng = RandomSource::from_seed(13);
    auto a = invert(rand_nonsingular(18, 32, rng));
    auto b = invert(rand_nonsingular(18, 32, rng));
    EXPECT_EQ(mat_mul_multimodular(a, b), mat_mul_classical(a, b));
    EXPECT_EQ(oracle::dense(mat_mul_multimodular(a, b)), oracle::mul(oracle::dense(a), oracle::dense(b)));
}

TEST(MatMulRoutes, ExtremeEntriesAgree) {
    // All entries at +-(2^b - 1) push the product to its worst-case bound.
    const Integer big = (Integer(1) << 700) - 1;
    std::vector<Integer> ea(16 * 16, big);
    std::vector<Integer> eb(16 * 16, -big);
    ea[5] = -big;
    auto a = Matrix::from_integers(16, 16, std::move(ea));
    auto b = Matrix::from_integers(16, 16, std::move(eb));
    EXPECT_EQ(mat_mul_multimodular(a, b), mat_mul_classical(a, b));
    EXPECT_EQ(mat_mul(a, b), mat_mul_classical(a, b));
}

TEST(TraceOfProduct, IdentityFactor) {
    auto rng = RandomSource::from_seed(12);
    auto m = random_integer_matrix(5, 5, 30, rng);
    EXPECT_EQ(trace_of_product(Matrix::identity(5), m), trace(m));
}

TEST(TraceOfProduct, MatchesFullProduct) {
    auto rng = RandomSource::from_seed(13);
    auto a = random_integer_matrix(6, 6, 30, rng);
    auto b = invert(rand_nonsingular(6, 30, rng));
    EXPECT_EQ(trace_of_product(a, b), oracle::trace(oracle::mul(oracle::dense(a), oracle::dense(b))));
}

TEST(TraceOfProduct, SimilarityInvariance) {
    auto rng = RandomSource::from_seed(14);
    auto m = rand_nonsingular(7, 32, rng);
    auto a = random_integer_matrix(7, 7, 32, rng);
    EXPECT_EQ(trace_of_product(m, mat_mul(a, invert(m))), trace(a));
}

TEST(TraceOfProduct, DimensionMismatch) {
    EXPECT_THROW(trace_of_product(Matrix(3, 3), Matrix(4, 4)), DimensionMismatch);
    EXPECT_THROW(trace_of_product(Matrix(2, 3), Matrix(3, 2)), DimensionMismatch);
}

TEST(TraceOfProduct, CountsExactlyDSquared) {
    auto rng = RandomSource::from_seed(15);
    for (std::size_t d : {1u, 4u, 9u, 20u}) {
        auto a = random_integer_matrix(d, d, 10, rng);
        auto b = random_integer_matrix(d, d, 10, rng);
        auto counted = trace_of_product_counted(a, b);
        EXPECT_EQ(counted.multiplications, d * d);
        EXPECT_EQ(counted.value, trace_of_product(a, b));
    }
}

// Property: the pairwise sum over d^2 products, not a cubic product, so the
// time grows by at most 5x when d doubles.
TEST(TraceOfProduct, QuadraticTimeTrend) {
    auto rng = RandomSource::from_seed(16);
    auto time_at = [&](std::size_t d) {
        auto a = random_integer_matrix(d, d, 64, rng);
        auto b = random_integer_matrix(d, d, 64, rng);
        std::vector<double> times;
        for (int i = 0; i < 7; ++i) {
            auto start = std::chrono::steady_clock::now();
            auto v = trace_of_product(a, b);
            auto stop = std::chrono::steady_clock::now();
            (void)v;
            times.push_back(std::chrono::duration<double>(stop - start).count());
        }
        std::nth_element(times.begin(), times.begin() + 3, times.end());
        return times[3];
    };
    const double t1 = time_at(200);
    const double t2 = time_at(400);
    EXPECT_LE(t2 / t1, 5.0) << "t(200)=" << t1 << " t(400)=" << t2;
}

TEST(ApplyPermutation, Identity) {
    std::vector<Scalar> v = {1, 2, 3};
    EXPECT_EQ(apply_permutation(Permutation::identity(3), std::span<const Scalar>(v)), v);
}

TEST(ApplyPermutation, Definitional) {
    std::vector<Scalar> v = {10, 20, 30};
    auto out = apply_permutation(Permutation({2, 0, 1}), std::span<const Scalar>(v));
    EXPECT_EQ(out, (std::vector<Scalar>{30, 10, 20}));
}

TEST(ApplyPermutation, RoundTrip) {
    auto rng = RandomSource::from_seed(17);
    auto p = Permutation::random(10, rng);
    std::vector<Scalar> v;
    for (int i = 0; i < 10; ++i) {
        v.emplace_back(Integer(rng.uniform_signed(20)), Integer(rng.uniform_positive(10)));
        v.back().canonicalize();
    }
    auto there = apply_permutation(p, std::span<const Scalar>(v));
    auto back = apply_permutation(p.inverse(), std::span<const Scalar>(there));
    EXPECT_EQ(back, v);
}

TEST(ApplyPermutation, LengthMismatch) {
    std::vector<Scalar> v = {1, 2};
    EXPECT_THROW(apply_permutation(Permutation::identity(3), std::span<const Scalar>(v)), DimensionMismatch);
}

TEST(Permutation, RejectsNonBijection) {
    EXPECT_THROW(Permutation({0, 0, 1}), InvalidParameter);
    EXPECT_THROW(Permutation({0, 3, 1}), InvalidParameter);
}

TEST(Permutation, RandomIsBijection) {
    auto rng = RandomSource::from_seed(18);
    auto p = Permutation::random(50, rng);
    auto sorted = p.mapping();
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        EXPECT_EQ(sorted[i], i);
    }
}

TEST(DiagMatrix, Single) {
    std::vector<Scalar> v = {1};
    EXPECT_EQ(diag_matrix(std::span<const Scalar>(v)), Matrix::identity(1));
}

TEST(DiagMatrix, ZeroVector) {
    std::vector<Scalar> v = {0, 0};
    auto m = diag_matrix(std::span<const Scalar>(v));
    EXPECT_EQ(m, Matrix(2, 2));
}

TEST(DiagMatrix, TraceOfDiagonalProductIsDot) {
    auto rng = RandomSource::from_seed(19);
    std::vector<Integer> u(7), v(7);
    Integer dot = 0;
    for (int i = 0; i < 7; ++i) {
        u[i] = rng.uniform_signed(30);
        v[i] = rng.uniform_signed(30);
        dot += u[i] * v[i];
    }
    auto du = diag_matrix(std::span<const Integer>(u));
    auto dv = diag_matrix(std::span<const Integer>(v));
    EXPECT_EQ(trace(mat_mul(du, dv)), Scalar(dot));
}

// Property: Tr(M A M^-1) = Tr(A) for 200 random pairs, dims 2 to 32.
TEST(SimilarityProperty, SimilarityTraceInvariance) {
    auto rng = RandomSource::from_seed(20);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 2 + rng.uniform_below(31);
        auto m = rand_nonsingular(d, 8, rng);
        auto a = random_integer_matrix(d, d, 16, rng);
        auto sim = mat_mul(mat_mul(m, a), invert(m));
        ASSERT_EQ(trace(sim), trace(a)) << "trial " << trial << " d=" << d;
    }
}

// Property: unit lower triangular S keeps the diagonal of a diagonal X.
TEST(DiagonalPreservation, BothSides) {
    auto rng = RandomSource::from_seed(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + rng.uniform_below(12);
        auto s = rand_unit_lower_triangular(d, 32, rng);
        std::vector<Integer> x(d);
        for (auto& e : x) {
            e = rng.uniform_signed(32);
        }
        auto dx = diag_matrix(std::span<const Integer>(x));
        auto sx = mat_mul(s, dx);
        auto xs = mat_mul(dx, s);
        for (std::size_t i = 0; i < d; ++i) {
            EXPECT_EQ(sx.at(i, i), Scalar(x[i]));
            EXPECT_EQ(xs.at(i, i), Scalar(x[i]));
        }
    }
}

TEST(ScaleColumns, MatchesDiagonalProduct) {
    auto rng = RandomSource::from_seed(22);
    auto a = invert(rand_nonsingular(5, 16, rng));
    std::vector<Integer> d(5);
    for (auto& e : d) {
        e = rng.uniform_signed(20);
    }
    auto dm = diag_matrix(std::span<const Integer>(d));
    EXPECT_EQ(scale_columns(a, d), mat_mul(a, dm));
    EXPECT_EQ(scale_rows(d, a), mat_mul(dm, a));
}

TEST(MatrixInvariants, CanonicalSharedDenominator) {
    auto m = Matrix::from_parts(1, 2, {4, -6}, -8);
    EXPECT_EQ(m.denominator(), 4);
    EXPECT_EQ(m.at(0, 0), Scalar(-1, 2));
    EXPECT_EQ(m.at(0, 1), Scalar(3, 4));
    EXPECT_EQ(Matrix::from_parts(2, 2, {0, 0, 0, 0}, 7).denominator(), 1);
    EXPECT_THROW(Matrix(0, 3), InvalidParameter);
}

TEST(MatrixSerialization, RoundTripAndLayout) {
    const std::vector<Scalar> e = {Scalar(-1, 2), Scalar(3, 1)};
    auto m = Matrix::from_scalars(1, 2, e);
    auto bytes = serialize_matrix(m);
    const Bytes expected = {'T', 'P', 'E', 'M', 1, 0, 0, 0, 1, 0, 0, 0, 2,
                            0, 0, 0, 1, 0xFF, 0, 0, 0, 1, 2,   // -1 / 2
                            0, 0, 0, 1, 3, 0, 0, 0, 1, 1};     //  3 / 1
    EXPECT_EQ(bytes, expected);
    EXPECT_EQ(deserialize_matrix(bytes), m);
}

TEST(MatrixSerialization, RejectsTruncation) {
    auto rng = RandomSource::from_seed(23);
    auto bytes = serialize_matrix(invert(rand_nonsingular(3, 8, rng)));
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{13}, bytes.size() - 1}) {
        Bytes shorter(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        EXPECT_THROW(deserialize_matrix(shorter), FormatError) << "cut " << cut;
    }
}
