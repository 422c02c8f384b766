#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tpe/error.hpp"
#include "tpe/instrumented.hpp"
#include "tpe/metric.hpp"

using namespace tpe;
using instrumented::dot;

namespace {

Template random_template(std::size_t n, RandomSource& rng) {
    Template v(n);
    for (auto& e : v) {
        e = static_cast<std::int64_t>(rng.uniform_below(513)) - 256;
    }
    return v;
}

Template random_bits(std::size_t n, RandomSource& rng) {
    Template v(n);
    for (auto& e : v) {
        e = static_cast<std::int64_t>(rng.uniform_below(2));
    }
    return v;
}

// Independent squared distance and bit count.
mpz_class euclid2(const Template& x, const Template& y) {
    mpz_class s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const mpz_class d = mpz_class(static_cast<long>(x[i])) - static_cast<long>(y[i]);
        s += d * d;
    }
    return s;
}

long bit_distance(const Template& x, const Template& y) {
    long d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d += x[i] != y[i];
    }
    return d;
}

Integer extended_dot(const ExtensionPlan& plan, const Template& x, const Template& y, const Integer& beta,
                     const Integer& alpha, const Integer& rx, const Integer& ry) {
    return dot(plan.registered_extend(x, beta, rx), plan.query_extend(y, alpha, ry));
}

bool round_trip(MetricKind metric, const Template& x, const Template& y, std::int64_t theta, RandomSource& rng) {
    auto params = setup(x.size(), theta, metric, 16, 16);
    auto sk = keygen(params, rng);
    auto plan = plan_for(params);
    auto c = encrypt(sk, x, plan, rng);
    auto t = token_gen(sk, y, plan, rng);
    return decrypt(c, t, plan.accept_when()).accept;
}

} // namespace

TEST(InnerPlan, ZeroTemplate) {
    auto plan = plan_inner_product(7);
    EXPECT_EQ(extended_dot(plan, {0, 0, 0}, {4, -1, 9}, 3, 5, 11, -13), Integer(-3 * 5 * 7));
}

TEST(InnerPlan, HandExpansion) {
    auto plan = plan_inner_product(4);
    // (2, 3, -4, 0, 0) . (1, 1, 1, 0, 0) = 2 + 3 - 4
    EXPECT_EQ(extended_dot(plan, {2, 3}, {1, 1}, 1, 1, 0, 0), Integer(1));
}

TEST(InnerPlan, PermutationInvariance) {
    auto rng = RandomSource::from_seed(1);
    auto plan = plan_inner_product(-20);
    auto xp = plan.registered_extend(Template{5, -6, 7}, 9, 4);
    auto yp = plan.query_extend(Template{1, 2, 3}, 8, -2);
    auto perm = exact::Permutation::random(xp.size(), rng);
    auto px = exact::apply_permutation(perm, std::span<const Integer>(xp));
    auto py = exact::apply_permutation(perm, std::span<const Integer>(yp));
    EXPECT_EQ(dot(px, py), dot(xp, yp));
}

TEST(InnerPlan, Shape) {
    auto plan = plan_inner_product(6);
    EXPECT_EQ(plan.extra_slots(), 3u);
    EXPECT_EQ(plan.accept_when(), AcceptWhen::NonPositive);
    EXPECT_EQ(plan.registered_extend(Template{1, 2}, 3, 5), (std::vector<Integer>{3, 6, -18, 5, 0}));
}

TEST(EuclidPlan, Shape) {
    auto plan = plan_euclidean(5);
    EXPECT_EQ(plan.extra_slots(), 5u);
    EXPECT_EQ(plan.accept_when(), AcceptWhen::NonNegative);
    EXPECT_EQ(plan.registered_extend(Template{1, 2}, 3, 7), (std::vector<Integer>{6, 12, -15, 3, 75, 7, 0}));
    EXPECT_EQ(plan.query_extend(Template{1, 2}, 4, -9), (std::vector<Integer>{4, 8, 4, -20, 4, 0, -9}));
    EXPECT_THROW(plan_euclidean(-1), InvalidParameter);
}

TEST(EuclidPlan, SelfMatch) {
    auto rng = RandomSource::from_seed(2);
    EXPECT_TRUE(round_trip(MetricKind::EuclideanSquared, {10, -20, 30}, {10, -20, 30}, 0, rng));
}

TEST(EuclidPlan, Boundary) {
    auto rng = RandomSource::from_seed(3);
    EXPECT_EQ(oracle_euclid2(Template{0, 0}, Template{3, 4}), 25);
    EXPECT_EQ(extended_dot(plan_euclidean(5), {0, 0}, {3, 4}, 17, 19, 3, 4), 0);
    EXPECT_TRUE(round_trip(MetricKind::EuclideanSquared, {0, 0}, {3, 4}, 5, rng));
    EXPECT_FALSE(round_trip(MetricKind::EuclideanSquared, {0, 0}, {3, 4}, 4, rng));
}

TEST(HammingPlan, Shape) {
    auto plan = plan_hamming(3, 4);
    EXPECT_EQ(plan.extra_slots(), 3u);
    EXPECT_EQ(plan.accept_when(), AcceptWhen::NonNegative);
    // 0 maps to -1; slot n holds beta (2 theta - n).
    EXPECT_EQ(plan.registered_extend(Template{1, 0, 0, 1}, 2, 5), (std::vector<Integer>{2, -2, -2, 2, 4, 5, 0}));
    EXPECT_EQ(plan.query_extend(Template{0, 1, 1, 1}, 3, 6), (std::vector<Integer>{-3, 3, 3, 3, 3, 0, 6}));
}

TEST(HammingPlan, SelfMatchComplementAndBoundary) {
    auto rng = RandomSource::from_seed(4);
    const Template x = {1, 0, 1, 1, 0, 0, 1, 0};
    Template complement = x;
    for (auto& b : complement) {
        b = 1 - b;
    }
    Template three_off = x;
    three_off[0] ^= 1;
    three_off[4] ^= 1;
    three_off[7] ^= 1;
    EXPECT_TRUE(round_trip(MetricKind::Hamming, x, x, 0, rng));
    EXPECT_FALSE(round_trip(MetricKind::Hamming, x, complement, 3, rng));
    EXPECT_TRUE(round_trip(MetricKind::Hamming, x, three_off, 3, rng));
    EXPECT_FALSE(round_trip(MetricKind::Hamming, x, three_off, 2, rng));
}

TEST(HammingPlan, NotBinary) {
    auto plan = plan_hamming(2, 3);
    EXPECT_THROW(plan.registered_extend(Template{0, 2, 1}, 1, 0), NotBinary);
    EXPECT_THROW(plan.query_extend(Template{-1, 0, 1}, 1, 0), NotBinary);
    EXPECT_THROW(oracle_hamming(Template{0, 1}, Template{0, 3}), NotBinary);
}

TEST(Oracles, SpecExamples) {
    EXPECT_EQ(oracle_inner(Template{0, 0, 0}, Template{5, 6, 7}), 0);
    EXPECT_EQ(oracle_euclid2(Template{0, 0}, Template{3, 4}), 25);
    EXPECT_EQ(oracle_hamming(Template{0, 1, 0, 1}, Template{0, 1, 1, 0}), 2);
    EXPECT_THROW(oracle_inner(Template{1, 2}, Template{1}), DimensionMismatch);
}

TEST(Oracles, AgreeWithIndependentComputation) {
    auto rng = RandomSource::from_seed(5);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + rng.uniform_below(40);
        auto x = random_template(n, rng);
        auto y = random_template(n, rng);
        ASSERT_EQ(oracle_inner(x, y), oracle::dot(x, y));
        ASSERT_EQ(oracle_euclid2(x, y), euclid2(x, y));
        auto bx = random_bits(n, rng);
        auto by = random_bits(n, rng);
        ASSERT_EQ(oracle_hamming(bx, by), bit_distance(bx, by));
    }
}

// Property: the three embedding identities on 1000 instances each.
TEST(EmbeddingProperty, ExactIdentities) {
    auto rng = RandomSource::from_seed(6);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng.uniform_below(64);
        const Integer beta = rng.uniform_positive(32);
        const Integer alpha = rng.uniform_positive(32);
        const Integer rx = rng.uniform_signed(32);
        const Integer ry = rng.uniform_signed(32);
        auto x = random_template(n, rng);
        auto y = random_template(n, rng);
        const auto theta = static_cast<std::int64_t>(rng.uniform_below(200001)) - 100000;
        ASSERT_EQ(extended_dot(plan_inner_product(theta), x, y, beta, alpha, rx, ry),
                  alpha * beta * (oracle::dot(x, y) - theta));
        const auto dist = static_cast<std::int64_t>(rng.uniform_below(3000));
        ASSERT_EQ(extended_dot(plan_euclidean(dist), x, y, beta, alpha, rx, ry),
                  alpha * beta * (mpz_class(dist) * dist - euclid2(x, y)));
        auto bx = random_bits(n, rng);
        auto by = random_bits(n, rng);
        const auto h = static_cast<std::int64_t>(rng.uniform_below(n + 1));
        ASSERT_EQ(extended_dot(plan_hamming(h, n), bx, by, beta, alpha, rx, ry),
                  2 * alpha * beta * (h - bit_distance(bx, by)));
    }
}

// Property: where x' carries r_x, y' is zero, and vice versa.
TEST(SlotAlignmentProperty, MasksMeetZeros) {
    auto rng = RandomSource::from_seed(7);
    const std::size_t n = 6;
    auto x = random_bits(n, rng);
    auto y = random_bits(n, rng);
    for (const auto& plan : {plan_inner_product(3), plan_euclidean(3), plan_hamming(3, n)}) {
        const Integer rx = 1234567;
        const Integer ry = 7654321;
        auto xa = plan.registered_extend(x, 5, rx);
        auto xb = plan.registered_extend(x, 5, rx + 1);
        auto ya = plan.query_extend(y, 7, ry);
        auto yb = plan.query_extend(y, 7, ry + 1);
        ASSERT_EQ(xa.size(), n + plan.extra_slots());
        ASSERT_EQ(ya.size(), n + plan.extra_slots());
        int x_mask_slots = 0;
        int y_mask_slots = 0;
        for (std::size_t i = 0; i < xa.size(); ++i) {
            if (xa[i] != xb[i]) {
                ++x_mask_slots;
                EXPECT_EQ(ya[i], 0) << plan.name() << " slot " << i;
            }
            if (ya[i] != yb[i]) {
                ++y_mask_slots;
                EXPECT_EQ(xa[i], 0) << plan.name() << " slot " << i;
            }
        }
        EXPECT_EQ(x_mask_slots, 1) << plan.name();
        EXPECT_EQ(y_mask_slots, 1) << plan.name();
    }
}

// Property: full round trips equal oracle decisions for each metric, n in
// {2, 8, 32}.
TEST(EndToEndProperty, AllMetrics) {
    auto rng = RandomSource::from_seed(8);
    for (std::size_t n : {2u, 8u, 32u}) {
        const int keys = n == 32 ? 2 : 4;
        const int per_key = n == 32 ? 20 : 15;
        for (MetricKind metric : {MetricKind::InnerProduct, MetricKind::EuclideanSquared, MetricKind::Hamming}) {
            for (int k = 0; k < keys; ++k) {
                const bool binary = metric == MetricKind::Hamming;
                std::int64_t theta = 0;
                switch (metric) {
                case MetricKind::InnerProduct:
                    theta = static_cast<std::int64_t>(rng.uniform_below(100001)) - 50000;
                    break;
                case MetricKind::EuclideanSquared:
                    theta = static_cast<std::int64_t>(rng.uniform_below(300 * static_cast<std::uint64_t>(n)));
                    break;
                case MetricKind::Hamming:
                    theta = static_cast<std::int64_t>(rng.uniform_below(n + 1));
                    break;
                }
                auto params = setup(n, theta, metric, 8, 8);
                auto sk = keygen(params, rng);
                auto plan = plan_for(params);
                for (int i = 0; i < per_key; ++i) {
                    auto x = binary ? random_bits(n, rng) : random_template(n, rng);
                    auto y = binary ? random_bits(n, rng) : random_template(n, rng);
                    auto c = encrypt(sk, x, plan, rng);
                    auto t = token_gen(sk, y, plan, rng);
                    ASSERT_EQ(decrypt(c, t, plan.accept_when()).accept, oracle_accept(metric, x, y, theta))
                        << to_string(metric) << " n=" << n;
                }
            }
        }
    }
}

TEST(MetricNames, RoundTrip) {
    for (MetricKind m : {MetricKind::InnerProduct, MetricKind::EuclideanSquared, MetricKind::Hamming}) {
        EXPECT_EQ(metric_from_string(to_string(m)), m);
    }
    EXPECT_THROW(metric_from_string("cosine"), InvalidParameter);
}

TEST(TemplateParsing, LinesAndComments) {
    std::istringstream in("# comment\n1 2 -3\n\n  4\t5 6  \n");
    auto t = parse_templates(in);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0], (Template{1, 2, -3}));
    EXPECT_EQ(t[1], (Template{4, 5, 6}));
    EXPECT_THROW(parse_template_line("1 x 3"), FormatError);
    EXPECT_THROW(parse_template_line("99999999999999999999"), FormatError);
}
