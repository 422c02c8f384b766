#include "lab/distinguishers.hpp"

#include <cmath>

#include "tpe/metric.hpp"

namespace tpe::lab {

namespace {

using Pair = std::pair<std::vector<Template>, std::vector<Template>>;

int coin(RandomSource& rng) { return static_cast<int>(rng.next_u64() & 1); }

Template full_support(std::size_t n) {
    Template u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = static_cast<std::int64_t>(i % 5 + 1) * (i % 2 == 0 ? 1 : -1);
    }
    return u;
}

Template negated(Template u) {
    for (auto& e : u) {
        e = -e;
    }
    return u;
}

double log2_abs(const Integer& z) {
    long exp = 0;
    const double d = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return static_cast<double>(exp) + std::log2(std::abs(d));
}

std::vector<double> matrix_as_doubles(const Matrix& m) {
    std::vector<double> out;
    out.reserve(m.rows() * m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out.push_back(m.at(r, c).get_d());
        }
    }
    return out;
}

} // namespace

std::vector<double> signed_log_entries(const Matrix& m) {
    std::vector<double> out;
    out.reserve(m.rows() * m.cols());
    const double log_den = log2_abs(m.denominator());
    for (const auto& num : m.numerators()) {
        const int s = sgn(num);
        if (s == 0) {
            out.push_back(0);
            continue;
        }
        const double l = log2_abs(num) - log_den;
        const double mag = l > 40 ? l : std::log2(1 + std::exp2(l));
        out.push_back(s * mag);
    }
    return out;
}

std::size_t rank_mod_prime(const Matrix& m) {
    constexpr std::uint64_t p = (std::uint64_t{1} << 61) - 1;
    auto mul = [](std::uint64_t a, std::uint64_t b) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
    };
    auto inv = [&](std::uint64_t a) {
        std::uint64_t result = 1, base = a, e = p - 2;
        while (e) {
            if (e & 1) {
                result = mul(result, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        return result;
    };
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<std::uint64_t> a(rows * cols);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = mpz_fdiv_ui(m.numerators()[i].get_mpz_t(), p);
    }
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        while (pivot < rows && a[pivot * cols + c] == 0) {
            ++pivot;
        }
        if (pivot == rows) {
            continue;
        }
        for (std::size_t k = 0; k < cols; ++k) {
            std::swap(a[pivot * cols + k], a[rank * cols + k]);
        }
        const std::uint64_t pinv = inv(a[rank * cols + c]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            const std::uint64_t f = mul(a[r * cols + c], pinv);
            if (f == 0) {
                continue;
            }
            for (std::size_t k = c; k < cols; ++k) {
                a[r * cols + k] = (a[r * cols + k] + p - mul(f, a[rank * cols + k])) % p;
            }
        }
        ++rank;
    }
    return rank;
}

// --- Trivial adversaries --------------------------------------------------

Pair RandomGuess::choose(std::size_t n, RandomSource&) const {
    const Template u = full_support(n);
    return {{u}, {negated(u)}};
}

int RandomGuess::guess(std::span<const Token>, RandomSource& rng) const { return coin(rng); }

Pair AlwaysOne::choose(std::size_t n, RandomSource&) const {
    const Template u = full_support(n);
    return {{u}, {negated(u)}};
}

Pair HarnessBackdoor::choose(std::size_t n, RandomSource&) const {
    const Template u = full_support(n);
    return {{u}, {negated(u)}};
}

// --- Calibrated adversaries -----------------------------------------------

Pair CalibratedPassive::choose(std::size_t n, RandomSource&) const { return messages(n); }

int CalibratedPassive::guess(std::span<const Token> tokens, RandomSource& rng) const {
    if (!calibrated_) {
        throw InvalidParameter(name() + " used before calibrate()");
    }
    const double s = statistic(tokens);
    if (s == threshold_) {
        return coin(rng);
    }
    return (s > threshold_) == one_is_high_ ? 1 : 0;
}

void CalibratedPassive::calibrate(const ExperimentConfig& config, std::size_t samples, RandomSource& rng) {
    const auto [m0, m1] = messages(config.n);
    const Params params = setup(config.n, config.theta, MetricKind::InnerProduct, config.key_bitwidth,
                                config.rand_bitwidth);
    const ExtensionPlan plan = plan_inner_product(config.theta);
    std::vector<double> side[2];
    for (int b = 0; b < 2; ++b) {
        const auto& seq = b == 0 ? m0 : m1;
        for (std::size_t i = 0; i < samples; ++i) {
            const SecretKey sk = keygen(params, rng);
            std::vector<Token> tokens;
            for (const auto& m : seq) {
                tokens.push_back(token_gen(sk, m, plan, rng));
            }
            side[b].push_back(statistic(tokens));
        }
    }
    const double med0 = median(side[0]);
    const double med1 = median(side[1]);
    threshold_ = (med0 + med1) / 2;
    one_is_high_ = med1 >= med0;
    calibrated_ = true;
}

Pair MeanDistinguisher::messages(std::size_t n) const {
    Template u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = static_cast<std::int64_t>(i + 1);
    }
    return {{u}, {negated(u)}};
}

double MeanDistinguisher::statistic(std::span<const Token> tokens) const {
    const auto v = signed_log_entries(tokens.front().t);
    return mean(v);
}

Pair VarianceDistinguisher::messages(std::size_t n) const {
    // 5^2 + 5^2 = 1^2 + 7^2, so both messages have the same norm.
    Template flat(n, 5);
    Template uneven(n, 5);
    for (std::size_t i = 0; i + 1 < n; i += 2) {
        uneven[i] = 1;
        uneven[i + 1] = 7;
    }
    return {{flat}, {uneven}};
}

double VarianceDistinguisher::statistic(std::span<const Token> tokens) const {
    const auto v = signed_log_entries(tokens.front().t);
    return variance(v);
}

Pair CorrelationDistinguisher::messages(std::size_t n) const {
    const Template u = full_support(n);
    return {{u, u}, {u, negated(u)}};
}

double CorrelationDistinguisher::statistic(std::span<const Token> tokens) const {
    const auto a = signed_log_entries(tokens[0].t);
    const auto b = signed_log_entries(tokens[1].t);
    return pearson(a, b);
}

// --- Rank -----------------------------------------------------------------

Pair RankDistinguisher::choose(std::size_t n, RandomSource&) const {
    Template ones(n, 1);
    Template single(n, 0);
    single[0] = 1;
    return {{ones}, {single}};
}

int RankDistinguisher::guess(std::span<const Token> tokens, RandomSource&) const {
    // All-ones pads to n + 2 nonzero slots, the single one to 3.
    const std::size_t pad = tokens.front().t.rows();
    return rank_mod_prime(tokens.front().t) >= pad - 1 ? 0 : 1;
}

// --- Active adversaries ---------------------------------------------------

std::pair<Template, Template> ActiveRandomGuess::choose(std::size_t n, TokenOracle&, RandomSource&) const {
    const Template u = full_support(n);
    return {u, negated(u)};
}

int ActiveRandomGuess::guess(const Token&, TokenOracle&, RandomSource& rng) const { return coin(rng); }

std::pair<Template, Template> ActiveBackdoor::choose(std::size_t n, TokenOracle&, RandomSource&) const {
    const Template u = full_support(n);
    return {u, negated(u)};
}

namespace {

constexpr std::int64_t kChallengeOffset = 50;

Template regression_base(std::size_t n) {
    Template u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = static_cast<std::int64_t>(3 + i % 4);
    }
    return u;
}

// Offsets -40, -30, ... skipping 0; never +-kChallengeOffset and never
// cancelling u[0] = 3, so every query keeps full support.
std::vector<std::int64_t> regression_grid(std::size_t queries) {
    std::vector<std::int64_t> grid;
    const auto half = static_cast<std::int64_t>((queries + 1) / 2);
    for (std::int64_t k = 1; k <= half && grid.size() < queries; ++k) {
        grid.push_back(-10 * k);
        if (grid.size() < queries) {
            grid.push_back(10 * k);
        }
    }
    return grid;
}

} // namespace

std::pair<Template, Template> LinearRegressionDistinguisher::choose(std::size_t n, TokenOracle&,
                                                                    RandomSource&) const {
    Template m0 = regression_base(n);
    Template m1 = m0;
    m0[0] += kChallengeOffset;
    m1[0] -= kChallengeOffset;
    return {m0, m1};
}

int LinearRegressionDistinguisher::guess(const Token& challenge, TokenOracle& oracle, RandomSource& rng) const {
    const std::size_t n = challenge.t.rows() - 3;
    const auto grid = regression_grid(std::max<std::size_t>(queries_, 2));
    std::vector<double> xs;
    std::vector<std::vector<double>> ys;
    for (auto j : grid) {
        Template q = regression_base(n);
        q[0] += j;
        xs.push_back(static_cast<double>(j));
        ys.push_back(matrix_as_doubles(oracle.query(q).t));
    }
    const double xbar = mean(xs);
    double sxx = 0;
    for (double x : xs) {
        sxx += (x - xbar) * (x - xbar);
    }
    const auto observed = matrix_as_doubles(challenge.t);
    double err0 = 0, err1 = 0;
    for (std::size_t e = 0; e < observed.size(); ++e) {
        double ybar = 0;
        for (const auto& y : ys) {
            ybar += y[e];
        }
        ybar /= static_cast<double>(ys.size());
        double sxy = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxy += (xs[k] - xbar) * (ys[k][e] - ybar);
        }
        const double slope = sxy / sxx;
        const double pred0 = ybar + slope * (kChallengeOffset - xbar);
        const double pred1 = ybar + slope * (-kChallengeOffset - xbar);
        err0 += (observed[e] - pred0) * (observed[e] - pred0);
        err1 += (observed[e] - pred1) * (observed[e] - pred1);
    }
    if (err0 == err1) {
        return coin(rng);
    }
    return err0 < err1 ? 0 : 1;
}

} // namespace tpe::lab
