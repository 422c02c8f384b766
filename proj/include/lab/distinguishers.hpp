#ifndef TPE_LAB_DISTINGUISHERS_HPP
#define TPE_LAB_DISTINGUISHERS_HPP

// Built-in adversaries for the indistinguishability experiments.
//
// The statistic-based ones (mean, variance, correlation) calibrate a
// threshold by simulating both sides of the experiment with keys of their
// own, then guess by comparing the statistic of the real tokens against it.
// Messages in these pairs have no zero entries, so every token has full
// rank; RankDistinguisher shows why that matters.

#include <memory>
#include <vector>

#include "lab/experiments.hpp"

namespace tpe::lab {

class RandomGuess final : public PassiveAdversary {
public:
    std::string name() const override { return "random-guess"; }
    std::pair<std::vector<Template>, std::vector<Template>> choose(std::size_t n, RandomSource& rng) const override;
    int guess(std::span<const Token> tokens, RandomSource& rng) const override;
};

class AlwaysOne final : public PassiveAdversary {
public:
    std::string name() const override { return "always-one"; }
    std::pair<std::vector<Template>, std::vector<Template>> choose(std::size_t n, RandomSource& rng) const override;
    int guess(std::span<const Token>, RandomSource&) const override { return 1; }
};

// Reads the hidden bit; validates the harness.
class HarnessBackdoor final : public PassiveAdversary {
public:
    std::string name() const override { return "harness-backdoor"; }
    std::pair<std::vector<Template>, std::vector<Template>> choose(std::size_t n, RandomSource& rng) const override;
    int guess(std::span<const Token>, RandomSource&) const override { return 0; }
    std::optional<int> peek(int hidden_bit) const override { return hidden_bit; }
};

// A scalar statistic of the observed tokens with a calibrated threshold.
class CalibratedPassive : public PassiveAdversary {
public:
    std::pair<std::vector<Template>, std::vector<Template>> choose(std::size_t n, RandomSource& rng) const override;
    int guess(std::span<const Token> tokens, RandomSource& rng) const override;

    virtual double statistic(std::span<const Token> tokens) const = 0;

    // Simulates `samples` runs per side; must be called before use.
    void calibrate(const ExperimentConfig& config, std::size_t samples, RandomSource& rng);
    double threshold() const { return threshold_; }
    // True when side 1 tends to score above the threshold.
    bool one_is_high() const { return one_is_high_; }

protected:
    virtual std::pair<std::vector<Template>, std::vector<Template>> messages(std::size_t n) const = 0;

private:
    bool calibrated_ = false;
    double threshold_ = 0;
    bool one_is_high_ = true;
};

// m vs -m; mean of the signed-log entries.
class MeanDistinguisher final : public CalibratedPassive {
public:
    std::string name() const override { return "mean"; }
    double statistic(std::span<const Token> tokens) const override;

protected:
    std::pair<std::vector<Template>, std::vector<Template>> messages(std::size_t n) const override;
};

// Equal-norm flat vs uneven messages; variance of the signed-log entries.
class VarianceDistinguisher final : public CalibratedPassive {
public:
    std::string name() const override { return "variance"; }
    double statistic(std::span<const Token> tokens) const override;

protected:
    std::pair<std::vector<Template>, std::vector<Template>> messages(std::size_t n) const override;
};

// Sequences (u, u) vs (u, -u) under one key; Pearson correlation between the
// two tokens' signed-log entries.
class CorrelationDistinguisher final : public CalibratedPassive {
public:
    std::string name() const override { return "entry-correlation"; }
    double statistic(std::span<const Token> tokens) const override;

protected:
    std::pair<std::vector<Template>, std::vector<Template>> messages(std::size_t n) const override;
};

// All-ones vs a single one. The token's rank is the number of nonzero slots
// in the padded query, so this one wins every time.
class RankDistinguisher final : public PassiveAdversary {
public:
    std::string name() const override { return "rank"; }
    std::pair<std::vector<Template>, std::vector<Template>> choose(std::size_t n, RandomSource& rng) const override;
    int guess(std::span<const Token> tokens, RandomSource& rng) const override;
};

class ActiveRandomGuess final : public ActiveAdversary {
public:
    std::string name() const override { return "active-random-guess"; }
    std::pair<Template, Template> choose(std::size_t n, TokenOracle& oracle, RandomSource& rng) const override;
    int guess(const Token& challenge, TokenOracle& oracle, RandomSource& rng) const override;
};

class ActiveBackdoor final : public ActiveAdversary {
public:
    std::string name() const override { return "active-harness-backdoor"; }
    std::pair<Template, Template> choose(std::size_t n, TokenOracle& oracle, RandomSource& rng) const override;
    int guess(const Token&, TokenOracle&, RandomSource&) const override { return 0; }
    std::optional<int> peek(int hidden_bit) const override { return hidden_bit; }
};

// Queries the oracle on u + j e_0 for a grid of j, fits every token entry as
// an affine function of j by least squares, and picks the challenge message
// whose predicted token is closer to the observed one.
class LinearRegressionDistinguisher final : public ActiveAdversary {
public:
    explicit LinearRegressionDistinguisher(std::size_t queries = 8) : queries_(queries) {}
    std::string name() const override { return "linear-regression"; }
    std::pair<Template, Template> choose(std::size_t n, TokenOracle& oracle, RandomSource& rng) const override;
    int guess(const Token& challenge, TokenOracle& oracle, RandomSource& rng) const override;

private:
    std::size_t queries_;
};

// Signed log magnitude of each entry: sign(v) * log2(1 + |v|).
std::vector<double> signed_log_entries(const Matrix& m);

// Rank of the numerator matrix modulo 2^61 - 1.
std::size_t rank_mod_prime(const Matrix& m);

} // namespace tpe::lab

#endif // TPE_LAB_DISTINGUISHERS_HPP
