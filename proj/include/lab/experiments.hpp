#ifndef TPE_LAB_EXPERIMENTS_HPP
#define TPE_LAB_EXPERIMENTS_HPP

// Indistinguishability experiments over token generation.
//
// Passive: the adversary names two message sequences, a fresh key and a
// uniform bit b are drawn, the adversary sees tokens of sequence b and
// guesses b.
// Active: as above with a single message pair, plus a token-generation
// oracle before and after the challenge. Querying either challenge message
// is a ChallengeQueryViolation.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lab/stats.hpp"
#include "tpe/error.hpp"
#include "tpe/scheme.hpp"

namespace tpe::lab {

class ChallengeQueryViolation : public Error {
public:
    using Error::Error;
};

struct ExperimentConfig {
    std::size_t n = 8;
    std::int64_t theta = 0;
    unsigned key_bitwidth = kDefaultKeyBitwidth;
    unsigned rand_bitwidth = kDefaultRandBitwidth;
    // Worker threads; results do not depend on this.
    std::size_t threads = 1;
};

class PassiveAdversary {
public:
    virtual ~PassiveAdversary() = default;
    virtual std::string name() const = 0;
    // Two sequences of equal length whose messages pairwise have length n.
    virtual std::pair<std::vector<Template>, std::vector<Template>> choose(std::size_t n,
                                                                           RandomSource& rng) const = 0;
    virtual int guess(std::span<const Token> tokens, RandomSource& rng) const = 0;
    // Test-only hook: an adversary returning a value here is handed the
    // hidden bit and its answer replaces guess().
    virtual std::optional<int> peek(int /*hidden_bit*/) const { return std::nullopt; }
};

class TokenOracle {
public:
    TokenOracle(const SecretKey& sk, const ExtensionPlan& plan, RandomSource& rng);

    Token query(std::span<const std::int64_t> m);
    std::size_t queries() const { return history_.size(); }

    // Called by the experiment once the challenge pair is fixed; checks the
    // queries made so far as well as every later one.
    void forbid(const Template& m0, const Template& m1);

private:
    void check(std::span<const std::int64_t> m) const;

    const SecretKey& sk_;
    const ExtensionPlan& plan_;
    RandomSource& rng_;
    std::vector<Template> history_;
    std::optional<std::pair<Template, Template>> forbidden_;
};

class ActiveAdversary {
public:
    virtual ~ActiveAdversary() = default;
    virtual std::string name() const = 0;
    virtual std::pair<Template, Template> choose(std::size_t n, TokenOracle& oracle, RandomSource& rng) const = 0;
    virtual int guess(const Token& challenge, TokenOracle& oracle, RandomSource& rng) const = 0;
    virtual std::optional<int> peek(int /*hidden_bit*/) const { return std::nullopt; }
};

// Throws InvalidParameter for trials < 100 or mismatched message lengths.
ExperimentReport run_passive_experiment(const PassiveAdversary& adversary, std::size_t trials,
                                        const ExperimentConfig& config, RandomSource& rng);
ExperimentReport run_active_experiment(const ActiveAdversary& adversary, std::size_t trials,
                                       const ExperimentConfig& config, RandomSource& rng);

// One experiment run; exposed for tests. Returns true when b' == b.
bool passive_trial(const PassiveAdversary& adversary, const ExperimentConfig& config, RandomSource& rng);
bool active_trial(const ActiveAdversary& adversary, const ExperimentConfig& config, RandomSource& rng);

} // namespace tpe::lab

#endif // TPE_LAB_EXPERIMENTS_HPP
