#include "lab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "tpe/metric.hpp"

namespace tpe::lab {

TokenOracle::TokenOracle(const SecretKey& sk, const ExtensionPlan& plan, RandomSource& rng)
    : sk_(sk), plan_(plan), rng_(rng) {}

void TokenOracle::check(std::span<const std::int64_t> m) const {
    if (!forbidden_) {
        return;
    }
    auto same = [&](const Template& t) { return std::equal(m.begin(), m.end(), t.begin(), t.end()); };
    if (same(forbidden_->first) || same(forbidden_->second)) {
        throw ChallengeQueryViolation("token oracle queried on a challenge message");
    }
}

Token TokenOracle::query(std::span<const std::int64_t> m) {
    check(m);
    history_.emplace_back(m.begin(), m.end());
    return token_gen(sk_, m, plan_, rng_);
}

void TokenOracle::forbid(const Template& m0, const Template& m1) {
    forbidden_.emplace(m0, m1);
    for (const auto& h : history_) {
        check(h);
    }
}

namespace {

int draw_bit(RandomSource& rng) { return static_cast<int>(rng.next_u64() & 1); }

void require_trials(std::size_t trials) {
    if (trials < 100) {
        throw InvalidParameter("experiments need at least 100 trials");
    }
}

template <typename Trial>
std::size_t run_trials(std::size_t trials, std::size_t threads, RandomSource& rng, Trial trial) {
    // Streams are split up front so the outcome is independent of scheduling.
    std::vector<RandomSource> streams;
    streams.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        streams.push_back(rng.split());
    }
    std::vector<char> won(trials, 0);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        try {
            for (std::size_t i = next++; i < trials; i = next++) {
                won[i] = trial(streams[i]) ? 1 : 0;
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) {
                error = std::current_exception();
            }
            next = trials;
        }
    };
    threads = std::max<std::size_t>(1, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return static_cast<std::size_t>(std::count(won.begin(), won.end(), 1));
}

} // namespace

bool passive_trial(const PassiveAdversary& adversary, const ExperimentConfig& config, RandomSource& rng) {
    auto [m0, m1] = adversary.choose(config.n, rng);
    if (m0.size() != m1.size() || m0.empty()) {
        throw InvalidParameter("message sequences must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < m0.size(); ++i) {
        if (m0[i].size() != config.n || m1[i].size() != config.n) {
            throw InvalidParameter("message length differs from n");
        }
    }
    const Params params = setup(config.n, config.theta, MetricKind::InnerProduct, config.key_bitwidth,
                                config.rand_bitwidth);
    const SecretKey sk = keygen(params, rng);
    const ExtensionPlan plan = plan_inner_product(config.theta);
    const int b = draw_bit(rng);
    const auto& chosen = b == 0 ? m0 : m1;
    std::vector<Token> tokens;
    tokens.reserve(chosen.size());
    for (const auto& m : chosen) {
        tokens.push_back(token_gen(sk, m, plan, rng));
    }
    if (auto peeked = adversary.peek(b)) {
        return *peeked == b;
    }
    return adversary.guess(tokens, rng) == b;
}

bool active_trial(const ActiveAdversary& adversary, const ExperimentConfig& config, RandomSource& rng) {
    const Params params = setup(config.n, config.theta, MetricKind::InnerProduct, config.key_bitwidth,
                                config.rand_bitwidth);
    const SecretKey sk = keygen(params, rng);
    const ExtensionPlan plan = plan_inner_product(config.theta);
    RandomSource oracle_rng = rng.split();
    TokenOracle oracle(sk, plan, oracle_rng);
    auto [m0, m1] = adversary.choose(config.n, oracle, rng);
    if (m0.size() != config.n || m1.size() != config.n) {
        throw InvalidParameter("challenge messages must have length n");
    }
    oracle.forbid(m0, m1);
    const int b = draw_bit(rng);
    const Token challenge = token_gen(sk, b == 0 ? m0 : m1, plan, rng);
    if (auto peeked = adversary.peek(b)) {
        return *peeked == b;
    }
    return adversary.guess(challenge, oracle, rng) == b;
}

ExperimentReport run_passive_experiment(const PassiveAdversary& adversary, std::size_t trials,
                                        const ExperimentConfig& config, RandomSource& rng) {
    require_trials(trials);
    const std::size_t wins = run_trials(trials, config.threads, rng,
                                        [&](RandomSource& r) { return passive_trial(adversary, config, r); });
    return make_report(adversary.name(), wins, trials);
}

ExperimentReport run_active_experiment(const ActiveAdversary& adversary, std::size_t trials,
                                       const ExperimentConfig& config, RandomSource& rng) {
    require_trials(trials);
    const std::size_t wins = run_trials(trials, config.threads, rng,
                                        [&](RandomSource& r) { return active_trial(adversary, config, r); });
    return make_report(adversary.name(), wins, trials);
}

} // namespace tpe::lab
