#include "lab/attacks.hpp"

#include <cmath>

#include "tpe/error.hpp"
#include "tpe/instrumented.hpp"
#include "tpe/metric.hpp"

namespace tpe::lab {

std::vector<OracleProbe> decryption_oracle_demo(std::span<const std::int64_t> x, std::int64_t theta,
                                                const std::vector<Template>& probes, RandomSource& rng,
                                                unsigned key_bitwidth, unsigned rand_bitwidth) {
    if (probes.empty()) {
        throw InvalidParameter("decryption oracle needs at least one probe");
    }
    const Params params = setup(x.size(), theta, MetricKind::InnerProduct, key_bitwidth, rand_bitwidth);
    const SecretKey sk = keygen(params, rng);
    const ExtensionPlan plan = plan_inner_product(theta);
    const Ciphertext c = encrypt(sk, x, plan, rng);
    std::vector<OracleProbe> out;
    out.reserve(probes.size());
    for (const auto& y : probes) {
        const Token t = token_gen(sk, y, plan, rng);
        Scalar gamma = instrumented::inner_value(c, t);
        const int s = sgn(gamma);
        out.push_back({s, std::move(gamma)});
    }
    return out;
}

const char* to_string(TypeOneMode mode) {
    switch (mode) {
    case TypeOneMode::Disabled: return "disabled";
    case TypeOneMode::SharedScale: return "shared-scale";
    case TypeOneMode::Fresh: return "fresh";
    }
    return "unknown";
}

namespace {

std::int64_t nonzero_entry(RandomSource& rng, std::int64_t bound) {
    const auto mag = static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(bound))) + 1;
    return (rng.next_u64() & 1) ? mag : -mag;
}

OneTimeRandomness draw(const Params& params, TypeOneMode mode, RandomSource& rng) {
    return mode == TypeOneMode::Disabled ? instrumented::draw_randomness_unit_scale(params, rng)
                                         : draw_randomness(params, rng);
}

} // namespace

RegistrationStats registration_attack_check(const RegistrationConfig& config, RandomSource& rng) {
    if (config.n == 0 || config.trials == 0) {
        throw InvalidParameter("registration attack needs n >= 1 and trials >= 1");
    }
    const Params params = setup(config.n, config.theta, MetricKind::EuclideanSquared, config.key_bitwidth,
                                config.rand_bitwidth);
    const ExtensionPlan plan = plan_euclidean(config.theta);

    RegistrationStats stats;
    stats.trials.reserve(config.trials);
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
        const SecretKey sk = keygen(params, rng);

        Template victim(config.n);
        for (auto& e : victim) {
            e = nonzero_entry(rng, 255);
        }
        const OneTimeRandomness query_rnd = draw(params, config.mode, rng);
        const Token token = token_gen(sk, victim, plan, query_rnd);

        const std::size_t i = trial % config.n;
        Template p(config.n);
        for (auto& e : p) {
            e = static_cast<std::int64_t>(rng.uniform_below(201)) - 100;
        }
        const std::int64_t c = static_cast<std::int64_t>(rng.uniform_below(100)) + 1;
        Template q = p;
        p[i] = c;
        q[i] = -c;

        const OneTimeRandomness p_rnd = draw(params, config.mode, rng);
        OneTimeRandomness q_rnd = draw(params, config.mode, rng);
        if (config.mode == TypeOneMode::SharedScale) {
            q_rnd.scale = p_rnd.scale;
        }
        const Scalar i_p = instrumented::inner_value(encrypt(sk, p, plan, p_rnd), token);
        const Scalar i_q = instrumented::inner_value(encrypt(sk, q, plan, q_rnd), token);

        const Integer norm_gap = oracle_inner(p, p) - oracle_inner(q, q);
        const Scalar estimate = ((i_p - i_q) + Scalar(norm_gap)) / Scalar(2 * (p[i] - q[i]));

        RegistrationTrial t;
        t.coordinate = i;
        t.truth = victim[i];
        t.estimate = estimate;
        t.ratio = estimate / Scalar(static_cast<long>(victim[i]));
        t.scale_product = query_rnd.scale * p_rnd.scale;
        t.exact = estimate == Scalar(static_cast<long>(victim[i]));
        const Scalar rel = abs(estimate - Scalar(static_cast<long>(victim[i]))) /
                           Scalar(static_cast<long>(std::llabs(victim[i])));
        t.relative_error = rel.get_d();

        stats.exact_recoveries += t.exact ? 1 : 0;
        stats.large_errors += t.relative_error > 0.10 ? 1 : 0;
        if (!stats.trials.empty() && t.ratio != stats.trials.front().ratio) {
            stats.ratio_constant = false;
        }
        stats.trials.push_back(std::move(t));
    }
    return stats;
}

} // namespace tpe::lab
