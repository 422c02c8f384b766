#include "tpe/instrumented.hpp"

#include "tpe/error.hpp"

namespace tpe::instrumented {

Scalar inner_value(const Ciphertext& c, const Token& t) {
    if (c.params_digest != t.params_digest) {
        throw ParamsMismatch("ciphertext and token come from different setups");
    }
    return exact::trace_of_product(c.c, t.t);
}

DebugDecision decrypt_debug(const Ciphertext& c, const Token& t, AcceptWhen accept_when) {
    DebugDecision d;
    d.value = inner_value(c, t);
    d.raw_sign = sgn(d.value);
    d.accept = accept_when == AcceptWhen::NonPositive ? d.raw_sign <= 0 : d.raw_sign >= 0;
    return d;
}

Recorded<Ciphertext> encrypt_recorded(const SecretKey& sk, std::span<const std::int64_t> x,
                                      const ExtensionPlan& plan, RandomSource& rng) {
    auto rnd = draw_randomness(sk.params, rng);
    auto c = encrypt(sk, x, plan, rnd);
    return {std::move(c), std::move(rnd)};
}

Recorded<Token> token_recorded(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                               RandomSource& rng) {
    auto rnd = draw_randomness(sk.params, rng);
    auto t = token_gen(sk, y, plan, rnd);
    return {std::move(t), std::move(rnd)};
}

OneTimeRandomness draw_randomness_unit_scale(const Params& params, RandomSource& rng) {
    auto rnd = draw_randomness(params, rng);
    rnd.scale = 1;
    return rnd;
}

Integer dot(std::span<const Integer> a, std::span<const Integer> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("dot of unequal lengths");
    }
    Integer s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace tpe::instrumented
