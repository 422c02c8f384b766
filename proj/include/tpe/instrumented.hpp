#ifndef TPE_INSTRUMENTED_HPP
#define TPE_INSTRUMENTED_HPP

// Test-only view of decryption internals. The value of I and the one-time
// randomness are visible here; nothing in the service or client links this.

#include "tpe/scheme.hpp"

namespace tpe::instrumented {

struct DebugDecision {
    bool accept = false;
    int raw_sign = 0;
    Scalar value;
};

// I = Tr(C T), computed exactly.
Scalar inner_value(const Ciphertext& c, const Token& t);
DebugDecision decrypt_debug(const Ciphertext& c, const Token& t, AcceptWhen accept_when);

template <typename Artifact>
struct Recorded {
    Artifact artifact;
    OneTimeRandomness randomness;
};

Recorded<Ciphertext> encrypt_recorded(const SecretKey& sk, std::span<const std::int64_t> x,
                                      const ExtensionPlan& plan, RandomSource& rng);
Recorded<Token> token_recorded(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                               RandomSource& rng);

// Randomness with the result-disguising multiplier pinned to 1; the mask
// and triangle stay random.
OneTimeRandomness draw_randomness_unit_scale(const Params& params, RandomSource& rng);

// Plain dot product of two equal-length integer vectors.
Integer dot(std::span<const Integer> a, std::span<const Integer> b);

} // namespace tpe::instrumented

#endif // TPE_INSTRUMENTED_HPP
