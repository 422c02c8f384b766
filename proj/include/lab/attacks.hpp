#ifndef TPE_LAB_ATTACKS_HPP
#define TPE_LAB_ATTACKS_HPP

#include <cstdint>
#include <vector>

#include "tpe/scheme.hpp"

namespace tpe::lab {

struct OracleProbe {
    // sign(gamma) for gamma = alpha beta (x.y - theta).
    int sign = 0;
    Scalar gamma;
};

// Encrypts x once, then answers every probe with a fresh token, exposing
// the exact decryption value. Throws InvalidParameter for no probes.
std::vector<OracleProbe> decryption_oracle_demo(std::span<const std::int64_t> x, std::int64_t theta,
                                                const std::vector<Template>& probes, RandomSource& rng,
                                                unsigned key_bitwidth = kDefaultKeyBitwidth,
                                                unsigned rand_bitwidth = kDefaultRandBitwidth);

// How the result-disguising multipliers are drawn in the attack.
enum class TypeOneMode {
    Disabled,    // alpha = beta = 1
    SharedScale, // the two planted ciphertexts share one beta
    Fresh,       // independent alpha and betas, as the scheme specifies
};

const char* to_string(TypeOneMode mode);

struct RegistrationConfig {
    std::size_t n = 8;
    std::size_t trials = 1000;
    TypeOneMode mode = TypeOneMode::Fresh;
    std::int64_t theta = 1000;
    unsigned key_bitwidth = kDefaultKeyBitwidth;
    unsigned rand_bitwidth = kDefaultRandBitwidth;
};

struct RegistrationTrial {
    std::size_t coordinate = 0;
    std::int64_t truth = 0;
    Scalar estimate;
    // estimate / truth.
    Scalar ratio;
    // alpha of the query times beta of the first planted ciphertext.
    Integer scale_product;
    bool exact = false;
    double relative_error = 0;
};

struct RegistrationStats {
    std::vector<RegistrationTrial> trials;
    std::size_t exact_recoveries = 0;
    // Trials with relative error above 10%.
    std::size_t large_errors = 0;
    bool ratio_constant = true;

    double large_error_fraction() const {
        return trials.empty() ? 0 : static_cast<double>(large_errors) / static_cast<double>(trials.size());
    }
};

// The attacker plants templates p, q that differ only in coordinate i, with
// p_i = c, q_i = -c (so |p| = |q|), under the victim's key and Euclidean
// plan, then estimates the query's i-th entry from the two decryption
// values:
//   est = ((I_p - I_q) + (|p|^2 - |q|^2)) / (2 (p_i - q_i))
// which is exact when alpha = beta = 1.
RegistrationStats registration_attack_check(const RegistrationConfig& config, RandomSource& rng);

} // namespace tpe::lab

#endif // TPE_LAB_ATTACKS_HPP
