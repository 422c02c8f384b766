#ifndef TPE_RANDOM_HPP
#define TPE_RANDOM_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include <gmpxx.h>

namespace tpe {

// Deterministic ChaCha20 keystream used as the random source for every
// randomized operation. Seeded instances are reproducible (tests, --seed);
// from_os() draws the key from the operating system.
//
// Not thread-safe: give each thread or trial its own instance (see split()).
class RandomSource {
public:
    static constexpr std::size_t kKeyBytes = 32;

    static RandomSource from_os();
    static RandomSource from_seed(std::span<const std::uint8_t> seed);
    static RandomSource from_seed(std::uint64_t seed);
    // Hex string of any even length; throws InvalidParameter on bad digits.
    static RandomSource from_hex(std::string_view hex);

    void fill(std::span<std::uint8_t> out);
    std::uint64_t next_u64();

    // Uniform in [0, bound), bound > 0.
    std::uint64_t uniform_below(std::uint64_t bound);
    mpz_class uniform_below(const mpz_class& bound);

    // Uniform integer in [-2^bits, 2^bits].
    mpz_class uniform_signed(unsigned bits);
    // Uniform integer in [1, 2^bits].
    mpz_class uniform_positive(unsigned bits);

    // Independent child stream; the parent advances past the child's key.
    RandomSource split();

    // UniformRandomBitGenerator, so the standard algorithms accept it.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next_u64(); }

private:
    explicit RandomSource(const std::array<std::uint8_t, kKeyBytes>& key);
    void refill();

    std::array<std::uint8_t, kKeyBytes> key_{};
    std::uint64_t block_counter_ = 0;
    std::array<std::uint8_t, 512> buffer_{};
    std::size_t buffer_pos_ = 512;
};

} // namespace tpe

#endif // TPE_RANDOM_HPP
