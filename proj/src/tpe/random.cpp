#include "tpe/random.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#include <sodium.h>

#include "tpe/error.hpp"

namespace tpe {

namespace {

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) {
        throw Error("libsodium initialization failed");
    }
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

RandomSource::RandomSource(const std::array<std::uint8_t, kKeyBytes>& key) : key_(key) {}

RandomSource RandomSource::from_os() {
    ensure_sodium();
    std::array<std::uint8_t, kKeyBytes> key{};
    randombytes_buf(key.data(), key.size());
    return RandomSource(key);
}

RandomSource RandomSource::from_seed(std::span<const std::uint8_t> seed) {
    ensure_sodium();
    std::array<std::uint8_t, kKeyBytes> key{};
    crypto_generichash(key.data(), key.size(), seed.data(), seed.size(), nullptr, 0);
    return RandomSource(key);
}

RandomSource RandomSource::from_seed(std::uint64_t seed) {
    std::array<std::uint8_t, 8> bytes{};
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    }
    return from_seed(std::span<const std::uint8_t>(bytes));
}

RandomSource RandomSource::from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0 || hex.empty()) {
        throw InvalidParameter("seed must be a non-empty even-length hex string");
    }
    std::vector<std::uint8_t> bytes(hex.size() / 2);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const int hi = hex_digit(hex[2 * i]);
        const int lo = hex_digit(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw InvalidParameter("seed contains a non-hex character");
        }
        bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return from_seed(std::span<const std::uint8_t>(bytes));
}

void RandomSource::refill() {
    // Each refill uses a fresh nonce (the block counter), so the stream never
    // repeats for a given key.
    std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
    for (std::size_t i = 0; i < nonce.size(); ++i) {
        nonce[i] = static_cast<std::uint8_t>(block_counter_ >> (8 * i));
    }
    ++block_counter_;
    crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce.data(), key_.data());
    buffer_pos_ = 0;
}

void RandomSource::fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        if (buffer_pos_ == buffer_.size()) {
            refill();
        }
        const std::size_t take = std::min(out.size() - done, buffer_.size() - buffer_pos_);
        std::memcpy(out.data() + done, buffer_.data() + buffer_pos_, take);
        buffer_pos_ += take;
        done += take;
    }
}

std::uint64_t RandomSource::next_u64() {
    std::array<std::uint8_t, 8> b{};
    fill(b);
    std::uint64_t v = 0;
    for (auto byte : b) {
        v = (v << 8) | byte;
    }
    return v;
}

std::uint64_t RandomSource::uniform_below(std::uint64_t bound) {
    if (bound == 0) {
        throw InvalidParameter("uniform_below: bound must be positive");
    }
    // Reject the top partial bucket to stay unbiased.
    const std::uint64_t limit = max() - (max() % bound + 1) % bound;
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v <= limit) {
            return v % bound;
        }
    }
}

mpz_class RandomSource::uniform_below(const mpz_class& bound) {
    if (bound <= 0) {
        throw InvalidParameter("uniform_below: bound must be positive");
    }
    if (mpz_fits_ulong_p(bound.get_mpz_t()) && sizeof(unsigned long) == 8) {
        return mpz_class(static_cast<unsigned long>(uniform_below(std::uint64_t{bound.get_ui()})));
    }
    const mpz_class top = bound - 1;
    const std::size_t bits = mpz_sizeinbase(top.get_mpz_t(), 2);
    const std::size_t bytes = (bits + 7) / 8;
    const unsigned excess = static_cast<unsigned>(bytes * 8 - bits);
    std::vector<std::uint8_t> buf(bytes);
    mpz_class v;
    for (;;) {
        fill(buf);
        buf[0] &= static_cast<std::uint8_t>(0xFFu >> excess);
        mpz_import(v.get_mpz_t(), buf.size(), 1, 1, 1, 0, buf.data());
        if (v < bound) {
            return v;
        }
    }
}

mpz_class RandomSource::uniform_signed(unsigned bits) {
    // 2^(bits+1) + 1 values centred on zero.
    mpz_class half;
    mpz_ui_pow_ui(half.get_mpz_t(), 2, bits);
    mpz_class v = uniform_below(mpz_class(2 * half + 1));
    return v - half;
}

mpz_class RandomSource::uniform_positive(unsigned bits) {
    mpz_class range;
    mpz_ui_pow_ui(range.get_mpz_t(), 2, bits);
    return uniform_below(range) + 1;
}

RandomSource RandomSource::split() {
    std::array<std::uint8_t, kKeyBytes> child{};
    fill(child);
    return RandomSource(child);
}

} // namespace tpe
