#ifndef TPE_SCHEME_HPP
#define TPE_SCHEME_HPP

// Threshold predicate encryption.
//
// A template x is padded with its threshold and one-time randomness into x',
// permuted by the secret permutation, placed on the diagonal of X and hidden
// as C = M1 * S_x * X * M2. A query y becomes T = M2^-1 * Y * S_y * M1^-1.
// The product C*T is a similarity transform of S_x*X*Y*S_y, whose trace is
// x'.y' because the unit lower triangular masks leave the diagonal alone.
// The extension rules make x'.y' a positive multiple of the comparison value,
// so the evaluator learns only its sign.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tpe/exact.hpp"
#include "tpe/random.hpp"
#include "tpe/serialize.hpp"

namespace tpe {

using exact::Integer;
using exact::Matrix;
using exact::Permutation;
using exact::Scalar;

using Template = std::vector<std::int64_t>;
using Digest = std::array<std::uint8_t, 32>;

enum class MetricKind : std::uint8_t {
    InnerProduct = 0,
    EuclideanSquared = 1,
    Hamming = 2,
};

// Which sign of the trace counts as a match.
enum class AcceptWhen : std::uint8_t {
    NonPositive = 0,
    NonNegative = 1,
};

std::string to_string(MetricKind kind);
MetricKind metric_from_string(std::string_view name);
MetricKind metric_from_byte(std::uint8_t b);
// Padding slots the metric's extension adds: 3 or 5.
std::size_t extra_slots(MetricKind kind);
AcceptWhen default_accept_when(MetricKind kind);

inline constexpr unsigned kMinBitwidth = 8;
inline constexpr unsigned kDefaultKeyBitwidth = 32;
inline constexpr unsigned kDefaultRandBitwidth = 32;

struct Params {
    std::size_t n = 0;
    std::int64_t theta = 0;
    MetricKind metric = MetricKind::InnerProduct;
    std::size_t pad = 0;
    unsigned key_bitwidth = kDefaultKeyBitwidth;
    unsigned rand_bitwidth = kDefaultRandBitwidth;

    // SHA-256 over (n, theta, pad, metric); tags ciphertexts and tokens.
    Digest digest() const;

    friend bool operator==(const Params&, const Params&) = default;
};

// Throws InvalidParameter on n == 0 or a bitwidth below kMinBitwidth.
Params setup(std::size_t n, std::int64_t theta, MetricKind metric,
             unsigned key_bitwidth = kDefaultKeyBitwidth,
             unsigned rand_bitwidth = kDefaultRandBitwidth);

void write_params(ByteWriter& w, const Params& p);
Params read_params(ByteReader& r);

// How a template and a query are padded before encryption. `scale` is the
// one-time positive multiplier (beta for templates, alpha for queries) and
// `mask` the extension randomness (r_x, r_y). The rules must place the two
// masks in slots the other side leaves at zero.
class ExtensionPlan {
public:
    using Rule = std::function<std::vector<Integer>(std::span<const std::int64_t>, const Integer& scale,
                                                    const Integer& mask)>;

    ExtensionPlan(std::string name, std::size_t extra_slots, AcceptWhen accept_when, Rule registered,
                  Rule query);

    const std::string& name() const { return name_; }
    std::size_t extra_slots() const { return extra_slots_; }
    AcceptWhen accept_when() const { return accept_when_; }

    // Both throw DimensionMismatch unless the output has n + extra_slots entries.
    std::vector<Integer> registered_extend(std::span<const std::int64_t> x, const Integer& scale,
                                           const Integer& mask) const;
    std::vector<Integer> query_extend(std::span<const std::int64_t> y, const Integer& scale,
                                      const Integer& mask) const;

private:
    std::string name_;
    std::size_t extra_slots_;
    AcceptWhen accept_when_;
    Rule registered_;
    Rule query_;
};

struct SecretKey {
    Params params;
    Matrix m1;
    Matrix m2;
    Matrix m1_inv;
    Matrix m2_inv;
    Permutation perm;
};

SecretKey keygen(const Params& params, RandomSource& rng);

// The per-operation randomness: scale is beta (encrypt) or alpha (token),
// mask is r_x or r_y, triangle is S_x or S_y.
struct OneTimeRandomness {
    Integer scale;
    Integer mask;
    Matrix triangle;
};

OneTimeRandomness draw_randomness(const Params& params, RandomSource& rng);

struct Ciphertext {
    Digest params_digest{};
    Matrix c;

    friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

struct Token {
    Digest params_digest{};
    Matrix t;

    friend bool operator==(const Token&, const Token&) = default;
};

Ciphertext encrypt(const SecretKey& sk, std::span<const std::int64_t> x, const ExtensionPlan& plan,
                   RandomSource& rng);
// Deterministic given the randomness. scale must be >= 1 and triangle unit
// lower triangular of the padded dimension.
Ciphertext encrypt(const SecretKey& sk, std::span<const std::int64_t> x, const ExtensionPlan& plan,
                   const OneTimeRandomness& rnd);

Token token_gen(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                RandomSource& rng);
Token token_gen(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                const OneTimeRandomness& rnd);

// Template-independent half of token generation: S_y * M1^-1. Single use;
// reusing it would repeat S_y across tokens.
struct TokenPrecomputation {
    Digest params_digest{};
    Matrix masked_inverse;
};

TokenPrecomputation precompute_token(const SecretKey& sk, RandomSource& rng);
// Consumes the precomputation; draws alpha and r_y from rng.
Token token_gen_online(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                       TokenPrecomputation&& pre, RandomSource& rng);

// The evaluator's output: nothing but the match bit.
struct Decision {
    bool accept = false;
};

// Throws ParamsMismatch when the digests differ, DimensionMismatch when the
// matrices are not the same square size.
Decision decrypt(const Ciphertext& c, const Token& t, AcceptWhen accept_when);

// File formats: "TPEK" key, "TPEC" ciphertext, "TPET" token.
Bytes serialize_key(const SecretKey& sk);
SecretKey deserialize_key(std::span<const std::uint8_t> bytes);
Bytes serialize_ciphertext(const Ciphertext& c);
Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes);
Ciphertext read_ciphertext(ByteReader& r);
Bytes serialize_token(const Token& t);
Token deserialize_token(std::span<const std::uint8_t> bytes);
Token read_token(ByteReader& r);

} // namespace tpe

#endif // TPE_SCHEME_HPP
