#include "tpe/scheme.hpp"

#include <algorithm>
#include <utility>

#include <sodium.h>

#include "tpe/error.hpp"

namespace tpe {

// --- Metric kinds ---------------------------------------------------------

std::string to_string(MetricKind kind) {
    switch (kind) {
    case MetricKind::InnerProduct: return "inner";
    case MetricKind::EuclideanSquared: return "euclidean";
    case MetricKind::Hamming: return "hamming";
    }
    return "unknown";
}

MetricKind metric_from_string(std::string_view name) {
    if (name == "inner") return MetricKind::InnerProduct;
    if (name == "euclidean") return MetricKind::EuclideanSquared;
    if (name == "hamming") return MetricKind::Hamming;
    throw InvalidParameter("unknown metric '" + std::string(name) + "'");
}

MetricKind metric_from_byte(std::uint8_t b) {
    if (b > static_cast<std::uint8_t>(MetricKind::Hamming)) {
        throw FormatError("unknown metric byte " + std::to_string(b));
    }
    return static_cast<MetricKind>(b);
}

std::size_t extra_slots(MetricKind kind) {
    return kind == MetricKind::EuclideanSquared ? 5 : 3;
}

AcceptWhen default_accept_when(MetricKind kind) {
    return kind == MetricKind::InnerProduct ? AcceptWhen::NonPositive : AcceptWhen::NonNegative;
}

// --- Params ---------------------------------------------------------------

Params setup(std::size_t n, std::int64_t theta, MetricKind metric, unsigned key_bitwidth,
             unsigned rand_bitwidth) {
    if (n == 0) {
        throw InvalidParameter("template dimension n must be at least 1");
    }
    if (key_bitwidth < kMinBitwidth || rand_bitwidth < kMinBitwidth) {
        throw InvalidParameter("bitwidths must be at least " + std::to_string(kMinBitwidth));
    }
    if (metric == MetricKind::EuclideanSquared && theta < 0) {
        throw InvalidParameter("euclidean threshold must be non-negative");
    }
    return Params{n, theta, metric, n + extra_slots(metric), key_bitwidth, rand_bitwidth};
}

Digest Params::digest() const {
    ByteWriter w;
    w.magic("TPE params v1");
    w.u64(n);
    w.i64(theta);
    w.u64(pad);
    w.u8(static_cast<std::uint8_t>(metric));
    Digest d{};
    crypto_hash_sha256(d.data(), w.bytes().data(), w.bytes().size());
    return d;
}

void write_params(ByteWriter& w, const Params& p) {
    w.u32(static_cast<std::uint32_t>(p.n));
    w.i64(p.theta);
    w.u8(static_cast<std::uint8_t>(p.metric));
    w.u32(static_cast<std::uint32_t>(p.pad));
    w.u32(p.key_bitwidth);
    w.u32(p.rand_bitwidth);
}

Params read_params(ByteReader& r) {
    Params p;
    p.n = r.u32();
    p.theta = r.i64();
    p.metric = metric_from_byte(r.u8());
    p.pad = r.u32();
    p.key_bitwidth = r.u32();
    p.rand_bitwidth = r.u32();
    Params check;
    try {
        check = setup(p.n, p.theta, p.metric, p.key_bitwidth, p.rand_bitwidth);
    } catch (const InvalidParameter& e) {
        throw FormatError(std::string("invalid params: ") + e.what());
    }
    if (check.pad != p.pad) {
        throw FormatError("params pad does not match metric");
    }
    return p;
}

// --- Extension plans ------------------------------------------------------

ExtensionPlan::ExtensionPlan(std::string name, std::size_t extra_slots, AcceptWhen accept_when,
                             Rule registered, Rule query)
    : name_(std::move(name)),
      extra_slots_(extra_slots),
      accept_when_(accept_when),
      registered_(std::move(registered)),
      query_(std::move(query)) {}

namespace {

std::vector<Integer> checked(std::vector<Integer> v, std::size_t expected, const std::string& plan) {
    if (v.size() != expected) {
        throw DimensionMismatch("plan '" + plan + "' produced " + std::to_string(v.size()) +
                                " slots, expected " + std::to_string(expected));
    }
    return v;
}

} // namespace

std::vector<Integer> ExtensionPlan::registered_extend(std::span<const std::int64_t> x, const Integer& scale,
                                                      const Integer& mask) const {
    return checked(registered_(x, scale, mask), x.size() + extra_slots_, name_);
}

std::vector<Integer> ExtensionPlan::query_extend(std::span<const std::int64_t> y, const Integer& scale,
                                                 const Integer& mask) const {
    return checked(query_(y, scale, mask), y.size() + extra_slots_, name_);
}

// --- Key generation -------------------------------------------------------

SecretKey keygen(const Params& params, RandomSource& rng) {
    Matrix m1 = exact::rand_nonsingular(params.pad, params.key_bitwidth, rng);
    Matrix m2 = exact::rand_nonsingular(params.pad, params.key_bitwidth, rng);
    Matrix m1_inv = exact::invert(m1);
    Matrix m2_inv = exact::invert(m2);
    Permutation perm = Permutation::random(params.pad, rng);
    return SecretKey{params, std::move(m1), std::move(m2), std::move(m1_inv), std::move(m2_inv),
                     std::move(perm)};
}

OneTimeRandomness draw_randomness(const Params& params, RandomSource& rng) {
    Integer scale = rng.uniform_positive(params.rand_bitwidth);
    Integer mask = rng.uniform_signed(params.rand_bitwidth);
    Matrix triangle = exact::rand_unit_lower_triangular(params.pad, params.rand_bitwidth, rng);
    return OneTimeRandomness{std::move(scale), std::move(mask), std::move(triangle)};
}

// --- Encryption -----------------------------------------------------------

namespace {

void check_template(const SecretKey& sk, std::span<const std::int64_t> v, const ExtensionPlan& plan) {
    if (v.size() != sk.params.n) {
        throw DimensionMismatch("template has " + std::to_string(v.size()) + " entries, key expects " +
                                std::to_string(sk.params.n));
    }
    if (sk.params.n + plan.extra_slots() != sk.params.pad) {
        throw InvalidParameter("plan '" + plan.name() + "' does not fit the key's padded dimension");
    }
}

void check_randomness(const SecretKey& sk, const OneTimeRandomness& rnd) {
    if (rnd.scale < 1) {
        throw InvalidParameter("one-time scale must be a positive integer");
    }
    const Matrix& s = rnd.triangle;
    if (s.rows() != sk.params.pad || s.cols() != sk.params.pad) {
        throw DimensionMismatch("mask matrix does not match the padded dimension");
    }
    if (!s.is_integral()) {
        throw InvalidParameter("mask matrix must be integral");
    }
    for (std::size_t i = 0; i < s.rows(); ++i) {
        if (s.numerator(i, i) != 1) {
            throw InvalidParameter("mask matrix must have a unit diagonal");
        }
        for (std::size_t j = i + 1; j < s.cols(); ++j) {
            if (sgn(s.numerator(i, j)) != 0) {
                throw InvalidParameter("mask matrix must be lower triangular");
            }
        }
    }
}

std::vector<Integer> permuted(const SecretKey& sk, const std::vector<Integer>& v) {
    return exact::apply_permutation(sk.perm, std::span<const Integer>(v));
}

Token finish_token(const SecretKey& sk, const std::vector<Integer>& y_perm, const Matrix& masked_inverse) {
    // (M2^-1 * Y) * (S_y * M1^-1)
    Matrix left = exact::scale_columns(sk.m2_inv, y_perm);
    return Token{sk.params.digest(), exact::mat_mul(left, masked_inverse)};
}

} // namespace

Ciphertext encrypt(const SecretKey& sk, std::span<const std::int64_t> x, const ExtensionPlan& plan,
                   const OneTimeRandomness& rnd) {
    check_template(sk, x, plan);
    check_randomness(sk, rnd);
    const auto x_perm = permuted(sk, plan.registered_extend(x, rnd.scale, rnd.mask));
    Matrix left = exact::mat_mul(sk.m1, rnd.triangle);
    left = exact::scale_columns(left, x_perm);
    return Ciphertext{sk.params.digest(), exact::mat_mul(left, sk.m2)};
}

Ciphertext encrypt(const SecretKey& sk, std::span<const std::int64_t> x, const ExtensionPlan& plan,
                   RandomSource& rng) {
    return encrypt(sk, x, plan, draw_randomness(sk.params, rng));
}

Token token_gen(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                const OneTimeRandomness& rnd) {
    check_template(sk, y, plan);
    check_randomness(sk, rnd);
    const auto y_perm = permuted(sk, plan.query_extend(y, rnd.scale, rnd.mask));
    return finish_token(sk, y_perm, exact::mat_mul(rnd.triangle, sk.m1_inv));
}

Token token_gen(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                RandomSource& rng) {
    return token_gen(sk, y, plan, draw_randomness(sk.params, rng));
}

TokenPrecomputation precompute_token(const SecretKey& sk, RandomSource& rng) {
    Matrix s = exact::rand_unit_lower_triangular(sk.params.pad, sk.params.rand_bitwidth, rng);
    return TokenPrecomputation{sk.params.digest(), exact::mat_mul(s, sk.m1_inv)};
}

Token token_gen_online(const SecretKey& sk, std::span<const std::int64_t> y, const ExtensionPlan& plan,
                       TokenPrecomputation&& pre, RandomSource& rng) {
    check_template(sk, y, plan);
    if (pre.params_digest != sk.params.digest()) {
        throw ParamsMismatch("token precomputation belongs to a different key setup");
    }
    const Integer alpha = rng.uniform_positive(sk.params.rand_bitwidth);
    const Integer r_y = rng.uniform_signed(sk.params.rand_bitwidth);
    const auto y_perm = permuted(sk, plan.query_extend(y, alpha, r_y));
    TokenPrecomputation consumed = std::move(pre);
    return finish_token(sk, y_perm, consumed.masked_inverse);
}

// --- Decryption -----------------------------------------------------------

Decision decrypt(const Ciphertext& c, const Token& t, AcceptWhen accept_when) {
    if (c.params_digest != t.params_digest) {
        throw ParamsMismatch("ciphertext and token come from different setups");
    }
    if (!c.c.is_square() || !t.t.is_square() || c.c.rows() != t.t.rows()) {
        throw DimensionMismatch("ciphertext and token dimensions differ");
    }
    // The denominator is positive, so the sign of the trace is the sign of
    // its numerator.
    const int sign = sgn(exact::trace_of_product(c.c, t.t));
    return Decision{accept_when == AcceptWhen::NonPositive ? sign <= 0 : sign >= 0};
}

// --- Files ----------------------------------------------------------------

Bytes serialize_key(const SecretKey& sk) {
    ByteWriter w;
    w.magic("TPEK");
    w.u8(kFormatVersion);
    write_params(w, sk.params);
    write_matrix(w, sk.m1);
    write_matrix(w, sk.m2);
    write_matrix(w, sk.m1_inv);
    write_matrix(w, sk.m2_inv);
    write_permutation(w, sk.perm);
    return w.take();
}

SecretKey deserialize_key(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("TPEK");
    if (r.u8() != kFormatVersion) {
        throw FormatError("unsupported key format version");
    }
    Params params = read_params(r);
    Matrix m1 = read_matrix(r);
    Matrix m2 = read_matrix(r);
    Matrix m1_inv = read_matrix(r);
    Matrix m2_inv = read_matrix(r);
    Permutation perm = read_permutation(r);
    r.expect_end();
    for (const Matrix* m : {&m1, &m2, &m1_inv, &m2_inv}) {
        if (m->rows() != params.pad || m->cols() != params.pad) {
            throw FormatError("key matrix does not match the padded dimension");
        }
    }
    if (perm.size() != params.pad) {
        throw FormatError("key permutation does not match the padded dimension");
    }
    return SecretKey{params, std::move(m1), std::move(m2), std::move(m1_inv), std::move(m2_inv),
                     std::move(perm)};
}

namespace {

void write_tagged(ByteWriter& w, const char* magic, const Digest& digest, const Matrix& m) {
    w.magic(magic);
    w.u8(kFormatVersion);
    w.raw(digest);
    write_matrix(w, m);
}

std::pair<Digest, Matrix> read_tagged(ByteReader& r, const char* magic) {
    r.expect_magic(magic);
    if (r.u8() != kFormatVersion) {
        throw FormatError(std::string("unsupported ") + magic + " version");
    }
    Digest d{};
    auto raw = r.raw(d.size());
    std::copy(raw.begin(), raw.end(), d.begin());
    Matrix m = read_matrix(r);
    if (!m.is_square()) {
        throw FormatError(std::string(magic) + " payload is not square");
    }
    return {d, std::move(m)};
}

} // namespace

Bytes serialize_ciphertext(const Ciphertext& c) {
    ByteWriter w;
    write_tagged(w, "TPEC", c.params_digest, c.c);
    return w.take();
}

Ciphertext read_ciphertext(ByteReader& r) {
    auto [d, m] = read_tagged(r, "TPEC");
    return Ciphertext{d, std::move(m)};
}

Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    auto c = read_ciphertext(r);
    r.expect_end();
    return c;
}

Bytes serialize_token(const Token& t) {
    ByteWriter w;
    write_tagged(w, "TPET", t.params_digest, t.t);
    return w.take();
}

Token read_token(ByteReader& r) {
    auto [d, m] = read_tagged(r, "TPET");
    return Token{d, std::move(m)};
}

Token deserialize_token(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    auto t = read_token(r);
    r.expect_end();
    return t;
}

} // namespace tpe
