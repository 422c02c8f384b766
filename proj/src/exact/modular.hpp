#ifndef TPE_SRC_EXACT_MODULAR_HPP
#define TPE_SRC_EXACT_MODULAR_HPP

// Word-size modular arithmetic for the multi-modular routines. Internal.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tpe::exact::detail {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Montgomery arithmetic modulo an odd prime p < 2^62.
class MontgomeryField {
public:
    explicit MontgomeryField(u64 p);

    u64 modulus() const { return p_; }

    u64 to_mont(u64 a) const { return mul(a % p_, r2_); }
    u64 from_mont(u64 a) const { return reduce(a); }

    u64 mul(u64 a, u64 b) const { return reduce(static_cast<u128>(a) * b); }
    u64 add(u64 a, u64 b) const {
        u64 s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    u64 sub(u64 a, u64 b) const {
        const u64 d = a - b;
        return d + (p_ & (u64{0} - static_cast<u64>(a < b)));
    }
    u64 pow(u64 base, u64 e) const;
    u64 inv(u64 a) const { return pow(a, p_ - 2); }
    u64 one() const { return one_; }

    // Multiplier with a precomputed quotient, for many products by one
    // plain (non-Montgomery) w < p. The product keeps the other operand's form.
    struct Fixed {
        u64 w;
        u64 quotient; // floor(w * 2^64 / p)
    };
    Fixed fixed(u64 plain_w) const {
        return Fixed{plain_w, static_cast<u64>((static_cast<u128>(plain_w) << 64) / p_)};
    }
    u64 mul_fixed(const Fixed& w, u64 x) const {
        const u64 q = static_cast<u64>((static_cast<u128>(w.quotient) * x) >> 64);
        const u64 r = w.w * x - q * p_;
        return r - (p_ & (u64{0} - static_cast<u64>(r >= p_)));
    }

private:
    u64 reduce(u128 t) const {
        const u64 m = static_cast<u64>(t) * neg_inv_;
        const u64 u = static_cast<u64>((t + static_cast<u128>(m) * p_) >> 64);
        return u >= p_ ? u - p_ : u;
    }

    u64 p_;
    u64 neg_inv_; // -p^{-1} mod 2^64
    u64 r2_;      // 2^128 mod p
    u64 one_;     // 2^64 mod p
};

// The i-th prime below 2^62, descending. Thread-safe, grows on demand.
u64 nth_large_prime(std::size_t i);

// The i-th prime below 2^50, descending. Products of two residues fit in
// 100 bits, so 2^28 of them can be summed in 128 bits before reducing.
u64 nth_product_prime(std::size_t i);

// c = a * b mod p for row-major residue matrices (n x k times k x m).
void mul_mod(const std::vector<u64>& a, const std::vector<u64>& b, std::vector<u64>& c, std::size_t n,
             std::size_t k, std::size_t m, u64 p);

// In-place Gauss-Jordan inversion of a dim x dim matrix given in Montgomery
// form. Returns the determinant in Montgomery form; zero means singular and
// the contents of `a` are then unspecified.
u64 invert_in_place(const MontgomeryField& f, std::vector<u64>& a, std::size_t dim);

// Determinant only (Montgomery form); `a` is consumed.
u64 determinant_in_place(const MontgomeryField& f, std::vector<u64>& a, std::size_t dim);

} // namespace tpe::exact::detail

#endif // TPE_SRC_EXACT_MODULAR_HPP
