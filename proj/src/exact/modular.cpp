#include "modular.hpp"

#include <mutex>
#include <utility>

#include <gmpxx.h>

namespace tpe::exact::detail {

MontgomeryField::MontgomeryField(u64 p) : p_(p) {
    // Newton iteration for p^{-1} mod 2^64.
    u64 inv = p;
    for (int i = 0; i < 6; ++i) {
        inv *= 2 - p * inv;
    }
    neg_inv_ = ~inv + 1;
    const u128 r = (static_cast<u128>(1) << 64) % p;
    one_ = static_cast<u64>(r);
    r2_ = static_cast<u64>((r * r) % p);
}

u64 MontgomeryField::pow(u64 base, u64 e) const {
    u64 result = one_;
    while (e != 0) {
        if (e & 1) {
            result = mul(result, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    return result;
}

u64 nth_large_prime(std::size_t i) {
    static std::mutex mu;
    static std::vector<u64> primes;
    std::lock_guard lock(mu);
    while (primes.size() <= i) {
        mpz_class candidate = primes.empty() ? mpz_class((u64{1} << 62) - 1) : mpz_class(primes.back() - 2);
        while (mpz_probab_prime_p(candidate.get_mpz_t(), 30) == 0) {
            candidate -= 2;
        }
        primes.push_back(candidate.get_ui());
    }
    return primes[i];
}

u64 nth_product_prime(std::size_t i) {
    static std::mutex mu;
    static std::vector<u64> primes;
    std::lock_guard lock(mu);
    while (primes.size() <= i) {
        mpz_class candidate = primes.empty() ? mpz_class((u64{1} << 50) - 1) : mpz_class(primes.back() - 2);
        while (mpz_probab_prime_p(candidate.get_mpz_t(), 30) == 0) {
            candidate -= 2;
        }
        primes.push_back(candidate.get_ui());
    }
    return primes[i];
}

void mul_mod(const std::vector<u64>& a, const std::vector<u64>& b, std::vector<u64>& c, std::size_t n,
             std::size_t k, std::size_t m, u64 p) {
    // Transposed b keeps both dot-product operands contiguous.
    std::vector<u64> bt(k * m);
    for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t j = 0; j < m; ++j) {
            bt[j * k + l] = b[l * m + j];
        }
    }
    c.assign(n * m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const u64* row = &a[i * k];
        for (std::size_t j = 0; j < m; ++j) {
            const u64* col = &bt[j * k];
            u128 acc0 = 0;
            u128 acc1 = 0;
            std::size_t l = 0;
            for (; l + 1 < k; l += 2) {
                acc0 += static_cast<u128>(row[l]) * col[l];
                acc1 += static_cast<u128>(row[l + 1]) * col[l + 1];
            }
            if (l < k) {
                acc0 += static_cast<u128>(row[l]) * col[l];
            }
            c[i * m + j] = static_cast<u64>((acc0 + acc1) % p);
        }
    }
}

u64 invert_in_place(const MontgomeryField& f, std::vector<u64>& a, std::size_t dim) {
    std::vector<std::pair<std::size_t, std::size_t>> swaps;
    u64 det = f.one();
    bool negate = false;
    for (std::size_t k = 0; k < dim; ++k) {
        std::size_t pivot = k;
        while (pivot < dim && a[pivot * dim + k] == 0) {
            ++pivot;
        }
        if (pivot == dim) {
            return 0;
        }
        if (pivot != k) {
            for (std::size_t j = 0; j < dim; ++j) {
                std::swap(a[pivot * dim + j], a[k * dim + j]);
            }
            swaps.emplace_back(k, pivot);
            negate = !negate;
        }
        u64* row_k = &a[k * dim];
        const u64 piv = row_k[k];
        det = f.mul(det, piv);
        const u64 inv_piv = f.inv(piv);
        row_k[k] = f.one();
        const auto scale = f.fixed(f.from_mont(inv_piv));
        for (std::size_t j = 0; j < dim; ++j) {
            row_k[j] = f.mul_fixed(scale, row_k[j]);
        }
        for (std::size_t i = 0; i < dim; ++i) {
            if (i == k) {
                continue;
            }
            u64* row_i = &a[i * dim];
            const u64 factor = row_i[k];
            if (factor == 0) {
                continue;
            }
            row_i[k] = 0;
            const auto w = f.fixed(f.from_mont(factor));
            for (std::size_t j = 0; j < dim; ++j) {
                row_i[j] = f.sub(row_i[j], f.mul_fixed(w, row_k[j]));
            }
        }
    }
    // Row swaps during elimination become column swaps of the inverse.
    for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) {
        for (std::size_t i = 0; i < dim; ++i) {
            std::swap(a[i * dim + it->first], a[i * dim + it->second]);
        }
    }
    return negate ? f.sub(0, det) : det;
}

u64 determinant_in_place(const MontgomeryField& f, std::vector<u64>& a, std::size_t dim) {
    u64 det = f.one();
    bool negate = false;
    for (std::size_t k = 0; k < dim; ++k) {
        std::size_t pivot = k;
        while (pivot < dim && a[pivot * dim + k] == 0) {
            ++pivot;
        }
        if (pivot == dim) {
            return 0;
        }
        if (pivot != k) {
            for (std::size_t j = k; j < dim; ++j) {
                std::swap(a[pivot * dim + j], a[k * dim + j]);
            }
            negate = !negate;
        }
        const u64* row_k = &a[k * dim];
        det = f.mul(det, row_k[k]);
        const u64 inv_piv = f.inv(row_k[k]);
        for (std::size_t i = k + 1; i < dim; ++i) {
            u64* row_i = &a[i * dim];
            if (row_i[k] == 0) {
                continue;
            }
            const auto w = f.fixed(f.from_mont(f.mul(row_i[k], inv_piv)));
            for (std::size_t j = k; j < dim; ++j) {
                row_i[j] = f.sub(row_i[j], f.mul_fixed(w, row_k[j]));
            }
        }
    }
    return negate ? f.sub(0, det) : det;
}

} // namespace tpe::exact::detail
