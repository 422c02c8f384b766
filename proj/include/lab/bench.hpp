#ifndef TPE_LAB_BENCH_HPP
#define TPE_LAB_BENCH_HPP

// Timing harness: per (n, phase), one warm-up run and then the median of
// `samples` runs on a steady clock, single-threaded, inner-product plan.
// token_online times only the work after the template is known: S_y M1^-1
// is precomputed outside the timer.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tpe/scheme.hpp"

namespace tpe::lab {

enum class Phase { Keygen, Encrypt, TokenTotal, TokenOnline, Decrypt };

std::string to_string(Phase phase);
// Throws InvalidParameter for an unknown name.
Phase phase_from_string(const std::string& name);
std::vector<Phase> all_phases();

struct BenchRow {
    std::size_t n = 0;
    Phase phase = Phase::Decrypt;
    double median_ns = 0;
    std::size_t samples = 0;
};

struct BenchConfig {
    std::vector<std::size_t> n_list;
    std::vector<Phase> phases;
    std::size_t samples = 5;
    unsigned key_bitwidth = kDefaultKeyBitwidth;
    unsigned rand_bitwidth = kDefaultRandBitwidth;
};

// Throws InvalidParameter for samples < 5 or an n_list that is empty or
// not ascending.
std::vector<BenchRow> bench(const BenchConfig& config, RandomSource& rng);

// Header "n,phase,median_ns,samples".
void write_csv(std::ostream& out, std::span<const BenchRow> rows);

// Median wall time of `samples` calls after one warm-up call.
template <typename F>
double median_ns(std::size_t samples, F&& f);

} // namespace tpe::lab

#include <chrono>

#include "lab/stats.hpp"

namespace tpe::lab {

template <typename F>
double median_ns(std::size_t samples, F&& f) {
    f();
    std::vector<double> times;
    times.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const auto start = std::chrono::steady_clock::now();
        f();
        const auto stop = std::chrono::steady_clock::now();
        times.push_back(static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()));
    }
    return median(times);
}

} // namespace tpe::lab

#endif // TPE_LAB_BENCH_HPP
