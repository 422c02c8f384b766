#ifndef TPE_LAB_STATS_HPP
#define TPE_LAB_STATS_HPP

#include <cstddef>
#include <span>
#include <string>

namespace tpe::lab {

struct Interval {
    double lo = 0;
    double hi = 0;

    bool contains(double v) const { return lo <= v && v <= hi; }
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson score interval for a binomial proportion; requires trials > 0.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

struct ExperimentReport {
    std::string name;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double success_rate = 0;
    // |success_rate - 1/2|, in [0, 1/2].
    double advantage = 0;
    Interval success_ci;
    // Image of success_ci under p -> |p - 1/2|.
    Interval advantage_ci;

    bool advantage_ci_contains_zero() const { return advantage_ci.lo == 0.0; }
};

ExperimentReport make_report(std::string name, std::size_t successes, std::size_t trials);

double median(std::span<const double> values);
double mean(std::span<const double> values);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance(std::span<const double> values);
// Pearson correlation; 0 when either side is constant.
double pearson(std::span<const double> a, std::span<const double> b);

} // namespace tpe::lab

#endif // TPE_LAB_STATS_HPP
