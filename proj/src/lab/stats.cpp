#include "lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tpe::lab {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0 || successes > trials) {
        throw std::invalid_argument("wilson_interval needs 0 <= successes <= trials, trials > 0");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    // Clamp so the endpoints stay exact at p = 0 and p = 1.
    Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    out.lo = std::min(out.lo, p);
    out.hi = std::max(out.hi, p);
    return out;
}

ExperimentReport make_report(std::string name, std::size_t successes, std::size_t trials) {
    ExperimentReport r;
    r.name = std::move(name);
    r.trials = trials;
    r.successes = successes;
    r.success_rate = static_cast<double>(successes) / static_cast<double>(trials);
    r.advantage = std::abs(r.success_rate - 0.5);
    r.success_ci = wilson_interval(successes, trials);
    const double a = std::abs(r.success_ci.lo - 0.5);
    const double b = std::abs(r.success_ci.hi - 0.5);
    if (r.success_ci.contains(0.5)) {
        r.advantage_ci = {0.0, std::max(a, b)};
    } else {
        r.advantage_ci = {std::min(a, b), std::max(a, b)};
    }
    return r;
}

double median(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty sample");
    }
    std::vector<double> v(values.begin(), values.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    if (v.size() % 2 == 1) {
        return v[mid];
    }
    const double upper = v[mid];
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2;
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        return 0;
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
    if (values.size() < 2) {
        return 0;
    }
    const double m = mean(values);
    double s = 0;
    for (double v : values) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(values.size() - 1);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson needs two samples of equal length >= 2");
    }
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0) {
        return 0;
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace tpe::lab
