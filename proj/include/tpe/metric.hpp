#ifndef TPE_METRIC_HPP
#define TPE_METRIC_HPP

// Extension plans that turn a distance threshold into the sign of x'.y'.
//
//   inner      x' = (b x, -b t, r_x, 0)                y' = (a y, a, 0, r_y)
//              x'.y' = ab (x.y - t)                     accept when <= 0
//   euclidean  x' = (2b x, -b|x|^2, b, b t^2, r_x, 0)  y' = (a y, a, -a|y|^2, a, 0, r_y)
//              x'.y' = ab (t^2 - |x - y|^2)             accept when >= 0
//   hamming    bits remapped 0 -> -1, then
//              x' = (b x, b (2t - n), r_x, 0)          y' = (a y, a, 0, r_y)
//              x'.y' = 2ab (t - d_H(x, y))              accept when >= 0

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "tpe/scheme.hpp"

namespace tpe {

ExtensionPlan plan_inner_product(std::int64_t theta);
// theta is the distance threshold; the plan embeds theta^2.
ExtensionPlan plan_euclidean(std::int64_t theta);
// Templates are {0,1} vectors of length n; anything else throws NotBinary.
ExtensionPlan plan_hamming(std::int64_t theta, std::size_t n);

// The plan matching params.metric with params.theta.
ExtensionPlan plan_for(const Params& params);

Integer oracle_inner(std::span<const std::int64_t> x, std::span<const std::int64_t> y);
Integer oracle_euclid2(std::span<const std::int64_t> x, std::span<const std::int64_t> y);
Integer oracle_hamming(std::span<const std::int64_t> x, std::span<const std::int64_t> y);

// Plaintext reference decision: x.y <= t, |x-y|^2 <= t^2, d_H <= t.
bool oracle_accept(MetricKind metric, std::span<const std::int64_t> x, std::span<const std::int64_t> y,
                   std::int64_t theta);

void require_binary(std::span<const std::int64_t> v);

// One template per line, whitespace-separated decimal integers. Blank lines
// and lines starting with '#' are skipped.
std::vector<Template> parse_templates(std::istream& in);
std::vector<Template> read_templates(const std::string& path);
Template parse_template_line(const std::string& line);

} // namespace tpe

#endif // TPE_METRIC_HPP
