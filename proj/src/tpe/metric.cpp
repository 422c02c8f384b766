#include "tpe/metric.hpp"

#include <charconv>
#include <fstream>

#include "tpe/error.hpp"

namespace tpe {

namespace {

Integer big(std::int64_t v) { return Integer(static_cast<long>(v)); }

Integer sum_of_squares(std::span<const std::int64_t> v) {
    Integer s = 0;
    for (auto e : v) {
        const Integer b = big(e);
        s += b * b;
    }
    return s;
}

void require_same_length(std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch("vectors of length " + std::to_string(x.size()) + " and " +
                                std::to_string(y.size()));
    }
}

// v scaled by s, followed by room for `extra` more slots.
std::vector<Integer> scaled(std::span<const std::int64_t> v, const Integer& s, std::size_t extra) {
    std::vector<Integer> out;
    out.reserve(v.size() + extra);
    for (auto e : v) {
        out.push_back(s * big(e));
    }
    return out;
}

std::vector<std::int64_t> signed_bits(std::span<const std::int64_t> v) {
    require_binary(v);
    std::vector<std::int64_t> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = v[i] == 0 ? -1 : 1;
    }
    return out;
}

} // namespace

void require_binary(std::span<const std::int64_t> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0 && v[i] != 1) {
            throw NotBinary("entry " + std::to_string(i) + " is " + std::to_string(v[i]) + ", expected 0 or 1");
        }
    }
}

ExtensionPlan plan_inner_product(std::int64_t theta) {
    const Integer t = big(theta);
    auto registered = [t](std::span<const std::int64_t> x, const Integer& beta, const Integer& r_x) {
        auto out = scaled(x, beta, 3);
        out.push_back(-beta * t);
        out.push_back(r_x);
        out.push_back(0);
        return out;
    };
    auto query = [](std::span<const std::int64_t> y, const Integer& alpha, const Integer& r_y) {
        auto out = scaled(y, alpha, 3);
        out.push_back(alpha);
        out.push_back(0);
        out.push_back(r_y);
        return out;
    };
    return ExtensionPlan("inner", 3, AcceptWhen::NonPositive, registered, query);
}

ExtensionPlan plan_euclidean(std::int64_t theta) {
    if (theta < 0) {
        throw InvalidParameter("euclidean threshold must be non-negative");
    }
    const Integer t2 = big(theta) * big(theta);
    auto registered = [t2](std::span<const std::int64_t> x, const Integer& beta, const Integer& r_x) {
        auto out = scaled(x, 2 * beta, 5);
        out.push_back(-beta * sum_of_squares(x));
        out.push_back(beta);
        out.push_back(beta * t2);
        out.push_back(r_x);
        out.push_back(0);
        return out;
    };
    auto query = [](std::span<const std::int64_t> y, const Integer& alpha, const Integer& r_y) {
        auto out = scaled(y, alpha, 5);
        out.push_back(alpha);
        out.push_back(-alpha * sum_of_squares(y));
        out.push_back(alpha);
        out.push_back(0);
        out.push_back(r_y);
        return out;
    };
    return ExtensionPlan("euclidean", 5, AcceptWhen::NonNegative, registered, query);
}

ExtensionPlan plan_hamming(std::int64_t theta, std::size_t n) {
    const Integer offset = 2 * big(theta) - Integer(static_cast<unsigned long>(n));
    auto check_len = [n](std::span<const std::int64_t> v) {
        if (v.size() != n) {
            throw DimensionMismatch("hamming plan built for length " + std::to_string(n) + ", got " +
                                    std::to_string(v.size()));
        }
    };
    auto registered = [offset, check_len](std::span<const std::int64_t> x, const Integer& beta,
                                          const Integer& r_x) {
        check_len(x);
        auto out = scaled(signed_bits(x), beta, 3);
        out.push_back(beta * offset);
        out.push_back(r_x);
        out.push_back(0);
        return out;
    };
    auto query = [check_len](std::span<const std::int64_t> y, const Integer& alpha, const Integer& r_y) {
        check_len(y);
        auto out = scaled(signed_bits(y), alpha, 3);
        out.push_back(alpha);
        out.push_back(0);
        out.push_back(r_y);
        return out;
    };
    return ExtensionPlan("hamming", 3, AcceptWhen::NonNegative, registered, query);
}

ExtensionPlan plan_for(const Params& params) {
    switch (params.metric) {
    case MetricKind::InnerProduct: return plan_inner_product(params.theta);
    case MetricKind::EuclideanSquared: return plan_euclidean(params.theta);
    case MetricKind::Hamming: return plan_hamming(params.theta, params.n);
    }
    throw InvalidParameter("unknown metric");
}

Integer oracle_inner(std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
    require_same_length(x, y);
    Integer s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += big(x[i]) * big(y[i]);
    }
    return s;
}

Integer oracle_euclid2(std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
    require_same_length(x, y);
    Integer s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Integer d = big(x[i]) - big(y[i]);
        s += d * d;
    }
    return s;
}

Integer oracle_hamming(std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
    require_same_length(x, y);
    require_binary(x);
    require_binary(y);
    long count = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        count += x[i] != y[i];
    }
    return Integer(count);
}

bool oracle_accept(MetricKind metric, std::span<const std::int64_t> x, std::span<const std::int64_t> y,
                   std::int64_t theta) {
    switch (metric) {
    case MetricKind::InnerProduct: return oracle_inner(x, y) <= big(theta);
    case MetricKind::EuclideanSquared: return oracle_euclid2(x, y) <= big(theta) * big(theta);
    case MetricKind::Hamming: return oracle_hamming(x, y) <= big(theta);
    }
    throw InvalidParameter("unknown metric");
}

// --- Template files -------------------------------------------------------

Template parse_template_line(const std::string& line) {
    Template out;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) {
            ++p;
        }
        if (p == end) {
            break;
        }
        std::int64_t v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r')) {
            throw FormatError("bad template entry in line: " + line.substr(0, 40));
        }
        out.push_back(v);
        p = next;
    }
    return out;
}

std::vector<Template> parse_templates(std::istream& in) {
    std::vector<Template> out;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        out.push_back(parse_template_line(line));
    }
    return out;
}

std::vector<Template> read_templates(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return parse_templates(in);
}

} // namespace tpe
