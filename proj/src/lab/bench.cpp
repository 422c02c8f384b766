#include "lab/bench.hpp"

#include <algorithm>
#include <optional>

#include "tpe/error.hpp"
#include "tpe/metric.hpp"

namespace tpe::lab {

std::string to_string(Phase phase) {
    switch (phase) {
    case Phase::Keygen: return "keygen";
    case Phase::Encrypt: return "encrypt";
    case Phase::TokenTotal: return "token_total";
    case Phase::TokenOnline: return "token_online";
    case Phase::Decrypt: return "decrypt";
    }
    return "unknown";
}

Phase phase_from_string(const std::string& name) {
    for (Phase p : all_phases()) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw InvalidParameter("unknown bench phase '" + name + "'");
}

std::vector<Phase> all_phases() {
    return {Phase::Keygen, Phase::Encrypt, Phase::TokenTotal, Phase::TokenOnline, Phase::Decrypt};
}

std::vector<BenchRow> bench(const BenchConfig& config, RandomSource& rng) {
    if (config.samples < 5) {
        throw InvalidParameter("bench needs at least 5 samples");
    }
    if (config.n_list.empty() || !std::is_sorted(config.n_list.begin(), config.n_list.end())) {
        throw InvalidParameter("bench n_list must be non-empty and ascending");
    }
    std::vector<BenchRow> rows;
    for (std::size_t n : config.n_list) {
        const Params params = setup(n, 0, MetricKind::InnerProduct, config.key_bitwidth, config.rand_bitwidth);
        const ExtensionPlan plan = plan_inner_product(0);
        const SecretKey sk = keygen(params, rng);
        Template x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<std::int64_t>(rng.uniform_below(511)) - 255;
            y[i] = static_cast<std::int64_t>(rng.uniform_below(511)) - 255;
        }
        std::optional<Ciphertext> c;
        std::optional<Token> t;

        for (Phase phase : config.phases) {
            double ns = 0;
            switch (phase) {
            case Phase::Keygen:
                ns = median_ns(config.samples, [&] { (void)keygen(params, rng); });
                break;
            case Phase::Encrypt:
                ns = median_ns(config.samples, [&] { c = encrypt(sk, x, plan, rng); });
                break;
            case Phase::TokenTotal:
                ns = median_ns(config.samples, [&] { t = token_gen(sk, y, plan, rng); });
                break;
            case Phase::TokenOnline: {
                // Only the online call is timed; each sample gets its own
                // precomputation.
                std::vector<double> times;
                for (std::size_t i = 0; i <= config.samples; ++i) {
                    TokenPrecomputation pre = precompute_token(sk, rng);
                    const auto start = std::chrono::steady_clock::now();
                    t = token_gen_online(sk, y, plan, std::move(pre), rng);
                    const auto stop = std::chrono::steady_clock::now();
                    if (i > 0) {
                        times.push_back(static_cast<double>(
                            std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()));
                    }
                }
                ns = median(times);
                break;
            }
            case Phase::Decrypt:
                if (!c) {
                    c = encrypt(sk, x, plan, rng);
                }
                if (!t) {
                    t = token_gen(sk, y, plan, rng);
                }
                ns = median_ns(config.samples, [&] { (void)decrypt(*c, *t, plan.accept_when()); });
                break;
            }
            rows.push_back({n, phase, ns, config.samples});
        }
    }
    return rows;
}

void write_csv(std::ostream& out, std::span<const BenchRow> rows) {
    out << "n,phase,median_ns,samples\n";
    for (const auto& r : rows) {
        out << r.n << ',' << to_string(r.phase) << ',' << static_cast<std::uint64_t>(r.median_ns) << ','
            << r.samples << '\n';
    }
}

} // namespace tpe::lab
