#ifndef TPE_TESTS_E2E_HPP
#define TPE_TESTS_E2E_HPP

// End-to-end service session shared by the unit tests and the acceptance
// binary: per-user keys, enrollment and authentication over loopback, a
// restart, and an audit of the server's files for key or template bytes.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include "passbio/client.hpp"
#include "passbio/server.hpp"
#include "passbio/service.hpp"
#include "passbio/store.hpp"
#include "tpe/metric.hpp"
#include "tpe/scheme.hpp"

namespace e2e {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        std::string pattern = (fs::temp_directory_path() / "tpe-test-XXXXXX").string();
        if (::mkdtemp(pattern.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = pattern;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// Offset in `hay` of a window of `w` bytes that also occurs in some needle,
// or nullopt. Rolling hash over every needle window, confirmed by memcmp.
inline std::optional<std::size_t> find_shared_window(const tpe::Bytes& hay, const std::vector<tpe::Bytes>& needles,
                                                     std::size_t w = 32) {
    constexpr std::uint64_t kBase = 0x100000001B3ull;
    std::uint64_t top = 1;
    for (std::size_t i = 0; i + 1 < w; ++i) {
        top *= kBase;
    }
    struct Entry {
        std::uint64_t hash;
        std::uint32_t needle;
        std::uint32_t offset;
        bool operator<(const Entry& o) const { return hash < o.hash; }
    };
    auto roll = [&](const tpe::Bytes& b, auto&& visit) {
        if (b.size() < w) {
            return;
        }
        std::uint64_t h = 0;
        for (std::size_t i = 0; i < w; ++i) {
            h = h * kBase + b[i];
        }
        visit(h, 0);
        for (std::size_t i = w; i < b.size(); ++i) {
            h = (h - b[i - w] * top) * kBase + b[i];
            visit(h, i - w + 1);
        }
    };
    std::vector<Entry> table;
    for (std::size_t k = 0; k < needles.size(); ++k) {
        roll(needles[k], [&](std::uint64_t h, std::size_t off) {
            table.push_back(Entry{h, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(off)});
        });
    }
    std::sort(table.begin(), table.end());
    std::optional<std::size_t> found;
    roll(hay, [&](std::uint64_t h, std::size_t off) {
        if (found) {
            return;
        }
        auto it = std::lower_bound(table.begin(), table.end(), Entry{h, 0, 0});
        for (; it != table.end() && it->hash == h; ++it) {
            const auto& nd = needles[it->needle];
            if (std::equal(hay.begin() + static_cast<std::ptrdiff_t>(off),
                           hay.begin() + static_cast<std::ptrdiff_t>(off + w),
                           nd.begin() + it->offset)) {
                found = off;
                return;
            }
        }
    });
    return found;
}

inline tpe::Bytes slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return tpe::Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct SessionConfig {
    std::vector<std::size_t> dims = {8, 32};
    std::size_t instances = 500; // split evenly over dims
    std::uint64_t seed = 1;
    unsigned key_bitwidth = tpe::kDefaultKeyBitwidth;
    unsigned rand_bitwidth = tpe::kDefaultRandBitwidth;
};

struct SessionReport {
    std::size_t instances = 0;
    std::size_t authenticated = 0;
    std::size_t wire_vs_local_mismatches = 0;
    std::size_t wire_vs_oracle_mismatches = 0;
    std::size_t restart_mismatches = 0;
    std::size_t unknown_id_accepts = 0;
    std::size_t repeated_token_bytes = 0;
    std::optional<std::size_t> db_leak;
    std::optional<std::size_t> log_leak;

    bool ok() const {
        return instances > 0 && wire_vs_local_mismatches == 0 && wire_vs_oracle_mismatches == 0 &&
               restart_mismatches == 0 && unknown_id_accepts == 0 && repeated_token_bytes == 0 && !db_leak &&
               !log_leak;
    }
};

struct User {
    std::string id;
    tpe::SecretKey sk;
    tpe::Template enrolled;
    tpe::Template probe;
    bool expected = false;
};

inline tpe::Template random_template(std::size_t n, tpe::RandomSource& rng) {
    tpe::Template v(n);
    for (auto& e : v) {
        e = static_cast<std::int64_t>(rng.uniform_below(256));
    }
    return v;
}

inline std::string template_text(const tpe::Template& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << (i ? " " : "") << t[i];
    }
    out << "\n";
    return out.str();
}

inline SessionReport run_session(const SessionConfig& cfg, const fs::path& dir) {
    using namespace tpe;
    auto rng = RandomSource::from_seed(cfg.seed);
    const fs::path db = dir / "server.db";
    const fs::path log_path = dir / "server.log";
    const fs::path client_dir = dir / "client";
    fs::create_directories(client_dir);

    // Client side: per-user key and template files, as the CLI would keep them.
    std::vector<User> users;
    std::vector<Bytes> secrets;
    const std::size_t per_dim = cfg.instances / cfg.dims.size();
    for (std::size_t n : cfg.dims) {
        for (std::size_t i = 0; i < per_dim; ++i) {
            auto x = random_template(n, rng);
            auto y = x;
            const auto spread = static_cast<std::int64_t>(rng.uniform_below(40));
            for (auto& e : y) {
                e += static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(2 * spread + 1))) - spread;
            }
            const auto theta = static_cast<std::int64_t>(rng.uniform_below(20 * n));
            auto params = setup(n, theta, MetricKind::EuclideanSquared, cfg.key_bitwidth, cfg.rand_bitwidth);
            User u{"user-" + std::to_string(users.size()), keygen(params, rng), x, y,
                   oracle_accept(MetricKind::EuclideanSquared, x, y, theta)};
            const Bytes key_bytes = serialize_key(u.sk);
            const std::string text = template_text(x) + template_text(y);
            write_file((client_dir / (u.id + ".key")).string(), key_bytes);
            std::ofstream(client_dir / (u.id + ".tpl")) << text;
            secrets.push_back(key_bytes);
            secrets.emplace_back(text.begin(), text.end());
            users.push_back(std::move(u));
        }
    }

    SessionReport report;
    report.instances = users.size();
    std::vector<passbio::Outcome> before;
    {
        auto log = std::make_shared<spdlog::logger>(
            "e2e", std::make_shared<spdlog::sinks::basic_file_sink_mt>(log_path.string(), true));
        log->flush_on(spdlog::level::info);
        passbio::Store store(db);
        passbio::Service service(store, log);
        passbio::Server server(service, "127.0.0.1:0");
        server.start();
        const std::string address = "127.0.0.1:" + std::to_string(server.port());
        passbio::Client client(address);
        client.ping();
        for (auto& u : users) {
            auto plan = plan_for(u.sk.params);
            auto ct = encrypt(u.sk, u.enrolled, plan, rng);
            client.enroll(u.id, MetricKind::EuclideanSquared, ct);
            auto token = token_gen(u.sk, u.probe, plan, rng);
            const auto wire = client.authenticate(u.id, token);
            const bool local = decrypt(ct, token, plan.accept_when()).accept;
            report.wire_vs_local_mismatches += (wire == passbio::Outcome::Authenticated) != local;
            report.wire_vs_oracle_mismatches += (wire == passbio::Outcome::Authenticated) != u.expected;
            report.authenticated += wire == passbio::Outcome::Authenticated;
            before.push_back(wire);
        }
        // Unknown id and fresh-token traffic on the first user.
        auto& u0 = users.front();
        auto plan0 = plan_for(u0.sk.params);
        auto t1 = token_gen(u0.sk, u0.enrolled, plan0, rng);
        auto t2 = token_gen(u0.sk, u0.enrolled, plan0, rng);
        report.repeated_token_bytes += serialize_token(t1) == serialize_token(t2);
        report.unknown_id_accepts += client.authenticate("nobody", t1) == passbio::Outcome::Authenticated;
        server.stop();
        spdlog::drop("e2e");
    }
    {
        auto log = std::make_shared<spdlog::logger>(
            "e2e", std::make_shared<spdlog::sinks::basic_file_sink_mt>(log_path.string(), false));
        log->flush_on(spdlog::level::info);
        passbio::Store store(db);
        passbio::Service service(store, log);
        passbio::Server server(service, "127.0.0.1:0");
        server.start();
        passbio::Client client("127.0.0.1:" + std::to_string(server.port()));
        for (std::size_t i = 0; i < users.size(); ++i) {
            auto& u = users[i];
            auto token = token_gen(u.sk, u.probe, plan_for(u.sk.params), rng);
            report.restart_mismatches += client.authenticate(u.id, token) != before[i];
        }
        server.stop();
    }
    report.db_leak = find_shared_window(slurp(db), secrets);
    report.log_leak = find_shared_window(slurp(log_path), secrets);
    return report;
}

} // namespace e2e

#endif // TPE_TESTS_E2E_HPP
