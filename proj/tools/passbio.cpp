// passbio: key holder and service front end.
//
//   keygen       write a fresh secret key for (dim, theta, metric)
//   enroll       encrypt templates locally and register the ciphertexts
//   auth         build a token locally and ask the server for a decision
//   serve        run the authentication server
//   index-build  encrypt a keyword index
//   index-search search an encrypted index with a keyword query
//   wsum-enc     encrypt grade records
//   wsum-filter  filter encrypted grade records by a weighted-sum threshold

#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include "passbio/client.hpp"
#include "passbio/server.hpp"
#include "passbio/service.hpp"
#include "passbio/store.hpp"
#include "tpe/metric.hpp"
#include "tpe/search.hpp"

namespace {

using tpe::RandomSource;

RandomSource make_rng(const std::string& seed_hex) {
    return seed_hex.empty() ? RandomSource::from_os() : RandomSource::from_hex(seed_hex);
}

tpe::SecretKey load_key(const std::string& path) { return tpe::deserialize_key(tpe::read_file(path)); }

std::vector<tpe::Template> load_templates(const std::string& path, std::size_t n) {
    auto templates = tpe::read_templates(path);
    if (templates.empty()) {
        throw tpe::FormatError("no templates in " + path);
    }
    for (const auto& t : templates) {
        if (t.size() != n) {
            throw tpe::DimensionMismatch("template in " + path + " has " + std::to_string(t.size()) +
                                         " entries, key expects " + std::to_string(n));
        }
    }
    return templates;
}

std::vector<std::string> lines_of(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw tpe::Error("cannot open " + path);
    }
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos && line[line.find_first_not_of(" \t\r")] != '#') {
            out.push_back(line);
        }
    }
    return out;
}

std::vector<std::string> words_of(const std::string& s, char sep = ' ') {
    std::vector<std::string> out;
    std::string w;
    std::istringstream in(s);
    while (std::getline(in, w, sep)) {
        std::istringstream trim(w);
        std::string part;
        while (trim >> part) {
            out.push_back(part);
        }
    }
    return out;
}

passbio::PutMode parse_mode(const std::string& m) {
    if (m == "insert") return passbio::PutMode::Insert;
    if (m == "append") return passbio::PutMode::Append;
    if (m == "overwrite") return passbio::PutMode::Overwrite;
    throw tpe::InvalidParameter("unknown mode '" + m + "'");
}

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PassBio: encrypted biometric authentication"};
    app.require_subcommand(1);

    std::string key_path, template_path, id, server = "127.0.0.1:7878", db_path, seed, metric = "euclidean";
    std::string bind = "127.0.0.1:7878", log_path, mode = "insert";
    std::size_t dim = 0;
    std::int64_t theta = 0;
    unsigned key_bits = tpe::kDefaultKeyBitwidth, rand_bits = tpe::kDefaultRandBitwidth;

    auto* keygen = app.add_subcommand("keygen", "Generate a secret key");
    keygen->add_option("--key", key_path, "Output key file")->required();
    keygen->add_option("--dim", dim, "Template dimension")->required();
    keygen->add_option("--theta", theta, "Threshold")->required();
    keygen->add_option("--metric", metric, "inner | euclidean | hamming")
        ->check(CLI::IsMember({"inner", "euclidean", "hamming"}));
    keygen->add_option("--key-bits", key_bits, "Bit width of key matrix entries");
    keygen->add_option("--rand-bits", rand_bits, "Bit width of one-time randomness");
    keygen->add_option("--seed", seed, "Hex seed (testing only)");

    auto* enroll = app.add_subcommand("enroll", "Encrypt templates locally and register them");
    enroll->add_option("--key", key_path)->required();
    enroll->add_option("--template", template_path, "One template per line")->required();
    enroll->add_option("--id", id)->required();
    enroll->add_option("--server", server, "HOST:PORT");
    enroll->add_option("--mode", mode, "insert | append | overwrite")
        ->check(CLI::IsMember({"insert", "append", "overwrite"}));
    enroll->add_option("--seed", seed);

    auto* auth = app.add_subcommand("auth", "Authenticate with a fresh template");
    auth->add_option("--key", key_path)->required();
    auth->add_option("--template", template_path, "First line is used")->required();
    auth->add_option("--id", id)->required();
    auth->add_option("--server", server, "HOST:PORT");
    auth->add_option("--seed", seed);

    auto* serve = app.add_subcommand("serve", "Run the authentication server");
    serve->add_option("--db", db_path, "Store file")->required();
    serve->add_option("--bind", bind, "HOST:PORT; port 0 picks one");
    serve->add_option("--log", log_path, "Log file (default: stderr)");

    std::string universe_path, files_path, index_path, query, records_path, out_path, weights;
    auto* index_build = app.add_subcommand("index-build", "Encrypt a keyword index");
    index_build->add_option("--key", key_path)->required();
    index_build->add_option("--universe", universe_path, "One keyword per line")->required();
    index_build->add_option("--files", files_path, "Lines of: FILE_ID KEYWORD...")->required();
    index_build->add_option("--theta", theta, "Match when the overlap exceeds this")->required();
    index_build->add_option("--out", out_path)->required();
    index_build->add_option("--seed", seed);

    auto* index_search = app.add_subcommand("index-search", "Search an encrypted index");
    index_search->add_option("--key", key_path)->required();
    index_search->add_option("--index", index_path)->required();
    index_search->add_option("--query", query, "Comma-separated keywords")->required();
    index_search->add_option("--seed", seed);

    auto* wsum_enc = app.add_subcommand("wsum-enc", "Encrypt grade records");
    wsum_enc->add_option("--key", key_path)->required();
    wsum_enc->add_option("--records", records_path, "Lines of: RECORD_ID GRADE...")->required();
    wsum_enc->add_option("--out", out_path)->required();
    wsum_enc->add_option("--seed", seed);

    auto* wsum_filter = app.add_subcommand("wsum-filter", "Filter encrypted records by weighted sum");
    wsum_filter->add_option("--key", key_path)->required();
    wsum_filter->add_option("--records", records_path, "Encrypted record file")->required();
    wsum_filter->add_option("--weights", weights, "Whitespace-separated integers")->required();
    wsum_filter->add_option("--theta", theta, "Match when the weighted sum exceeds this")->required();
    wsum_filter->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*keygen) {
            auto rng = make_rng(seed);
            const auto params = tpe::setup(dim, theta, tpe::metric_from_string(metric), key_bits, rand_bits);
            tpe::write_file(key_path, tpe::serialize_key(tpe::keygen(params, rng)));
            std::cout << "wrote " << key_path << " (n=" << params.n << ", pad=" << params.pad << ")\n";
        } else if (*enroll) {
            auto rng = make_rng(seed);
            const auto sk = load_key(key_path);
            const auto plan = tpe::plan_for(sk.params);
            const auto templates = load_templates(template_path, sk.params.n);
            passbio::Client client(server);
            auto put = parse_mode(mode);
            for (const auto& t : templates) {
                client.enroll(id, sk.params.metric, tpe::encrypt(sk, t, plan, rng), put);
                put = passbio::PutMode::Append;
            }
            std::cout << "enrolled " << templates.size() << " template(s) for " << id << "\n";
        } else if (*auth) {
            auto rng = make_rng(seed);
            const auto sk = load_key(key_path);
            const auto templates = load_templates(template_path, sk.params.n);
            passbio::Client client(server);
            const auto outcome =
                client.authenticate(id, tpe::token_gen(sk, templates.front(), tpe::plan_for(sk.params), rng));
            std::cout << passbio::to_string(outcome) << "\n";
        } else if (*serve) {
            std::shared_ptr<spdlog::logger> log;
            if (!log_path.empty()) {
                log = spdlog::basic_logger_mt("passbio", log_path);
                log->flush_on(spdlog::level::info);
            }
            passbio::Store store(db_path);
            passbio::Service service(store, log);
            passbio::Server srv(service, bind);
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on port " << srv.port() << std::endl;
            srv.start();
            while (!g_stop) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            }
            srv.stop();
        } else if (*index_build) {
            auto rng = make_rng(seed);
            const auto sk = load_key(key_path);
            tpe::search::KeywordUniverse universe(lines_of(universe_path));
            if (universe.size() != sk.params.n) {
                throw tpe::DimensionMismatch("universe has " + std::to_string(universe.size()) +
                                             " keywords, key expects " + std::to_string(sk.params.n));
            }
            tpe::search::IndexFile index{universe, {}};
            for (const auto& line : lines_of(files_path)) {
                auto words = words_of(line);
                const std::string file_id = words.front();
                std::set<std::string> keywords(words.begin() + 1, words.end());
                index.entries.push_back(tpe::search::index_encrypt(sk, universe, file_id, keywords, theta, rng));
            }
            tpe::write_file(out_path, tpe::search::serialize_index(index));
            std::cout << "indexed " << index.entries.size() << " file(s)\n";
        } else if (*index_search) {
            auto rng = make_rng(seed);
            const auto sk = load_key(key_path);
            const auto index = tpe::search::deserialize_index(tpe::read_file(index_path));
            const auto words = words_of(query, ',');
            const auto token =
                tpe::search::query_token(sk, index.universe, std::set<std::string>(words.begin(), words.end()), rng);
            const auto result = tpe::search::search(index.entries, token);
            for (const auto& m : result.matches) {
                std::cout << m << "\n";
            }
            for (const auto& s : result.skipped) {
                std::cerr << "warning: skipped " << s << " (different key setup)\n";
            }
        } else if (*wsum_enc) {
            auto rng = make_rng(seed);
            const auto sk = load_key(key_path);
            std::vector<tpe::search::EncryptedRecord> records;
            for (const auto& line : lines_of(records_path)) {
                auto words = words_of(line);
                const std::string record_id = words.front();
                const auto grades = tpe::parse_template_line(line.substr(line.find(record_id) + record_id.size()));
                if (grades.size() != sk.params.n) {
                    throw tpe::DimensionMismatch("record " + record_id + " has " + std::to_string(grades.size()) +
                                                 " grades, key expects " + std::to_string(sk.params.n));
                }
                records.push_back(tpe::search::record_encrypt(sk, record_id, grades, rng));
            }
            tpe::write_file(out_path, tpe::search::serialize_records(records));
            std::cout << "encrypted " << records.size() << " record(s)\n";
        } else if (*wsum_filter) {
            auto rng = make_rng(seed);
            const auto sk = load_key(key_path);
            const auto records = tpe::search::deserialize_records(tpe::read_file(records_path));
            const auto w = tpe::parse_template_line(weights);
            const auto token = tpe::search::weighted_sum_token(sk, w, theta, rng);
            const auto result = tpe::search::weighted_sum_filter(records, token);
            for (const auto& m : result.matches) {
                std::cout << m << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
