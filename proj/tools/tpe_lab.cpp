// tpe-lab: attack experiments and timing.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "lab/attacks.hpp"
#include "lab/bench.hpp"
#include "lab/distinguishers.hpp"
#include "lab/experiments.hpp"
#include "tpe/metric.hpp"

namespace {

using namespace tpe::lab;
using tpe::RandomSource;

RandomSource make_rng(const std::string& seed_hex) {
    return seed_hex.empty() ? RandomSource::from_os() : RandomSource::from_hex(seed_hex);
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw tpe::Error("cannot write " + path);
    }
    return out;
}

void print_report(const ExperimentReport& r) {
    std::cout << std::left << std::setw(24) << r.name << " trials=" << r.trials << " successes=" << r.successes
              << std::fixed << std::setprecision(4) << " advantage=" << r.advantage << " ci=[" << r.advantage_ci.lo
              << ", " << r.advantage_ci.hi << "]" << (r.advantage_ci_contains_zero() ? " null" : " DISTINGUISHES")
              << "\n";
}

void report_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
    out << "distinguisher,trials,successes,advantage,adv_ci_lo,adv_ci_hi\n";
    for (const auto& r : reports) {
        out << r.name << ',' << r.trials << ',' << r.successes << ',' << r.advantage << ',' << r.advantage_ci.lo
            << ',' << r.advantage_ci.hi << '\n';
    }
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) {
        out.push_back(std::stoul(part));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TPE attack experiments and benchmarks"};
    app.require_subcommand(1);

    std::size_t trials = 10000, n = 8, calibration = 400, threads = 1, samples = 5;
    std::string seed, csv, which = "all", mode = "all", n_list = "64,128,256", phases = "all";
    std::string x_str = "1 0", probes_str = "1 0;-1 0";
    std::int64_t theta = 0;
    unsigned key_bits = tpe::kDefaultKeyBitwidth, rand_bits = tpe::kDefaultRandBitwidth;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Hex seed");
        sub->add_option("--csv", csv, "Write results as CSV");
        sub->add_option("--key-bits", key_bits);
        sub->add_option("--rand-bits", rand_bits);
    };

    auto* passive = app.add_subcommand("attack-passive", "Passive indistinguishability experiment");
    passive->add_option("--trials", trials);
    passive->add_option("--n", n);
    passive->add_option("--distinguisher", which, "all | random | always-one | backdoor | mean | variance | "
                                                  "entry-correlation | rank");
    passive->add_option("--calibration", calibration, "Calibration runs per side");
    passive->add_option("--threads", threads);
    common(passive);

    auto* active = app.add_subcommand("attack-active", "Active indistinguishability experiment");
    active->add_option("--trials", trials);
    active->add_option("--n", n);
    active->add_option("--distinguisher", which, "all | random | backdoor | linear-regression");
    active->add_option("--threads", threads);
    common(active);

    auto* registration = app.add_subcommand("attack-registration", "Registration attack on the Euclidean plan");
    registration->add_option("--trials", trials);
    registration->add_option("--n", n);
    registration->add_option("--mode", mode, "all | disabled | shared-scale | fresh");
    common(registration);

    auto* oracle = app.add_subcommand("oracle-demo", "Sign leak of the decryption value");
    oracle->add_option("--x", x_str, "Template, whitespace-separated");
    oracle->add_option("--theta", theta);
    oracle->add_option("--probes", probes_str, "Probes separated by ';'");
    common(oracle);

    auto* bench_cmd = app.add_subcommand("bench", "Phase timings");
    bench_cmd->add_option("--n", n_list, "Comma-separated ascending sizes");
    bench_cmd->add_option("--phases", phases, "all or comma-separated phase names");
    bench_cmd->add_option("--samples", samples);
    common(bench_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        auto rng = make_rng(seed);
        ExperimentConfig config;
        config.n = n;
        config.key_bitwidth = key_bits;
        config.rand_bitwidth = rand_bits;
        config.threads = threads;

        if (*passive) {
            std::vector<std::unique_ptr<PassiveAdversary>> advs;
            auto want = [&](const std::string& name) { return which == "all" || which == name; };
            if (want("random")) advs.push_back(std::make_unique<RandomGuess>());
            if (want("always-one")) advs.push_back(std::make_unique<AlwaysOne>());
            if (want("backdoor")) advs.push_back(std::make_unique<HarnessBackdoor>());
            for (const char* name : {"mean", "variance", "entry-correlation"}) {
                if (!want(name)) {
                    continue;
                }
                std::unique_ptr<CalibratedPassive> a;
                if (std::string(name) == "mean") a = std::make_unique<MeanDistinguisher>();
                if (std::string(name) == "variance") a = std::make_unique<VarianceDistinguisher>();
                if (std::string(name) == "entry-correlation") a = std::make_unique<CorrelationDistinguisher>();
                a->calibrate(config, calibration, rng);
                advs.push_back(std::move(a));
            }
            if (want("rank")) advs.push_back(std::make_unique<RankDistinguisher>());
            if (advs.empty()) {
                throw tpe::InvalidParameter("unknown distinguisher '" + which + "'");
            }
            std::vector<ExperimentReport> reports;
            for (const auto& a : advs) {
                reports.push_back(run_passive_experiment(*a, trials, config, rng));
                print_report(reports.back());
            }
            if (!csv.empty()) {
                auto out = open_csv(csv);
                report_csv(out, reports);
            }
        } else if (*active) {
            std::vector<std::unique_ptr<ActiveAdversary>> advs;
            auto want = [&](const std::string& name) { return which == "all" || which == name; };
            if (want("random")) advs.push_back(std::make_unique<ActiveRandomGuess>());
            if (want("backdoor")) advs.push_back(std::make_unique<ActiveBackdoor>());
            if (want("linear-regression")) advs.push_back(std::make_unique<LinearRegressionDistinguisher>());
            if (advs.empty()) {
                throw tpe::InvalidParameter("unknown distinguisher '" + which + "'");
            }
            std::vector<ExperimentReport> reports;
            for (const auto& a : advs) {
                reports.push_back(run_active_experiment(*a, trials, config, rng));
                print_report(reports.back());
            }
            if (!csv.empty()) {
                auto out = open_csv(csv);
                report_csv(out, reports);
            }
        } else if (*registration) {
            std::vector<TypeOneMode> modes;
            for (auto m : {TypeOneMode::Disabled, TypeOneMode::SharedScale, TypeOneMode::Fresh}) {
                if (mode == "all" || mode == to_string(m)) {
                    modes.push_back(m);
                }
            }
            if (modes.empty()) {
                throw tpe::InvalidParameter("unknown mode '" + mode + "'");
            }
            std::ofstream out;
            if (!csv.empty()) {
                out = open_csv(csv);
                out << "mode,trial,coordinate,truth,estimate,ratio,relative_error\n";
            }
            for (auto m : modes) {
                RegistrationConfig rc{n, trials, m, 1000, key_bits, rand_bits};
                const auto stats = registration_attack_check(rc, rng);
                std::cout << std::left << std::setw(14) << to_string(m) << " trials=" << stats.trials.size()
                          << " exact=" << stats.exact_recoveries << " error>10%=" << stats.large_errors
                          << " ratio_constant=" << (stats.ratio_constant ? "yes" : "no") << "\n";
                if (out) {
                    for (std::size_t i = 0; i < stats.trials.size(); ++i) {
                        const auto& t = stats.trials[i];
                        out << to_string(m) << ',' << i << ',' << t.coordinate << ',' << t.truth << ','
                            << t.estimate.get_d() << ',' << t.ratio.get_d() << ',' << t.relative_error << '\n';
                    }
                }
            }
        } else if (*oracle) {
            const auto x = tpe::parse_template_line(x_str);
            std::vector<tpe::Template> probes;
            std::stringstream in(probes_str);
            std::string part;
            while (std::getline(in, part, ';')) {
                probes.push_back(tpe::parse_template_line(part));
            }
            const auto out = decryption_oracle_demo(x, theta, probes, rng, key_bits, rand_bits);
            for (std::size_t i = 0; i < out.size(); ++i) {
                std::cout << "probe " << i << ": sign " << (out[i].sign > 0 ? "+" : out[i].sign < 0 ? "-" : "0")
                          << "  |gamma| ~ 2^" << std::fixed << std::setprecision(1)
                          << (out[i].sign == 0 ? 0.0 : std::log2(std::abs(out[i].gamma.get_d()))) << "\n";
            }
        } else if (*bench_cmd) {
            BenchConfig bc;
            bc.n_list = parse_sizes(n_list);
            bc.samples = samples;
            bc.key_bitwidth = key_bits;
            bc.rand_bitwidth = rand_bits;
            if (phases == "all") {
                bc.phases = all_phases();
            } else {
                std::stringstream in(phases);
                std::string part;
                while (std::getline(in, part, ',')) {
                    bc.phases.push_back(phase_from_string(part));
                }
            }
            const auto rows = bench(bc, rng);
            write_csv(std::cout, rows);
            if (!csv.empty()) {
                auto out = open_csv(csv);
                write_csv(out, rows);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
