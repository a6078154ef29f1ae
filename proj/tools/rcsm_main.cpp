// Command-line front end: Monte Carlo sweeps, runtime benchmarks, analytic
// curves, and variational convergence traces, all emitted as CSV.

#include <charconv>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rcsm/harness.hpp"

namespace {

double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw rcsm::ArgumentError(what + ": '" + text + "' is not a number");
    }
    return v;
}

// "name=v1,v2,..." -> SweepSpec
rcsm::SweepSpec parse_sweep(const std::string& text) {
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw rcsm::ArgumentError("--sweep expects name=v1,v2,... , got '" + text + "'");
    }
    rcsm::SweepSpec spec;
    spec.name = text.substr(0, eq);
    std::size_t pos = eq + 1;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) {
            comma = text.size();
        }
        const std::string token = text.substr(pos, comma - pos);
        if (token.empty()) {
            throw rcsm::ArgumentError("--sweep has an empty value in '" + text + "'");
        }
        spec.values.push_back(parse_number(token, "--sweep value"));
        pos = comma + 1;
    }
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Index-detection simulator for repetition-coded spatial modulation"};
    app.fallthrough(); // subcommands pick the mode; every flag lives on the parent
    app.set_config("--config", "", "Flat key=value file mirroring the flags; flags override it");

    rcsm::ExperimentConfig cfg;
    std::string detector_text = "cavi";
    std::string sweep_text;
    std::string out_path;

    app.add_option("--n", cfg.dims.n_rx, "Receive antennas N")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--l", cfg.dims.n_tx, "Transmit antennas L")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--k", cfg.dims.n_active, "Active antennas K per slot")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--m", cfg.dims.slot_len, "Repetitions M (symbol vectors per slot)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--snr-db", cfg.snr_db, "Per-symbol SNR in dB")->capture_default_str();
    app.add_option("--order", cfg.order, "QAM order")
        ->check(CLI::IsMember({4, 16}))
        ->capture_default_str();
    app.add_option("--detector", detector_text,
                   "correlator | ml-ga | cavi | exact-mixture")
        ->check(CLI::IsMember({"correlator", "ml-ga", "cavi", "exact-mixture"}))
        ->capture_default_str();
    app.add_option("--mu", cfg.step_size, "Variational damping factor in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_option("--iters", cfg.iterations, "Variational coordinate sweeps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--trials", cfg.trials, "Monte Carlo trials per sweep point")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Base RNG seed")->capture_default_str();
    app.add_option("--sweep", sweep_text,
                   "Swept parameter as name=v1,v2,... (mu, iters, snr-db, m, l, k, n)");
    app.add_option("--threads", cfg.threads, "Worker cap; 0 = hardware concurrency")
        ->capture_default_str();
    app.add_flag("--all-subsets", cfg.all_subsets,
                 "Draw supports uniformly from all C(L,K) subsets, not the 2^B addressable ones");
    app.add_option("--out", out_path, "Output CSV path")->required();

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "Monte Carlo error-rate sweep");
    CLI::App* cmd_bench =
        app.add_subcommand("bench", "Runtime benchmark (single-threaded, median headline)");
    CLI::App* cmd_analyze =
        app.add_subcommand("analyze", "Closed-form error estimates, no simulation");
    CLI::App* cmd_convergence = app.add_subcommand(
        "convergence", "Per-iteration activity-probability trajectory of one cavi trial");
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto kind = rcsm::detector_from_name(detector_text);
        if (!kind) {
            throw rcsm::ArgumentError("unknown detector '" + detector_text + "'");
        }
        cfg.detector = *kind;
        if (!sweep_text.empty()) {
            cfg.sweep = parse_sweep(sweep_text);
        }

        if (cmd_sweep->parsed()) {
            rcsm::emit_csv(rcsm::run_sweep(cfg), out_path);
        } else if (cmd_bench->parsed()) {
            rcsm::emit_csv(rcsm::run_bench(cfg), out_path);
        } else if (cmd_analyze->parsed()) {
            rcsm::emit_csv(rcsm::run_analysis(cfg), out_path);
        } else if (cmd_convergence->parsed()) {
            rcsm::emit_convergence_csv(rcsm::run_convergence(cfg), out_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
