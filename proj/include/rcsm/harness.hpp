#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rcsm/analysis.hpp"
#include "rcsm/detectors.hpp"

namespace rcsm {

enum class DetectorKind { correlator, ml_ga, cavi, exact_mixture };

const char* detector_name(DetectorKind k);
std::optional<DetectorKind> detector_from_name(std::string_view name);

// One swept parameter. Valid names: mu, iters, snr-db, m, l, k, n.
struct SweepSpec {
    std::string name;
    std::vector<double> values;
};

struct ExperimentConfig {
    SystemDims dims{10, 20, 2, 4}; // n_rx, n_tx, n_active, slot_len
    double snr_db = 10.0;
    std::size_t order = 4;
    DetectorKind detector = DetectorKind::cavi;
    double step_size = 0.5;     // variational damping
    std::size_t iterations = 10; // variational sweeps
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::size_t threads = 0;    // worker cap; 0 = hardware concurrency
    bool all_subsets = false;   // draw supports from all C(L, K) instead of the 2^B addressable ones
    std::optional<SweepSpec> sweep;
};

// Everything random about one trial, derived purely from (seed, trial_id) so a
// trial replays bit-identically on any thread and any detector sees the same
// channel, support, symbols, and noise as its comparison partner.
struct TrialInputs {
    ComplexMatrix channel;
    IndexVector support;
    SlotSignal sent;
    ReceivedSlot received;
};

TrialInputs make_trial_inputs(const ExperimentConfig& cfg, std::uint64_t trial_id);

struct TrialResult {
    std::uint64_t trial_id = 0;
    IndexVector true_support;
    IndexVector estimate;
    bool index_error = false;
    std::int64_t wall_time_ns = 0; // detector call only; input generation excluded
};

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t trial_id);

// 95% two-sided by default; pass the one-sided z for one-sided limits.
struct WilsonInterval {
    double lower = 0.0;
    double upper = 0.0;
    double center = 0.0;
    double halfwidth = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99OneSided = 2.3263478740408408;

WilsonInterval wilson_interval(std::size_t errors, std::size_t trials, double z = kZ95);

// One aggregated line of a sweep: the full configuration plus the measured
// error statistics, matching the CSV column order exactly.
struct SweepRow {
    std::string detector;
    std::size_t n_rx = 0;
    std::size_t n_tx = 0;
    std::size_t n_active = 0;
    std::size_t slot_len = 0;
    double snr_db = 0.0;
    std::size_t order = 0;
    double step_size = 0.0;
    std::size_t iterations = 0;
    std::string sweep_name;
    double sweep_value = 0.0;
    std::size_t trials = 0;
    std::size_t errors = 0;
    double error_rate = 0.0;
    double wilson_halfwidth = 0.0;
    std::optional<double> analytic_p_ie; // attached when the closed form applies
    double mean_runtime_ns = 0.0;
    double median_runtime_ns = 0.0;
    std::uint64_t seed = 0;
};

// Monte Carlo sweep over cfg.sweep. Trials are distributed over up to
// cfg.threads workers; aggregation order is fixed by trial id, so the output
// is identical for any worker count.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

// Timing-focused sweep: single-threaded, a few warm-up trials excluded, and
// the median runtime is the headline number. Detector must be cavi or ml_ga.
std::vector<SweepRow> run_bench(const ExperimentConfig& cfg);

// Closed-form error estimates over the sweep; no simulation. Rows carry
// trials = 0 and detector = "analytic".
std::vector<SweepRow> run_analysis(const ExperimentConfig& cfg);

std::string csv_header();
std::string csv_line(const SweepRow& row);

// Writes header plus one line per row. Throws IoError on failure.
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Single-trial variational trajectory, for convergence studies.
struct ConvergenceTrace {
    IndexVector true_support;
    IndexVector estimate;
    std::vector<std::vector<double>> q_per_iteration; // row 0 = initial q
};

ConvergenceTrace run_convergence(const ExperimentConfig& cfg, std::uint64_t trial_id = 0);

// Columns: iteration, q_1, ..., q_L.
void emit_convergence_csv(const ConvergenceTrace& trace, const std::string& path);

} // namespace rcsm
