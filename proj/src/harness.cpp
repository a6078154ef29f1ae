#include "rcsm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

namespace rcsm {

namespace {

// Each trial owns four RNG streams so the drawn channel, support, symbols, and
// noise do not depend on how much randomness any other component consumed.
enum class StreamPurpose : std::uint64_t { channel = 0, support = 1, symbols = 2, noise = 3 };

RngStream trial_stream(const ExperimentConfig& cfg, std::uint64_t trial_id, StreamPurpose p) {
    return RngStream(cfg.seed, trial_id * 4 + static_cast<std::uint64_t>(p));
}

std::uint64_t addressable_supports(const ExperimentConfig& cfg) {
    const std::size_t l = cfg.dims.n_tx;
    const std::size_t k = cfg.dims.n_active;
    if (cfg.all_subsets) {
        return subset_count(l, k);
    }
    const std::size_t bits = im_bit_count(l, k);
    if (bits >= 64) {
        throw CapacityError("addressable support count exceeds 64 bits");
    }
    return std::uint64_t{1} << bits;
}

DetectionResult dispatch_detector(const ExperimentConfig& cfg, const TrialInputs& inputs,
                                  const NoiseModel& noise) {
    switch (cfg.detector) {
        case DetectorKind::correlator:
            return correlator_detect(inputs.channel, inputs.received, cfg.dims.n_active);
        case DetectorKind::ml_ga:
            return ml_ga_detect(inputs.channel, inputs.received, cfg.dims.n_active, noise);
        case DetectorKind::exact_mixture:
            return exact_mixture_ml_detect(inputs.channel, inputs.received, cfg.dims.n_active,
                                           noise, qam_constellation(cfg.order));
        case DetectorKind::cavi: {
            CaviOptions opt;
            opt.step_size = cfg.step_size;
            opt.iterations = cfg.iterations;
            return cavi_detect(inputs.channel, inputs.received, cfg.dims.n_active, noise, opt);
        }
    }
    throw ArgumentError("unknown detector");
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const std::string& name,
                                   double value) {
    ExperimentConfig out = cfg;
    const auto as_count = [&](const char* what) {
        const double rounded = std::round(value);
        if (!(value > 0.0) || rounded != value) {
            throw ArgumentError(std::string("sweep over ") + what +
                                " needs a positive integer, got " + std::to_string(value));
        }
        return static_cast<std::size_t>(rounded);
    };
    if (name == "mu") {
        out.step_size = value;
    } else if (name == "iters") {
        out.iterations = as_count("iters");
    } else if (name == "snr-db") {
        out.snr_db = value;
    } else if (name == "m") {
        out.dims.slot_len = as_count("m");
    } else if (name == "l") {
        out.dims.n_tx = as_count("l");
    } else if (name == "k") {
        out.dims.n_active = as_count("k");
    } else if (name == "n") {
        out.dims.n_rx = as_count("n");
    } else {
        throw ArgumentError("unknown sweep parameter '" + name +
                            "' (valid: mu, iters, snr-db, m, l, k, n)");
    }
    return out;
}

// The closed form covers the Gaussian-approximation detectors under the
// constant-modulus constellation and needs at least one inactive antenna.
std::optional<double> analytic_estimate(const ExperimentConfig& cfg) {
    if (cfg.detector != DetectorKind::ml_ga && cfg.detector != DetectorKind::cavi) {
        return std::nullopt;
    }
    if (cfg.order != 4 || cfg.dims.n_active >= cfg.dims.n_tx) {
        return std::nullopt;
    }
    const double snr = std::pow(10.0, cfg.snr_db / 10.0);
    const double load = static_cast<double>(cfg.dims.n_active) / static_cast<double>(cfg.dims.n_rx);
    const AsymptoticParams a = make_asymptotic(snr, load, cfg.dims.n_rx);
    return approx_index_error(cfg.dims.n_tx, cfg.dims.n_active, a, cfg.dims.slot_len).p_ie;
}

SweepRow row_skeleton(const ExperimentConfig& cfg, const std::string& sweep_name,
                      double sweep_value) {
    SweepRow row;
    row.detector = detector_name(cfg.detector);
    row.n_rx = cfg.dims.n_rx;
    row.n_tx = cfg.dims.n_tx;
    row.n_active = cfg.dims.n_active;
    row.slot_len = cfg.dims.slot_len;
    row.snr_db = cfg.snr_db;
    row.order = cfg.order;
    row.step_size = cfg.step_size;
    row.iterations = cfg.iterations;
    row.sweep_name = sweep_name;
    row.sweep_value = sweep_value;
    row.seed = cfg.seed;
    return row;
}

// Timing columns are filled only when requested (bench mode): wall time is not
// reproducible, and sweep output must be byte-identical for a fixed seed.
SweepRow aggregate_trials(const ExperimentConfig& cfg, const std::string& sweep_name,
                          double sweep_value, const std::vector<TrialResult>& results,
                          bool with_timing) {
    SweepRow row = row_skeleton(cfg, sweep_name, sweep_value);
    row.trials = results.size();
    for (const TrialResult& r : results) {
        row.errors += r.index_error ? 1 : 0;
    }
    row.error_rate = results.empty()
                         ? 0.0
                         : static_cast<double>(row.errors) / static_cast<double>(results.size());
    row.wilson_halfwidth =
        results.empty() ? 0.0 : wilson_interval(row.errors, results.size()).halfwidth;
    if (with_timing && !results.empty()) {
        std::vector<std::int64_t> times;
        times.reserve(results.size());
        std::int64_t total_ns = 0;
        for (const TrialResult& r : results) {
            times.push_back(r.wall_time_ns);
            total_ns += r.wall_time_ns;
        }
        row.mean_runtime_ns = static_cast<double>(total_ns) / static_cast<double>(times.size());
        std::sort(times.begin(), times.end());
        const std::size_t mid = times.size() / 2;
        row.median_runtime_ns =
            (times.size() % 2 == 1)
                ? static_cast<double>(times[mid])
                : 0.5 * (static_cast<double>(times[mid - 1]) + static_cast<double>(times[mid]));
    }
    row.analytic_p_ie = analytic_estimate(cfg);
    return row;
}

// Runs trials [0, n) with a fixed assignment of results to slots, so the
// aggregate is the same whatever the worker count.
std::vector<TrialResult> run_trials(const ExperimentConfig& cfg, std::size_t n) {
    std::vector<std::optional<TrialResult>> slots(n);
    std::size_t workers = cfg.threads == 0
                              ? std::max<std::size_t>(1, std::thread::hardware_concurrency())
                              : cfg.threads;
    workers = std::min(workers, std::max<std::size_t>(1, n));

    if (workers <= 1) {
        for (std::size_t t = 0; t < n; ++t) {
            slots[t] = run_trial(cfg, t);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                try {
                    for (;;) {
                        const std::size_t t = next.fetch_add(1);
                        if (t >= n) {
                            return;
                        }
                        slots[t] = run_trial(cfg, t);
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next.store(n); // stop the other workers
                }
            });
        }
        for (std::thread& th : pool) {
            th.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    std::vector<TrialResult> results;
    results.reserve(n);
    for (std::optional<TrialResult>& s : slots) {
        results.push_back(std::move(*s));
    }
    return results;
}

void append_field(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

void append_field(std::string& out, std::uint64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

} // namespace

const char* detector_name(DetectorKind k) {
    switch (k) {
        case DetectorKind::correlator: return "correlator";
        case DetectorKind::ml_ga: return "ml-ga";
        case DetectorKind::cavi: return "cavi";
        case DetectorKind::exact_mixture: return "exact-mixture";
    }
    return "unknown";
}

std::optional<DetectorKind> detector_from_name(std::string_view name) {
    if (name == "correlator") return DetectorKind::correlator;
    if (name == "ml-ga") return DetectorKind::ml_ga;
    if (name == "cavi") return DetectorKind::cavi;
    if (name == "exact-mixture") return DetectorKind::exact_mixture;
    return std::nullopt;
}

TrialInputs make_trial_inputs(const ExperimentConfig& cfg, std::uint64_t trial_id) {
    cfg.dims.validate();
    const NoiseModel noise = NoiseModel::from_db(cfg.snr_db);
    const Constellation constellation = qam_constellation(cfg.order);

    RngStream h_stream = trial_stream(cfg, trial_id, StreamPurpose::channel);
    RngStream s_stream = trial_stream(cfg, trial_id, StreamPurpose::support);
    RngStream x_stream = trial_stream(cfg, trial_id, StreamPurpose::symbols);
    RngStream n_stream = trial_stream(cfg, trial_id, StreamPurpose::noise);

    // Unit average column energy: each of the n_rx entries has variance 1/n_rx.
    ComplexMatrix channel = sample_cscg(h_stream, cfg.dims.n_rx, cfg.dims.n_tx,
                                        1.0 / static_cast<double>(cfg.dims.n_rx));
    const std::uint64_t rank = s_stream.next_below(addressable_supports(cfg));
    IndexVector support = index_set_from_rank(rank, cfg.dims.n_tx, cfg.dims.n_active);
    SlotSignal sent = transmit_slot(support, constellation, cfg.dims.slot_len, x_stream);
    ReceivedSlot received = simulate_received_slot(channel, sent, noise, n_stream);
    return TrialInputs{std::move(channel), std::move(support), std::move(sent),
                       std::move(received)};
}

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t trial_id) {
    const TrialInputs inputs = make_trial_inputs(cfg, trial_id);
    const NoiseModel noise = NoiseModel::from_db(cfg.snr_db);

    const auto t0 = std::chrono::steady_clock::now();
    const DetectionResult det = dispatch_detector(cfg, inputs, noise);
    const auto t1 = std::chrono::steady_clock::now();

    TrialResult r{trial_id, inputs.support, det.estimate,
                  det.estimate != inputs.support,
                  std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()};
    return r;
}

WilsonInterval wilson_interval(std::size_t errors, std::size_t trials, double z) {
    if (trials == 0) {
        throw ArgumentError("wilson_interval: need at least one trial");
    }
    if (errors > trials) {
        throw ArgumentError("wilson_interval: errors exceed trials");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    WilsonInterval w;
    w.center = (p + z2 / (2.0 * n)) / denom;
    w.halfwidth = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    w.lower = std::max(0.0, w.center - w.halfwidth);
    w.upper = std::min(1.0, w.center + w.halfwidth);
    return w;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
    if (!cfg.sweep || cfg.sweep->values.empty()) {
        throw ArgumentError("run_sweep: configuration has no sweep");
    }
    if (cfg.trials == 0) {
        throw ArgumentError("run_sweep: need at least one trial");
    }
    std::vector<SweepRow> rows;
    rows.reserve(cfg.sweep->values.size());
    for (const double value : cfg.sweep->values) {
        const ExperimentConfig point = apply_sweep_value(cfg, cfg.sweep->name, value);
        point.dims.validate();
        const std::vector<TrialResult> results = run_trials(point, point.trials);
        rows.push_back(aggregate_trials(point, cfg.sweep->name, value, results, false));
    }
    return rows;
}

std::vector<SweepRow> run_bench(const ExperimentConfig& cfg) {
    if (cfg.detector != DetectorKind::cavi && cfg.detector != DetectorKind::ml_ga) {
        throw ArgumentError("run_bench: benchmark covers the cavi and ml-ga detectors");
    }
    if (!cfg.sweep || cfg.sweep->values.empty()) {
        throw ArgumentError("run_bench: configuration has no sweep");
    }
    if (cfg.trials == 0) {
        throw ArgumentError("run_bench: need at least one trial");
    }
    constexpr std::size_t kWarmup = 3;
    std::vector<SweepRow> rows;
    rows.reserve(cfg.sweep->values.size());
    for (const double value : cfg.sweep->values) {
        ExperimentConfig point = apply_sweep_value(cfg, cfg.sweep->name, value);
        point.dims.validate();
        point.threads = 1; // timing is meaningful only without contention
        for (std::size_t w = 0; w < kWarmup; ++w) {
            (void)run_trial(point, cfg.trials + w); // warm caches; excluded from stats
        }
        const std::vector<TrialResult> results = run_trials(point, point.trials);
        rows.push_back(aggregate_trials(point, cfg.sweep->name, value, results, true));
    }
    return rows;
}

std::vector<SweepRow> run_analysis(const ExperimentConfig& cfg) {
    if (!cfg.sweep || cfg.sweep->values.empty()) {
        throw ArgumentError("run_analysis: configuration has no sweep");
    }
    const std::string& name = cfg.sweep->name;
    if (name == "mu" || name == "iters") {
        throw ArgumentError("run_analysis: the closed form does not depend on '" + name + "'");
    }
    std::vector<SweepRow> rows;
    rows.reserve(cfg.sweep->values.size());
    for (const double value : cfg.sweep->values) {
        const ExperimentConfig point = apply_sweep_value(cfg, name, value);
        point.dims.validate();
        const double snr = std::pow(10.0, point.snr_db / 10.0);
        const double load =
            static_cast<double>(point.dims.n_active) / static_cast<double>(point.dims.n_rx);
        const AsymptoticParams a = make_asymptotic(snr, load, point.dims.n_rx);
        const ErrorEstimate e =
            approx_index_error(point.dims.n_tx, point.dims.n_active, a, point.dims.slot_len);
        SweepRow row = row_skeleton(point, name, value);
        row.detector = "analytic";
        row.analytic_p_ie = e.p_ie;
        rows.push_back(row);
    }
    return rows;
}

std::string csv_header() {
    return "detector,N,L,K,M,snr_db,order,mu,iters,sweep_name,sweep_value,trials,errors,"
           "error_rate,wilson_halfwidth,analytic_p_ie,mean_runtime_ns,median_runtime_ns,seed";
}

std::string csv_line(const SweepRow& row) {
    std::string out;
    out.reserve(192);
    out += row.detector;
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.n_rx));
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.n_tx));
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.n_active));
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.slot_len));
    out += ',';
    append_field(out, row.snr_db);
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.order));
    out += ',';
    append_field(out, row.step_size);
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.iterations));
    out += ',';
    out += row.sweep_name;
    out += ',';
    append_field(out, row.sweep_value);
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.trials));
    out += ',';
    append_field(out, static_cast<std::uint64_t>(row.errors));
    out += ',';
    append_field(out, row.error_rate);
    out += ',';
    append_field(out, row.wilson_halfwidth);
    out += ',';
    if (row.analytic_p_ie) {
        append_field(out, *row.analytic_p_ie);
    }
    out += ',';
    append_field(out, row.mean_runtime_ns);
    out += ',';
    append_field(out, row.median_runtime_ns);
    out += ',';
    append_field(out, row.seed);
    return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("emit_csv: cannot open '" + path + "' for writing");
    }
    out << csv_header() << '\n';
    for (const SweepRow& row : rows) {
        out << csv_line(row) << '\n';
    }
    out.flush();
    if (!out) {
        throw IoError("emit_csv: write to '" + path + "' failed");
    }
}

ConvergenceTrace run_convergence(const ExperimentConfig& cfg, std::uint64_t trial_id) {
    if (cfg.detector != DetectorKind::cavi) {
        throw ArgumentError("run_convergence: trajectories exist only for the cavi detector");
    }
    const TrialInputs inputs = make_trial_inputs(cfg, trial_id);
    const NoiseModel noise = NoiseModel::from_db(cfg.snr_db);
    CaviOptions opt;
    opt.step_size = cfg.step_size;
    opt.iterations = cfg.iterations;
    opt.record_trajectory = true;
    DetectionResult det =
        cavi_detect(inputs.channel, inputs.received, cfg.dims.n_active, noise, opt);
    return ConvergenceTrace{inputs.support, det.estimate,
                            std::move(det.variational->trajectory)};
}

void emit_convergence_csv(const ConvergenceTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("emit_convergence_csv: cannot open '" + path + "' for writing");
    }
    const std::size_t l_tx = trace.q_per_iteration.empty() ? 0 : trace.q_per_iteration[0].size();
    std::string header = "iteration";
    for (std::size_t l = 1; l <= l_tx; ++l) {
        header += ",q_" + std::to_string(l);
    }
    out << header << '\n';
    for (std::size_t it = 0; it < trace.q_per_iteration.size(); ++it) {
        std::string line;
        append_field(line, static_cast<std::uint64_t>(it));
        for (const double v : trace.q_per_iteration[it]) {
            line += ',';
            append_field(line, v);
        }
        out << line << '\n';
    }
    out.flush();
    if (!out) {
        throw IoError("emit_convergence_csv: write to '" + path + "' failed");
    }
}

} // namespace rcsm
