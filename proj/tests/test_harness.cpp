#include <doctest.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcsm/harness.hpp"

using namespace rcsm;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

double parse_exact(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    REQUIRE(res.ec == std::errc{});
    REQUIRE(res.ptr == s.data() + s.size());
    return v;
}

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.dims = {6, 8, 2, 2};
    cfg.snr_db = 8.0;
    cfg.detector = DetectorKind::cavi;
    cfg.iterations = 5;
    cfg.trials = 40;
    cfg.seed = 11;
    cfg.threads = 1;
    return cfg;
}

} // namespace

TEST_CASE("detector names round-trip") {
    for (const DetectorKind k : {DetectorKind::correlator, DetectorKind::ml_ga,
                                 DetectorKind::cavi, DetectorKind::exact_mixture}) {
        const auto back = detector_from_name(detector_name(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK_FALSE(detector_from_name("karhunen").has_value());
}

TEST_CASE("trial inputs replay bit-identically and ignore the detector") {
    ExperimentConfig cfg = tiny_config();
    const TrialInputs a = make_trial_inputs(cfg, 17);
    const TrialInputs b = make_trial_inputs(cfg, 17);
    CHECK(a.support == b.support);
    CHECK(a.channel.data() == b.channel.data()); // bitwise: vector<complex> equality
    REQUIRE(a.received.observations.size() == b.received.observations.size());
    for (std::size_t m = 0; m < a.received.observations.size(); ++m)
        CHECK(a.received.observations[m] == b.received.observations[m]);

    cfg.detector = DetectorKind::ml_ga; // paired comparisons need identical inputs
    cfg.step_size = 0.9;
    cfg.iterations = 3;
    const TrialInputs c = make_trial_inputs(cfg, 17);
    CHECK(a.support == c.support);
    CHECK(a.channel.data() == c.channel.data());
    for (std::size_t m = 0; m < a.received.observations.size(); ++m)
        CHECK(a.received.observations[m] == c.received.observations[m]);

    const TrialInputs d = make_trial_inputs(cfg, 18); // different trial differs
    CHECK(a.channel.data() != d.channel.data());
}

TEST_CASE("default support sampling stays within the addressable ranks") {
    ExperimentConfig cfg = tiny_config();
    cfg.dims = {4, 10, 2, 1};
    // C(10,2) = 45, addressable = 2^5 = 32
    bool past_addressable = false;
    for (std::uint64_t t = 0; t < 400; ++t) {
        const TrialInputs in = make_trial_inputs(cfg, t);
        past_addressable = past_addressable || (rank_from_index_set(in.support) >= 32);
    }
    CHECK_FALSE(past_addressable);

    cfg.all_subsets = true;
    for (std::uint64_t t = 0; t < 400; ++t) {
        const TrialInputs in = make_trial_inputs(cfg, t);
        past_addressable = past_addressable || (rank_from_index_set(in.support) >= 32);
    }
    CHECK(past_addressable); // 13/45 of draws land there; 400 misses is impossible in practice
}

TEST_CASE("run_trial is reproducible and flags errors correctly") {
    const ExperimentConfig cfg = tiny_config();
    const TrialResult r1 = run_trial(cfg, 3);
    const TrialResult r2 = run_trial(cfg, 3);
    CHECK(r1.estimate == r2.estimate);
    CHECK(r1.true_support == r2.true_support);
    CHECK(r1.index_error == r2.index_error);
    CHECK(r1.index_error == (r1.estimate != r1.true_support));
    CHECK(r1.wall_time_ns > 0);
}

TEST_CASE("an exhaustive detector on a clean channel never errs") {
    ExperimentConfig cfg = tiny_config();
    cfg.detector = DetectorKind::ml_ga;
    cfg.snr_db = 120.0;
    cfg.trials = 60;
    cfg.sweep = SweepSpec{"m", {1.0, 2.0}};
    const std::vector<SweepRow> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    for (const SweepRow& row : rows) {
        CHECK(row.errors == 0);
        CHECK(row.error_rate == 0.0);
        CHECK(row.trials == 60);
    }
}

TEST_CASE("correlator with every antenna active cannot be wrong") {
    ExperimentConfig cfg = tiny_config();
    cfg.detector = DetectorKind::correlator;
    cfg.dims = {4, 5, 5, 2}; // K = L: only one support exists
    cfg.snr_db = -10.0;
    cfg.trials = 30;
    cfg.sweep = SweepSpec{"snr-db", {-10.0}};
    const std::vector<SweepRow> rows = run_sweep(cfg);
    CHECK(rows.at(0).errors == 0);
}

TEST_CASE("sweep parameter whitelist and integer checks") {
    ExperimentConfig cfg = tiny_config();
    cfg.sweep = SweepSpec{"bogus", {1.0}};
    CHECK_THROWS_AS(run_sweep(cfg), ArgumentError);
    cfg.sweep = SweepSpec{"iters", {2.5}};
    CHECK_THROWS_AS(run_sweep(cfg), ArgumentError);
    cfg.sweep = SweepSpec{"k", {0.0}};
    CHECK_THROWS_AS(run_sweep(cfg), ArgumentError);
    cfg.sweep = SweepSpec{"mu", {0.25}}; // fractional is fine here
    CHECK_NOTHROW(run_sweep(cfg));
    cfg.sweep.reset();
    CHECK_THROWS_AS(run_sweep(cfg), ArgumentError);
}

TEST_CASE("sweep rows are identical for any worker count") {
    ExperimentConfig cfg = tiny_config();
    cfg.trials = 120;
    cfg.sweep = SweepSpec{"snr-db", {2.0, 9.0}};
    cfg.threads = 1;
    const std::vector<SweepRow> serial = run_sweep(cfg);
    cfg.threads = 4;
    const std::vector<SweepRow> parallel = run_sweep(cfg);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(csv_line(serial[i]) == csv_line(parallel[i]));
    }
}

TEST_CASE("wilson interval behaves like a confidence interval") {
    CHECK_THROWS_AS(wilson_interval(1, 0), ArgumentError);
    CHECK_THROWS_AS(wilson_interval(5, 4), ArgumentError);

    const WilsonInterval zero = wilson_interval(0, 50);
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper > 0.0); // zero observed errors still leaves uncertainty
    const WilsonInterval all = wilson_interval(50, 50);
    CHECK(all.upper == 1.0);
    CHECK(all.lower < 1.0);

    // halfwidth shrinks like 1/sqrt(trials)
    const double h_small = wilson_interval(10, 100).halfwidth;
    const double h_large = wilson_interval(1000, 10000).halfwidth;
    CHECK(h_small / h_large > 9.0);
    CHECK(h_small / h_large < 11.0);

    // one-sided 99% z stretches the interval
    CHECK(wilson_interval(10, 100, kZ99OneSided).halfwidth > h_small);

    // interval brackets the empirical rate
    const WilsonInterval w = wilson_interval(17, 230);
    const double p = 17.0 / 230.0;
    CHECK(w.lower < p);
    CHECK(w.upper > p);
}

TEST_CASE("analytic estimate is attached exactly when the closed form applies") {
    ExperimentConfig cfg = tiny_config();
    cfg.trials = 10;
    cfg.sweep = SweepSpec{"snr-db", {10.0}};

    cfg.detector = DetectorKind::cavi;
    CHECK(run_sweep(cfg).at(0).analytic_p_ie.has_value());
    cfg.detector = DetectorKind::ml_ga;
    CHECK(run_sweep(cfg).at(0).analytic_p_ie.has_value());
    cfg.detector = DetectorKind::correlator;
    CHECK_FALSE(run_sweep(cfg).at(0).analytic_p_ie.has_value());

    cfg.detector = DetectorKind::cavi;
    cfg.order = 16; // constant-modulus assumption gone
    CHECK_FALSE(run_sweep(cfg).at(0).analytic_p_ie.has_value());
    cfg.order = 4;
    cfg.dims = {6, 5, 5, 2}; // no inactive antenna to swap in
    CHECK_FALSE(run_sweep(cfg).at(0).analytic_p_ie.has_value());
}

TEST_CASE("benchmark mode times only the two heavy detectors") {
    ExperimentConfig cfg = tiny_config();
    cfg.trials = 10;
    cfg.sweep = SweepSpec{"k", {1.0, 2.0}};
    cfg.detector = DetectorKind::correlator;
    CHECK_THROWS_AS(run_bench(cfg), ArgumentError);
    cfg.detector = DetectorKind::exact_mixture;
    CHECK_THROWS_AS(run_bench(cfg), ArgumentError);
    cfg.detector = DetectorKind::cavi;
    const std::vector<SweepRow> rows = run_bench(cfg);
    REQUIRE(rows.size() == 2);
    for (const SweepRow& row : rows) {
        CHECK(row.median_runtime_ns > 0.0);
        CHECK(row.mean_runtime_ns > 0.0);
    }
}

TEST_CASE("sweep rows leave the timing columns empty") {
    ExperimentConfig cfg = tiny_config();
    cfg.trials = 15;
    cfg.sweep = SweepSpec{"snr-db", {5.0}};
    const SweepRow row = run_sweep(cfg).at(0);
    CHECK(row.mean_runtime_ns == 0.0);
    CHECK(row.median_runtime_ns == 0.0);
}

TEST_CASE("analysis mode needs no trials and rejects detector-only parameters") {
    ExperimentConfig cfg = tiny_config();
    cfg.dims = {20, 10, 2, 2};
    cfg.trials = 0; // irrelevant for closed forms
    cfg.sweep = SweepSpec{"snr-db", {0.0, 10.0}};
    const std::vector<SweepRow> rows = run_analysis(cfg);
    REQUIRE(rows.size() == 2);
    for (const SweepRow& row : rows) {
        CHECK(row.detector == "analytic");
        CHECK(row.trials == 0);
        REQUIRE(row.analytic_p_ie.has_value());
        CHECK(*row.analytic_p_ie > 0.0);
    }
    CHECK(*rows[1].analytic_p_ie < *rows[0].analytic_p_ie); // better SNR, fewer errors

    cfg.sweep = SweepSpec{"mu", {0.5}};
    CHECK_THROWS_AS(run_analysis(cfg), ArgumentError);
    cfg.sweep = SweepSpec{"iters", {5.0}};
    CHECK_THROWS_AS(run_analysis(cfg), ArgumentError);
}

TEST_CASE("csv emission round-trips every field exactly") {
    ExperimentConfig cfg = tiny_config();
    cfg.trials = 25;
    cfg.sweep = SweepSpec{"snr-db", {3.5, 12.25}};
    const std::vector<SweepRow> rows = run_sweep(cfg);

    const std::string path = "harness_roundtrip_test.csv";
    emit_csv(rows, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == csv_header());
    CHECK(split_csv(line).size() == 19);

    for (const SweepRow& row : rows) {
        REQUIRE(std::getline(in, line));
        const std::vector<std::string> f = split_csv(line);
        REQUIRE(f.size() == 19);
        CHECK(f[0] == row.detector);
        CHECK(parse_exact(f[1]) == static_cast<double>(row.n_rx));
        CHECK(parse_exact(f[5]) == row.snr_db); // shortest round-trip is exact
        CHECK(parse_exact(f[7]) == row.step_size);
        CHECK(f[9] == row.sweep_name);
        CHECK(parse_exact(f[10]) == row.sweep_value);
        CHECK(parse_exact(f[11]) == static_cast<double>(row.trials));
        CHECK(parse_exact(f[12]) == static_cast<double>(row.errors));
        CHECK(parse_exact(f[13]) == row.error_rate);
        CHECK(parse_exact(f[14]) == row.wilson_halfwidth);
        if (row.analytic_p_ie) {
            CHECK(parse_exact(f[15]) == *row.analytic_p_ie);
        } else {
            CHECK(f[15].empty());
        }
        CHECK(parse_exact(f[18]) == static_cast<double>(row.seed));
    }
    CHECK_FALSE(std::getline(in, line)); // nothing after the rows
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("empty emission produces a header-only file") {
    const std::string path = "harness_empty_test.csv";
    emit_csv({}, path);
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == csv_header());
    CHECK_FALSE(std::getline(in, line));
    in.close();
    std::remove(path.c_str());

    CHECK_THROWS_AS(emit_csv({}, "no_such_dir_xyz/file.csv"), IoError);
}

TEST_CASE("convergence traces come from the variational detector only") {
    ExperimentConfig cfg = tiny_config();
    cfg.detector = DetectorKind::ml_ga;
    CHECK_THROWS_AS(run_convergence(cfg, 0), ArgumentError);

    cfg.detector = DetectorKind::cavi;
    cfg.iterations = 7;
    const ConvergenceTrace trace = run_convergence(cfg, 0);
    REQUIRE(trace.q_per_iteration.size() == 8); // initial + 7 sweeps
    for (const auto& qrow : trace.q_per_iteration) {
        REQUIRE(qrow.size() == cfg.dims.n_tx);
        for (const double q : qrow) {
            CHECK(q >= 0.0);
            CHECK(q <= 1.0);
        }
    }
    CHECK(trace.true_support == make_trial_inputs(cfg, 0).support);

    const std::string path = "harness_convergence_test.csv";
    emit_convergence_csv(trace, path);
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("iteration,q_1,", 0) == 0);
    std::size_t data_lines = 0;
    while (std::getline(in, line)) ++data_lines;
    CHECK(data_lines == 8);
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("bench rows and sweep rows share one stable column order") {
    SweepRow row;
    row.detector = "cavi";
    row.n_rx = 10; row.n_tx = 20; row.n_active = 2; row.slot_len = 4;
    row.snr_db = 7.5;
    row.order = 4;
    row.step_size = 0.5;
    row.iterations = 10;
    row.sweep_name = "snr-db";
    row.sweep_value = 7.5;
    row.trials = 1000;
    row.errors = 125;
    row.error_rate = 0.125;
    row.wilson_halfwidth = 0.02;
    row.analytic_p_ie = std::nullopt;
    row.mean_runtime_ns = 0.0;
    row.median_runtime_ns = 0.0;
    row.seed = 9;
    CHECK(csv_line(row) == "cavi,10,20,2,4,7.5,4,0.5,10,snr-db,7.5,1000,125,0.125,0.02,,0,0,9");
    CHECK(csv_header() ==
          "detector,N,L,K,M,snr_db,order,mu,iters,sweep_name,sweep_value,trials,errors,"
          "error_rate,wilson_halfwidth,analytic_p_ie,mean_runtime_ns,median_runtime_ns,seed");
}
