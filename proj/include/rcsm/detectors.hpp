#pragma once

#include <optional>
#include <span>

#include "rcsm/hermitian.hpp"
#include "rcsm/model.hpp"

namespace rcsm {

// Score of one enumerated support, keyed by its lexicographic rank.
struct CandidateScore {
    std::uint64_t rank = 0;
    double metric = 0.0;
};

// Diagnostics from the variational detector.
struct VariationalState {
    std::vector<double> q;        // final activity probabilities, one per antenna
    HermitianFactor factor;       // maintained surrogate-covariance factor at exit
    std::size_t iterations = 0;   // completed coordinate sweeps
    double step_size = 0.0;
    double max_refresh_drift = 0.0; // worst relative Frobenius drift absorbed by a refresh
    std::vector<std::vector<double>> trajectory; // q after each sweep (index 0 = initial), when recorded
};

struct DetectionResult {
    IndexVector estimate;
    double metric = 0.0; // detector-specific score of the estimate
    std::optional<VariationalState> variational;
    std::optional<std::vector<CandidateScore>> candidates;
};

// Per-antenna matched-filter energies sum_m |h_l^H y_m|^2 ...
std::vector<double> correlator_energies(const ComplexMatrix& h, const ReceivedSlot& y);

// ... and the detector that keeps the top n_active of them. O(L N M). Ties go
// to the smaller antenna index. The metric is the retained energy.
DetectionResult correlator_detect(const ComplexMatrix& h, const ReceivedSlot& y,
                                  std::size_t n_active);

// noise_variance * I + sum_l w_l h_l h_l^H: the received covariance when
// antenna l is on with weight w_l. Weights are activity indicators for the
// exhaustive detectors and posterior probabilities for the variational one.
ComplexMatrix weighted_covariance(const ComplexMatrix& h, std::span<const double> w,
                                  const NoiseModel& noise);

// Gaussian-approximation log-metric of one support hypothesis:
//   sum_m y_m^H R(x)^{-1} y_m + slot_len * ln det R(x).
// Smaller is better; the hypothesis likelihood treats the active symbols as
// Gaussian so the slot covariance R(x) captures them in closed form.
double gauss_approx_metric(const ComplexMatrix& h, const ReceivedSlot& y, const IndexVector& x,
                           const NoiseModel& noise);

// Exhaustive minimization of gauss_approx_metric over all supports of size
// n_active, enumerated in lexicographic order. Candidates along the
// enumeration tree share prefix factors, so each edge costs one rank-1 update
// instead of a fresh O(N^3) factorization. Ties keep the smaller rank.
// Throws CapacityError when C(n_tx, n_active) exceeds enumeration_cap.
DetectionResult ml_ga_detect(const ComplexMatrix& h, const ReceivedSlot& y, std::size_t n_active,
                             const NoiseModel& noise, bool record_candidates = false,
                             std::uint64_t enumeration_cap = 1'000'000);

// Exact maximum-likelihood support detection, marginalizing the transmitted
// symbols by brute force (log-sum-exp over order^n_active terms per symbol
// vector). Only viable at toy sizes; meant as ground truth for the others.
// Caps: order^n_active <= 4096 and C(n_tx, n_active) <= 10000.
DetectionResult exact_mixture_ml_detect(const ComplexMatrix& h, const ReceivedSlot& y,
                                        std::size_t n_active, const NoiseModel& noise,
                                        const Constellation& c, bool record_candidates = false);

struct CaviOptions {
    double step_size = 0.5;        // damping of the coordinate update, in [0, 1]
    std::size_t iterations = 10;   // full coordinate sweeps
    std::vector<double> initial_q; // empty = uniform 1/n_tx
    bool record_trajectory = false;
};

// Coordinate-ascent variational inference over per-antenna activity
// probabilities q. Each coordinate update evaluates both activity hypotheses
// against the maintained covariance factor via rank-1 perturbations and blends
// the resulting posterior into q with the step size; the factor is refreshed
// from scratch once per sweep to absorb floating-point drift. O(L (N^2 + M N))
// per sweep. The estimate is the top-n_active q entries; the metric is their sum.
DetectionResult cavi_detect(const ComplexMatrix& h, const ReceivedSlot& y, std::size_t n_active,
                            const NoiseModel& noise, const CaviOptions& opt = {});

// Number of antennas on which two supports disagree.
std::size_t pairwise_hamming(const IndexVector& a, const IndexVector& b);

} // namespace rcsm
