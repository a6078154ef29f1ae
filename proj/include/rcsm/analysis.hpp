#pragma once

#include <cstddef>
#include <string>
#include <utility>

namespace rcsm {

// Ingredients of the pairwise support-confusion probability. The confusion of
// a true-only antenna 1 with a false-only antenna 2 is governed by their
// effective gains through the interference-plus-noise covariance D:
//   alpha_l = h_l^H D^{-1} h_l,   beta = h_1^H D^{-1} h_2.
struct PepParams {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta_sq = 0.0;      // |beta|^2
    double lambda = 0.0;       // Chernoff tilt, 0 < lambda < (1 + alpha2) / alpha2
    double d = 0.0;            // decision threshold on the log-likelihood gap
    std::size_t slot_len = 0;  // symbol vectors combined per decision
};

struct PepComponents {
    double kappa = 0.0;      // per-symbol moment factor
    double gamma_pep = 0.0;  // per-symbol exponential rate
};

// Closed form of the tilted moment E[exp(lambda y^H Delta y)] = kappa *
// exp(-gamma_pep) for one symbol vector of the slot. Throws NumericalError
// when lambda crosses the theta_2 pole.
PepComponents pep_components(const PepParams& p);

// Chernoff bound on the slot-level confusion probability:
//   exp(-lambda d) * (kappa exp(-gamma_pep))^slot_len.
double conditional_pep_bound(const PepParams& p);

// Log-likelihood separation between the two supports accumulated over a slot:
//   slot_len * ln((1 + alpha2) / (1 + alpha1)).
double logdet_distance(double alpha1, double alpha2, std::size_t slot_len);

// Large-system limit of the per-antenna MMSE SINR at load `load` = active
// antennas per receive dimension; the unique positive root of
//   a = snr / (1 + load * snr / (1 + a)).
double asymptotic_mmse_sinr(double snr_linear, double load);

// The large-system substitutions: both alphas converge to alpha_bar and the
// squared cross-gain to omega_bar / n_rx.
struct AsymptoticParams {
    double snr_linear = 0.0;
    double load = 0.0;
    std::size_t n_rx = 0;
    double alpha_bar = 0.0;
    double omega_bar = 0.0;
};

AsymptoticParams make_asymptotic(double snr_linear, double load, std::size_t n_rx);

// pep_components evaluated at the asymptotic substitutions.
PepComponents asymptotic_pep_components(const AsymptoticParams& a, double lambda);

// The rate term alone (goes to the beta = 0 rate as n_rx grows).
double asymptotic_pep_snr(const AsymptoticParams& a, double lambda);

// Golden-section maximization of the optimized exponent gamma_pep - ln kappa
// over the admissible tilt interval. Returns (lambda_star, pairwise bound
// (kappa exp(-gamma_pep))^slot_len at lambda_star). The optimal tilt does not
// depend on slot_len; the bound does.
std::pair<double, double> optimize_lambda(const AsymptoticParams& a, std::size_t slot_len);

// Support-error estimate assembled from the dominant confusions: the true
// support has (n_tx - n_active) single-swap neighbors, each confused with
// probability ~ the optimized pairwise bound.
struct ErrorEstimate {
    double pep = 0.0;         // optimized pairwise bound
    double p_ie = 0.0;        // (n_tx - n_active) * pep
    double lambda_star = 0.0;
    std::string regime = "asymptotic"; // large-system approximation; see README caveats
};

ErrorEstimate approx_index_error(std::size_t n_tx, std::size_t n_active,
                                 const AsymptoticParams& a, std::size_t slot_len);

} // namespace rcsm
