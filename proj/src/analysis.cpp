#include "rcsm/analysis.hpp"

#include <cmath>
#include <string>

#include "rcsm/errors.hpp"

namespace rcsm {

namespace {

void check_alphas(double alpha1, double alpha2) {
    if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
        throw ArgumentError("pep: effective gains must be non-negative");
    }
}

} // namespace

PepComponents pep_components(const PepParams& p) {
    check_alphas(p.alpha1, p.alpha2);
    if (!(p.beta_sq >= 0.0)) {
        throw ArgumentError("pep_components: |beta|^2 must be non-negative");
    }
    if (!(p.lambda > 0.0)) {
        throw ArgumentError("pep_components: tilt must be positive");
    }
    const double pole = 1.0 + p.alpha2 - p.alpha2 * p.lambda;
    if (!(pole > 0.0)) {
        throw NumericalError("pep_components: tilt " + std::to_string(p.lambda) +
                             " is at or beyond the pole (1 + alpha2) / alpha2");
    }
    const double theta2 = p.lambda / pole;
    // Effective gain of the competing antenna seen through the tilt.
    const double a = p.alpha1 + theta2 * p.beta_sq;
    const double b = p.alpha1 + 1.0 + p.lambda * a;

    PepComponents out;
    out.kappa = (p.alpha1 + 1.0) * (p.alpha2 + 1.0) * theta2 / (p.lambda * b);
    out.gamma_pep = p.alpha1 - (p.alpha1 + 1.0) * a / b;
    return out;
}

double conditional_pep_bound(const PepParams& p) {
    const PepComponents c = pep_components(p);
    // Assemble in the log domain; the slot power could otherwise underflow.
    const double log_bound =
        -p.lambda * p.d +
        static_cast<double>(p.slot_len) * (std::log(c.kappa) - c.gamma_pep);
    return std::exp(log_bound);
}

double logdet_distance(double alpha1, double alpha2, std::size_t slot_len) {
    check_alphas(alpha1, alpha2);
    return static_cast<double>(slot_len) * (std::log1p(alpha2) - std::log1p(alpha1));
}

double asymptotic_mmse_sinr(double snr_linear, double load) {
    if (!(snr_linear > 0.0)) {
        throw ArgumentError("asymptotic_mmse_sinr: SNR must be positive");
    }
    if (!(load >= 0.0)) {
        throw ArgumentError("asymptotic_mmse_sinr: load must be non-negative");
    }
    // a = snr / (1 + load snr / (1 + a))  <=>  a^2 + (1 + load snr - snr) a - snr = 0.
    const double b = snr_linear * (1.0 - load) - 1.0;
    return 0.5 * (b + std::sqrt(b * b + 4.0 * snr_linear));
}

AsymptoticParams make_asymptotic(double snr_linear, double load, std::size_t n_rx) {
    if (n_rx == 0) {
        throw ArgumentError("make_asymptotic: receive antenna count must be positive");
    }
    AsymptoticParams a;
    a.snr_linear = snr_linear;
    a.load = load;
    a.n_rx = n_rx;
    a.alpha_bar = asymptotic_mmse_sinr(snr_linear, load);
    // The cross-gain second moment concentrates at omega_bar / n_rx.
    a.omega_bar = asymptotic_mmse_sinr(snr_linear * (2.0 + snr_linear), load) /
                  (2.0 / snr_linear + 1.0);
    return a;
}

PepComponents asymptotic_pep_components(const AsymptoticParams& a, double lambda) {
    PepParams p;
    p.alpha1 = a.alpha_bar;
    p.alpha2 = a.alpha_bar;
    p.beta_sq = a.omega_bar / static_cast<double>(a.n_rx);
    p.lambda = lambda;
    return pep_components(p);
}

double asymptotic_pep_snr(const AsymptoticParams& a, double lambda) {
    return asymptotic_pep_components(a, lambda).gamma_pep;
}

std::pair<double, double> optimize_lambda(const AsymptoticParams& a, std::size_t slot_len) {
    if (slot_len == 0) {
        throw ArgumentError("optimize_lambda: slot length must be positive");
    }
    const double lambda_bar = (a.alpha_bar + 1.0) / a.alpha_bar;
    const double eps = 1e-6 * lambda_bar;

    const auto objective = [&](double lambda) {
        const PepComponents c = asymptotic_pep_components(a, lambda);
        const double g = c.gamma_pep - std::log(c.kappa);
        if (!std::isfinite(g)) {
            throw NumericalError("optimize_lambda: objective is not finite at tilt " +
                                 std::to_string(lambda));
        }
        return g;
    };

    // Golden-section search for the maximum; the objective is unimodal on the
    // admissible interval and the bracket shrinks below 1e-8 absolute.
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = eps;
    double hi = lambda_bar - eps;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = objective(x1);
        }
    }
    const double lambda_star = 0.5 * (lo + hi);
    const double exponent = objective(lambda_star);
    const double bound = std::exp(-static_cast<double>(slot_len) * exponent);
    return {lambda_star, bound};
}

ErrorEstimate approx_index_error(std::size_t n_tx, std::size_t n_active,
                                 const AsymptoticParams& a, std::size_t slot_len) {
    if (n_active == 0 || n_active >= n_tx) {
        throw ArgumentError("approx_index_error: need 1 <= n_active < n_tx");
    }
    const auto [lambda_star, pep] = optimize_lambda(a, slot_len);
    ErrorEstimate e;
    e.pep = pep;
    e.lambda_star = lambda_star;
    e.p_ie = static_cast<double>(n_tx - n_active) * pep;
    return e;
}

} // namespace rcsm
