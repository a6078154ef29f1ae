#include "rcsm/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace rcsm {

namespace {

void validate_slot(const ComplexMatrix& h, const ReceivedSlot& y, std::size_t n_active) {
    if (h.rows() == 0 || h.cols() == 0) {
        throw ArgumentError("detector: empty channel matrix");
    }
    if (n_active == 0 || n_active > h.cols()) {
        throw ArgumentError("detector: need 1 <= n_active <= transmit antenna count");
    }
    if (y.observations.empty()) {
        throw ArgumentError("detector: received slot is empty");
    }
    for (const CVec& obs : y.observations) {
        if (obs.size() != h.rows()) {
            throw ArgumentError("detector: observation length does not match receive antennas");
        }
        for (const cxd& v : obs) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw ArgumentError("detector: received slot has non-finite entries");
            }
        }
    }
    if (!h.is_finite()) {
        throw ArgumentError("detector: channel matrix has non-finite entries");
    }
}

// Indices (1-based, ascending) of the k largest scores; exact ties favor the
// smaller antenna index.
std::vector<std::size_t> top_k_antennas(const std::vector<double>& score, std::size_t k) {
    std::vector<std::size_t> idx(score.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) {
            return score[a] > score[b];
        }
        return a < b;
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    for (std::size_t& v : idx) {
        ++v;
    }
    return idx;
}

// sum_m |z^H y_m|^2: the shared ingredient of every rank-1 quadratic update.
double cross_energy(const CVec& z, const ReceivedSlot& y) {
    double sw = 0.0;
    for (const CVec& obs : y.observations) {
        cxd w{0.0, 0.0};
        for (std::size_t i = 0; i < z.size(); ++i) {
            w += std::conj(z[i]) * obs[i];
        }
        sw += std::norm(w);
    }
    return sw;
}

} // namespace

std::vector<double> correlator_energies(const ComplexMatrix& h, const ReceivedSlot& y) {
    validate_slot(h, y, 1);
    const std::size_t n = h.rows();
    const std::size_t l_tx = h.cols();
    std::vector<double> energy(l_tx, 0.0);
    for (const CVec& obs : y.observations) {
        for (std::size_t l = 0; l < l_tx; ++l) {
            cxd corr{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                corr += std::conj(h(i, l)) * obs[i];
            }
            energy[l] += std::norm(corr);
        }
    }
    return energy;
}

DetectionResult correlator_detect(const ComplexMatrix& h, const ReceivedSlot& y,
                                  std::size_t n_active) {
    validate_slot(h, y, n_active);
    const std::vector<double> energy = correlator_energies(h, y);
    std::vector<std::size_t> support = top_k_antennas(energy, n_active);
    double metric = 0.0;
    for (const std::size_t antenna : support) {
        metric += energy[antenna - 1];
    }
    return DetectionResult{IndexVector(h.cols(), std::move(support)), metric, {}, {}};
}

ComplexMatrix weighted_covariance(const ComplexMatrix& h, std::span<const double> w,
                                  const NoiseModel& noise) {
    if (w.size() != h.cols()) {
        throw ArgumentError("weighted_covariance: weight count does not match antennas");
    }
    const std::size_t n = h.rows();
    ComplexMatrix r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        r(i, i) = noise.variance;
    }
    for (std::size_t l = 0; l < w.size(); ++l) {
        const double wl = w[l];
        if (wl == 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const cxd hi = h(i, l);
            r(i, i) += wl * std::norm(hi);
            for (std::size_t j = i + 1; j < n; ++j) {
                r(i, j) += wl * (hi * std::conj(h(j, l)));
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        r(i, i) = cxd{r(i, i).real(), 0.0};
        for (std::size_t j = i + 1; j < n; ++j) {
            r(j, i) = std::conj(r(i, j));
        }
    }
    return r;
}

double gauss_approx_metric(const ComplexMatrix& h, const ReceivedSlot& y, const IndexVector& x,
                           const NoiseModel& noise) {
    validate_slot(h, y, x.n_active());
    if (x.n_tx() != h.cols()) {
        throw ArgumentError("gauss_approx_metric: index vector antenna count mismatch");
    }
    std::vector<double> w(h.cols(), 0.0);
    for (const std::size_t antenna : x.support()) {
        w[antenna - 1] = 1.0;
    }
    const HermitianFactor f = invert_and_logdet(weighted_covariance(h, w, noise));
    double quad = 0.0;
    for (const CVec& obs : y.observations) {
        quad += quadratic_form(obs, f);
    }
    return quad + static_cast<double>(y.observations.size()) * f.log_det;
}

DetectionResult ml_ga_detect(const ComplexMatrix& h, const ReceivedSlot& y, std::size_t n_active,
                             const NoiseModel& noise, bool record_candidates,
                             std::uint64_t enumeration_cap) {
    validate_slot(h, y, n_active);
    const std::size_t n = h.rows();
    const std::size_t l_tx = h.cols();
    const std::size_t k = n_active;
    const double m_len = static_cast<double>(y.observations.size());

    const std::uint64_t total = subset_count(l_tx, k);
    if (total > enumeration_cap) {
        throw CapacityError("ml_ga_detect: " + std::to_string(total) +
                            " candidate supports exceed the enumeration cap of " +
                            std::to_string(enumeration_cap));
    }

    std::vector<CVec> cols(l_tx);
    for (std::size_t l = 0; l < l_tx; ++l) {
        cols[l] = h.column(l);
    }

    // Depth d of the enumeration tree holds the factor of the noise covariance
    // plus the first d chosen columns; descending one level is one rank-1
    // update, so siblings share all the work above them.
    std::vector<HermitianFactor> factor(k + 1);
    std::vector<double> quad(k + 1, 0.0);
    factor[0].inverse = ComplexMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        factor[0].inverse(i, i) = noise.snr_linear;
    }
    factor[0].log_det = static_cast<double>(n) * std::log(noise.variance);
    for (const CVec& obs : y.observations) {
        for (const cxd& v : obs) {
            quad[0] += noise.snr_linear * std::norm(v);
        }
    }

    std::vector<std::size_t> path(k);
    std::vector<std::size_t> best_support;
    double best_metric = std::numeric_limits<double>::infinity();
    std::uint64_t leaf_rank = 0;
    std::optional<std::vector<CandidateScore>> table;
    if (record_candidates) {
        table.emplace();
        table->reserve(total);
    }

    detail::Rank1Context ctx;
    auto dfs = [&](auto&& self, std::size_t depth, std::size_t first) -> void {
        if (depth == k) {
            const double metric = quad[k] + m_len * factor[k].log_det;
            if (table) {
                table->push_back({leaf_rank, metric});
            }
            if (metric < best_metric) {
                best_metric = metric;
                best_support = path;
            }
            ++leaf_rank;
            return;
        }
        // Leave room for the remaining k - depth - 1 picks above v.
        for (std::size_t v = first; v + (k - depth) <= l_tx + 1; ++v) {
            detail::rank1_prepare(factor[depth], cols[v - 1], ctx);
            const double denom = detail::rank1_denominator(ctx, 1.0); // 1 + u >= 1
            factor[depth + 1] = factor[depth];
            detail::rank1_apply(factor[depth + 1], ctx, 1.0, denom);
            quad[depth + 1] = quad[depth] - cross_energy(ctx.z, y) / denom;
            path[depth] = v;
            self(self, depth + 1, v + 1);
        }
    };
    dfs(dfs, 0, 1);

    return DetectionResult{IndexVector(l_tx, std::move(best_support)), best_metric, {},
                           std::move(table)};
}

DetectionResult exact_mixture_ml_detect(const ComplexMatrix& h, const ReceivedSlot& y,
                                        std::size_t n_active, const NoiseModel& noise,
                                        const Constellation& c, bool record_candidates) {
    validate_slot(h, y, n_active);
    if (c.order == 0 || c.points.size() != c.order) {
        throw ArgumentError("exact_mixture_ml_detect: malformed constellation");
    }
    const std::size_t n = h.rows();
    const std::size_t l_tx = h.cols();
    const std::size_t k = n_active;
    const std::size_t m_len = y.observations.size();

    std::uint64_t terms = 1;
    for (std::size_t i = 0; i < k; ++i) {
        terms *= c.order;
        if (terms > 4096) {
            throw CapacityError("exact_mixture_ml_detect: order^n_active exceeds 4096 terms");
        }
    }
    const std::uint64_t total = subset_count(l_tx, k);
    if (total > 10'000) {
        throw CapacityError("exact_mixture_ml_detect: more than 10000 candidate supports");
    }

    // Additive constant of each Gaussian log-density plus the uniform symbol prior.
    const double log_const =
        -static_cast<double>(n) * std::log(std::numbers::pi * noise.variance) -
        static_cast<double>(k) * std::log(static_cast<double>(c.order));

    std::vector<std::size_t> best_support;
    double best_loglik = -std::numeric_limits<double>::infinity();
    std::optional<std::vector<CandidateScore>> table;
    if (record_candidates) {
        table.emplace();
        table->reserve(total);
    }

    std::vector<std::size_t> digit(k);
    CVec mean(n);
    std::vector<double> lse_max(m_len);
    std::vector<double> lse_sum(m_len);

    for (std::uint64_t rank = 0; rank < total; ++rank) {
        const IndexVector x = index_set_from_rank(rank, l_tx, k);
        std::fill(digit.begin(), digit.end(), 0);
        std::fill(lse_max.begin(), lse_max.end(), -std::numeric_limits<double>::infinity());
        std::fill(lse_sum.begin(), lse_sum.end(), 0.0);

        // Two-pass log-sum-exp is pointless here: track the running max and
        // rescale the sum whenever it moves.
        for (std::uint64_t t = 0; t < terms; ++t) {
            std::fill(mean.begin(), mean.end(), cxd{0.0, 0.0});
            for (std::size_t j = 0; j < k; ++j) {
                const cxd sym = c.points[digit[j]];
                const std::size_t col = x.support()[j] - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    mean[i] += h(i, col) * sym;
                }
            }
            for (std::size_t m = 0; m < m_len; ++m) {
                double dist = 0.0;
                const CVec& obs = y.observations[m];
                for (std::size_t i = 0; i < n; ++i) {
                    dist += std::norm(obs[i] - mean[i]);
                }
                const double a = -noise.snr_linear * dist;
                if (a > lse_max[m]) {
                    lse_sum[m] = lse_sum[m] * std::exp(lse_max[m] - a) + 1.0;
                    lse_max[m] = a;
                } else {
                    lse_sum[m] += std::exp(a - lse_max[m]);
                }
            }
            // odometer over the k constellation digits
            for (std::size_t j = 0; j < k; ++j) {
                if (++digit[j] < c.order) {
                    break;
                }
                digit[j] = 0;
            }
        }

        double loglik = static_cast<double>(m_len) * log_const;
        for (std::size_t m = 0; m < m_len; ++m) {
            loglik += lse_max[m] + std::log(lse_sum[m]);
        }
        if (table) {
            table->push_back({rank, loglik});
        }
        if (loglik > best_loglik) {
            best_loglik = loglik;
            best_support = x.support();
        }
    }

    return DetectionResult{IndexVector(l_tx, std::move(best_support)), best_loglik, {},
                           std::move(table)};
}

DetectionResult cavi_detect(const ComplexMatrix& h, const ReceivedSlot& y, std::size_t n_active,
                            const NoiseModel& noise, const CaviOptions& opt) {
    validate_slot(h, y, n_active);
    const std::size_t l_tx = h.cols();
    const double m_len = static_cast<double>(y.observations.size());

    if (!(opt.step_size >= 0.0 && opt.step_size <= 1.0)) {
        throw ArgumentError("cavi_detect: step size must lie in [0, 1]");
    }
    if (opt.iterations == 0) {
        throw ArgumentError("cavi_detect: need at least one sweep");
    }
    std::vector<double> q;
    if (opt.initial_q.empty()) {
        q.assign(l_tx, 1.0 / static_cast<double>(l_tx));
    } else {
        if (opt.initial_q.size() != l_tx) {
            throw ArgumentError("cavi_detect: initial_q length does not match antennas");
        }
        for (const double v : opt.initial_q) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ArgumentError("cavi_detect: initial_q entries must lie in [0, 1]");
            }
        }
        q = opt.initial_q;
    }

    std::vector<CVec> cols(l_tx);
    for (std::size_t l = 0; l < l_tx; ++l) {
        cols[l] = h.column(l);
    }

    const double mu = opt.step_size;
    HermitianFactor factor = invert_and_logdet(weighted_covariance(h, q, noise));
    double quad_sum = 0.0;
    for (const CVec& obs : y.observations) {
        quad_sum += quadratic_form(obs, factor);
    }

    VariationalState state;
    state.step_size = mu;
    if (opt.record_trajectory) {
        state.trajectory.push_back(q);
    }

    detail::Rank1Context ctx;
    for (std::size_t sweep = 1; sweep <= opt.iterations; ++sweep) {
        for (std::size_t l = 0; l < l_tx; ++l) {
            detail::rank1_prepare(factor, cols[l], ctx);
            const double u = ctx.u;
            const double sw = cross_energy(ctx.z, y);

            // Score both activity hypotheses for this antenna against the
            // covariance that freezes every other antenna at its current q.
            const double c0 = 0.0 - q[l];
            const double c1 = 1.0 - q[l];
            const double denom0 = 1.0 + c0 * u;
            const double denom1 = 1.0 + c1 * u;
            if (!(denom0 > kSingularUpdateTol) || !(denom1 > kSingularUpdateTol)) {
                throw SingularUpdateError("cavi_detect: singular hypothesis update at antenna " +
                                          std::to_string(l + 1) + ", sweep " +
                                          std::to_string(sweep));
            }
            const double a0 =
                -(quad_sum - (c0 / denom0) * sw) - m_len * (factor.log_det + std::log(denom0));
            const double a1 =
                -(quad_sum - (c1 / denom1) * sw) - m_len * (factor.log_det + std::log(denom1));

            // Posterior activity probability, formed in the log domain so a
            // lopsided hypothesis cannot overflow.
            const double chi = 1.0 / (1.0 + std::exp(a0 - a1));
            double qn = (1.0 - mu) * q[l] + mu * chi;
            if (!std::isfinite(qn)) {
                throw NumericalError("cavi_detect: activity probability became non-finite at antenna " +
                                     std::to_string(l + 1) + ", sweep " + std::to_string(sweep));
            }
            qn = std::clamp(qn, 0.0, 1.0);

            // Commit the blended value into the maintained factor.
            const double cc = qn - q[l];
            const double denomc = 1.0 + cc * u;
            if (!(denomc > kSingularUpdateTol)) {
                throw SingularUpdateError("cavi_detect: singular commit update at antenna " +
                                          std::to_string(l + 1) + ", sweep " +
                                          std::to_string(sweep));
            }
            detail::rank1_apply(factor, ctx, cc, denomc);
            quad_sum -= (cc / denomc) * sw;
            q[l] = qn;
        }

        // One fresh factorization per sweep bounds the rank-1 drift.
        HermitianFactor fresh = invert_and_logdet(weighted_covariance(h, q, noise));
        double diff = 0.0;
        for (std::size_t i = 0; i < factor.inverse.data().size(); ++i) {
            diff += std::norm(factor.inverse.data()[i] - fresh.inverse.data()[i]);
        }
        const double rel = std::sqrt(diff) / fresh.inverse.frobenius_norm();
        state.max_refresh_drift = std::max(state.max_refresh_drift, rel);
        factor = std::move(fresh);
        quad_sum = 0.0;
        for (const CVec& obs : y.observations) {
            quad_sum += quadratic_form(obs, factor);
        }
        if (opt.record_trajectory) {
            state.trajectory.push_back(q);
        }
    }

    std::vector<std::size_t> support = top_k_antennas(q, n_active);
    double metric = 0.0;
    for (const std::size_t antenna : support) {
        metric += q[antenna - 1];
    }
    state.q = std::move(q);
    state.factor = std::move(factor);
    state.iterations = opt.iterations;

    return DetectionResult{IndexVector(l_tx, std::move(support)), metric, std::move(state), {}};
}

std::size_t pairwise_hamming(const IndexVector& a, const IndexVector& b) {
    if (a.n_tx() != b.n_tx()) {
        throw ArgumentError("pairwise_hamming: antenna counts differ");
    }
    // Symmetric difference of two sorted supports.
    std::size_t count = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    const auto& sa = a.support();
    const auto& sb = b.support();
    while (i < sa.size() && j < sb.size()) {
        if (sa[i] == sb[j]) {
            ++i;
            ++j;
        } else if (sa[i] < sb[j]) {
            ++count;
            ++i;
        } else {
            ++count;
            ++j;
        }
    }
    count += (sa.size() - i) + (sb.size() - j);
    return count;
}

} // namespace rcsm
