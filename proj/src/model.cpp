#include "rcsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rcsm {

namespace {

// C(n, k) with saturation; __int128 gives exact values far beyond any antenna
// count this code will ever see (n <= 128 always fits).
constexpr unsigned __int128 kBinomSaturated = ~static_cast<unsigned __int128>(0);

unsigned __int128 binom128(std::size_t n, std::size_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const unsigned __int128 factor = n - k + i;
        if (c > kBinomSaturated / factor) {
            return kBinomSaturated;
        }
        c = (c * factor) / i; // exact: C(n-k+i, i) is an integer at every step
    }
    return c;
}

std::size_t floor_log2_u128(unsigned __int128 v) {
    std::size_t bits = 0;
    while (v >>= 1) {
        ++bits;
    }
    return bits;
}

} // namespace

void SystemDims::validate() const {
    if (n_rx == 0 || n_tx == 0 || n_active == 0 || slot_len == 0) {
        throw ArgumentError("system dimensions must all be positive");
    }
    if (n_active > n_tx) {
        throw ArgumentError("cannot activate " + std::to_string(n_active) + " of " +
                            std::to_string(n_tx) + " transmit antennas");
    }
}

NoiseModel NoiseModel::from_linear(double snr_linear) {
    if (!(snr_linear > 0.0)) {
        throw ArgumentError("SNR must be positive");
    }
    return NoiseModel{snr_linear, 1.0 / snr_linear};
}

NoiseModel NoiseModel::from_db(double snr_db) {
    return from_linear(std::pow(10.0, snr_db / 10.0));
}

Constellation qam_constellation(std::size_t order) {
    if (order != 4 && order != 16 && order != 64) {
        throw ArgumentError("unsupported constellation order " + std::to_string(order));
    }
    std::size_t side = 2;
    while (side * side < order) {
        side *= 2;
    }
    // Point index g is the axis bit label; it lands at grid position
    // gray_decode(g), so neighboring positions carry labels one bit apart.
    // Levels are the usual odd integers {..,-3,-1,1,3,..}.
    std::vector<double> level(side);
    double energy = 0.0;
    for (std::size_t g = 0; g < side; ++g) {
        std::size_t pos = g;
        for (std::size_t shift = 1; shift < side; shift <<= 1) {
            pos ^= pos >> shift;
        }
        level[g] = static_cast<double>(2 * pos + 1) - static_cast<double>(side);
        energy += level[g] * level[g];
    }
    energy /= static_cast<double>(side);
    const double scale = 1.0 / std::sqrt(2.0 * energy); // unit mean symbol energy

    Constellation c;
    c.order = order;
    c.points.reserve(order);
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t q = 0; q < side; ++q) {
            c.points.emplace_back(level[i] * scale, level[q] * scale);
        }
    }
    return c;
}

IndexVector::IndexVector(std::size_t n_tx, std::vector<std::size_t> support)
    : n_tx_(n_tx), support_(std::move(support)) {
    if (n_tx_ == 0) {
        throw ArgumentError("index vector needs at least one transmit antenna");
    }
    if (support_.empty()) {
        throw ArgumentError("index vector must activate at least one antenna");
    }
    if (support_.size() > n_tx_) {
        throw ArgumentError("index vector support larger than antenna count");
    }
    std::sort(support_.begin(), support_.end());
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (support_[i] < 1 || support_[i] > n_tx_) {
            throw ArgumentError("index vector support entry out of range");
        }
        if (i > 0 && support_[i] == support_[i - 1]) {
            throw ArgumentError("index vector support has a duplicate antenna");
        }
    }
}

bool IndexVector::is_active(std::size_t antenna) const {
    return std::binary_search(support_.begin(), support_.end(), antenna);
}

std::size_t im_bit_count(std::size_t n_tx, std::size_t n_active) {
    if (n_active == 0 || n_tx == 0 || n_active > n_tx) {
        throw ArgumentError("im_bit_count: need 1 <= n_active <= n_tx");
    }
    const unsigned __int128 c = binom128(n_tx, n_active);
    if (c == kBinomSaturated) {
        throw CapacityError("im_bit_count: antenna count too large for exact arithmetic");
    }
    return floor_log2_u128(c);
}

double bits_per_symbol(std::size_t n_tx, std::size_t n_active, std::size_t order,
                       std::size_t slot_len) {
    if (slot_len == 0) {
        throw ArgumentError("bits_per_symbol: slot length must be positive");
    }
    if (order < 2 || (order & (order - 1)) != 0) {
        throw ArgumentError("bits_per_symbol: order must be a power of two >= 2");
    }
    const double sym_bits = static_cast<double>(n_active) * std::log2(static_cast<double>(order));
    const double im_bits = static_cast<double>(im_bit_count(n_tx, n_active));
    return sym_bits + im_bits / static_cast<double>(slot_len);
}

std::uint64_t subset_count(std::size_t n_tx, std::size_t n_active) {
    if (n_active == 0 || n_tx == 0 || n_active > n_tx) {
        throw ArgumentError("subset_count: need 1 <= n_active <= n_tx");
    }
    const unsigned __int128 c = binom128(n_tx, n_active);
    if (c > std::numeric_limits<std::uint64_t>::max()) {
        throw CapacityError("subset_count: C(n_tx, n_active) exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(c);
}

IndexVector index_set_from_rank(std::uint64_t rank, std::size_t n_tx, std::size_t n_active) {
    const std::uint64_t total = subset_count(n_tx, n_active);
    if (rank >= total) {
        throw ArgumentError("index_set_from_rank: rank " + std::to_string(rank) +
                            " out of range (have " + std::to_string(total) + " subsets)");
    }
    std::vector<std::size_t> support;
    support.reserve(n_active);
    std::uint64_t r = rank;
    std::size_t next = 1;
    for (std::size_t picked = 0; picked < n_active; ++picked) {
        for (std::size_t v = next;; ++v) {
            // Subsets whose next element is v: choose the rest from {v+1..n_tx}.
            const std::uint64_t cnt =
                static_cast<std::uint64_t>(binom128(n_tx - v, n_active - picked - 1));
            if (r < cnt) {
                support.push_back(v);
                next = v + 1;
                break;
            }
            r -= cnt;
        }
    }
    return IndexVector(n_tx, std::move(support));
}

std::uint64_t rank_from_index_set(const IndexVector& x) {
    const std::size_t n_tx = x.n_tx();
    const std::size_t k = x.n_active();
    std::uint64_t rank = 0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t chosen = x.support()[i];
        for (std::size_t v = prev + 1; v < chosen; ++v) {
            rank += static_cast<std::uint64_t>(binom128(n_tx - v, k - i - 1));
        }
        prev = chosen;
    }
    return rank;
}

SlotSignal transmit_slot(const IndexVector& x, const Constellation& c, std::size_t slot_len,
                         RngStream& rng) {
    if (slot_len == 0) {
        throw ArgumentError("transmit_slot: slot length must be positive");
    }
    if (c.points.size() != c.order || c.order == 0) {
        throw ArgumentError("transmit_slot: malformed constellation");
    }
    SlotSignal s;
    s.support = x.support();
    s.symbols.assign(slot_len, CVec(x.n_tx(), cxd{0.0, 0.0}));
    for (CVec& sym : s.symbols) {
        for (const std::size_t antenna : s.support) {
            sym[antenna - 1] = c.points[rng.next_below(c.order)];
        }
    }
    return s;
}

ReceivedSlot simulate_received_slot(const ComplexMatrix& h, const SlotSignal& s,
                                    const NoiseModel& noise, RngStream& rng) {
    if (s.symbols.empty()) {
        throw ArgumentError("simulate_received_slot: empty slot");
    }
    if (h.cols() != s.symbols.front().size()) {
        throw ArgumentError("simulate_received_slot: channel has " + std::to_string(h.cols()) +
                            " columns but symbols have length " +
                            std::to_string(s.symbols.front().size()));
    }
    const std::size_t n = h.rows();
    ReceivedSlot y;
    y.observations.assign(s.symbols.size(), CVec(n, cxd{0.0, 0.0}));
    for (std::size_t m = 0; m < s.symbols.size(); ++m) {
        CVec& obs = y.observations[m];
        // Only the supported columns contribute.
        for (const std::size_t antenna : s.support) {
            const cxd sym = s.symbols[m][antenna - 1];
            for (std::size_t i = 0; i < n; ++i) {
                obs[i] += h(i, antenna - 1) * sym;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            obs[i] += rng.next_cscg(noise.variance);
        }
    }
    return y;
}

} // namespace rcsm
