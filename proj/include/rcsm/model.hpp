#pragma once

#include <cstdint>
#include <vector>

#include "rcsm/complex_matrix.hpp"
#include "rcsm/rng.hpp"

namespace rcsm {

// Antenna geometry and slot length shared by every component. A slot is a run
// of `slot_len` consecutive symbol vectors transmitted over one fixed set of
// `n_active` antennas, so the index bits are spread over the whole slot.
struct SystemDims {
    std::size_t n_rx = 0;     // receive antennas
    std::size_t n_tx = 0;     // transmit antennas
    std::size_t n_active = 0; // simultaneously active transmit antennas
    std::size_t slot_len = 0; // symbol vectors per slot

    void validate() const; // throws ArgumentError on nonsense
};

// Additive noise level. Symbols are unit-energy, so the per-dimension noise
// variance is just the reciprocal of the linear SNR.
struct NoiseModel {
    double snr_linear = 1.0;
    double variance = 1.0;

    static NoiseModel from_linear(double snr_linear);
    static NoiseModel from_db(double snr_db);
};

struct Constellation {
    std::size_t order = 0;
    CVec points;
};

// Square QAM with a per-axis Gray level ordering, normalized to unit mean
// energy. Supported orders: 4, 16, 64.
Constellation qam_constellation(std::size_t order);

// Which antennas are on: a sorted 1-based support of size n_active out of
// n_tx. The all-off vector is not representable on purpose.
class IndexVector {
public:
    IndexVector(std::size_t n_tx, std::vector<std::size_t> support);

    std::size_t n_tx() const { return n_tx_; }
    std::size_t n_active() const { return support_.size(); }
    const std::vector<std::size_t>& support() const { return support_; }
    bool is_active(std::size_t antenna) const; // 1-based

    bool operator==(const IndexVector&) const = default;

private:
    std::size_t n_tx_;
    std::vector<std::size_t> support_;
};

// Number of antenna-subset bits a slot can carry: floor(log2 C(n_tx, n_active)).
// Exact integer arithmetic throughout (no doubles, no rounding surprises).
std::size_t im_bit_count(std::size_t n_tx, std::size_t n_active);

// Spectral efficiency per symbol vector: n_active*log2(order) data bits plus
// the subset bits amortized over the slot.
double bits_per_symbol(std::size_t n_tx, std::size_t n_active, std::size_t order,
                       std::size_t slot_len);

// C(n_tx, n_active) as a plain integer; CapacityError if it does not fit.
std::uint64_t subset_count(std::size_t n_tx, std::size_t n_active);

// Bijection between lexicographic ranks [0, C(n_tx, n_active)) and sorted
// supports (combinatorial number system). Rank 0 is {1, ..., n_active}.
IndexVector index_set_from_rank(std::uint64_t rank, std::size_t n_tx, std::size_t n_active);
std::uint64_t rank_from_index_set(const IndexVector& x);

// One slot of transmitted symbol vectors. Every vector is zero off the shared
// support; the support is stored alongside for cheap audits.
struct SlotSignal {
    std::vector<CVec> symbols;         // slot_len vectors of length n_tx
    std::vector<std::size_t> support;  // sorted, 1-based
};

struct ReceivedSlot {
    std::vector<CVec> observations; // slot_len vectors of length n_rx
};

// Uniform i.i.d. constellation draws on the support, zeros elsewhere. The
// support is identical for every symbol vector in the slot by construction.
SlotSignal transmit_slot(const IndexVector& x, const Constellation& c, std::size_t slot_len,
                         RngStream& rng);

// y_m = H s_m + n_m with i.i.d. CSCG noise of the model's variance.
ReceivedSlot simulate_received_slot(const ComplexMatrix& h, const SlotSignal& s,
                                    const NoiseModel& noise, RngStream& rng);

} // namespace rcsm
