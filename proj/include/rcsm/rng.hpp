#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>

namespace rcsm {

// Deterministic random stream keyed by (seed, stream_id). The 256-bit xoshiro
// state is expanded from the key with splitmix64, so distinct stream ids give
// statistically independent sequences and Monte Carlo trials can run on any
// number of worker threads while still replaying bit-identically.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform on [0, bound), bound >= 1. Rejection sampling, no modulo bias.
    std::uint64_t next_below(std::uint64_t bound);

    // Uniform on [0, 1) with 53 random bits.
    double next_unit();

    // Two i.i.d. standard normals (Box-Muller).
    std::pair<double, double> next_normal_pair();

    // Circularly symmetric complex Gaussian: total variance `variance`, split
    // evenly between the real and imaginary parts.
    std::complex<double> next_cscg(double variance);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> state_;
};

} // namespace rcsm
