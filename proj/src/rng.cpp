#include "rcsm/rng.hpp"

#include <cmath>
#include <numbers>

#include "rcsm/errors.hpp"

namespace rcsm {

namespace {

// splitmix64 finalizer; good avalanche, standard choice for seeding xoshiro.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    // Fold both key halves into one splitmix chain.
    std::uint64_t x = mix64(seed) ^ mix64(stream_id * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
    for (auto& s : state_) {
        x += 0x9E3779B97F4A7C15ULL;
        s = mix64(x);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 1; // xoshiro must not start from the all-zero state
    }
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
    if (bound == 0) {
        throw ArgumentError("next_below requires bound >= 1");
    }
    const std::uint64_t threshold = (0 - bound) % bound; // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

double RngStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::pair<double, double> RngStream::next_normal_pair() {
    // Box-Muller; u1 shifted into (0, 1] so the log stays finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

std::complex<double> RngStream::next_cscg(double variance) {
    if (!(variance > 0.0)) {
        throw ArgumentError("complex Gaussian variance must be positive");
    }
    const auto [g0, g1] = next_normal_pair();
    const double s = std::sqrt(variance * 0.5);
    return {s * g0, s * g1};
}

} // namespace rcsm
