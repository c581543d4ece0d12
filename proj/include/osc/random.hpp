#pragma once

#include <cstdint>
#include <random>

namespace osc {

using Rng = std::mt19937_64;

/// Named streams for seed derivation. Each consumer of randomness draws from
/// its own stream so that adding draws in one place never shifts another.
namespace stream {
inline constexpr std::uint64_t basis = 0x01;
inline constexpr std::uint64_t point = 0x02;
inline constexpr std::uint64_t noise = 0x03;
inline constexpr std::uint64_t seeds = 0x04;
inline constexpr std::uint64_t kmeans = 0x05;
inline constexpr std::uint64_t fallback = 0x06;
inline constexpr std::uint64_t peel = 0x07;
inline constexpr std::uint64_t trial = 0x08;
inline constexpr std::uint64_t replication = 0x09;
inline constexpr std::uint64_t cell = 0x0a;
inline constexpr std::uint64_t sphere = 0x0b;
inline constexpr std::uint64_t power_iteration = 0x0c;
}  // namespace stream

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent 64-bit seed for (stream, index) from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id,
                                    std::uint64_t index = 0) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(stream_id)) + splitmix64(index + 1));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream_id, std::uint64_t index = 0) {
    return Rng(derive_seed(master, stream_id, index));
}

}  // namespace osc
