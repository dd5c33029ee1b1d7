#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace liver {

/// Simulation time, always in whole microseconds.
using Micros = std::int64_t;
using NodeId = std::uint32_t;

/// Single random engine type used across the library. Every component takes
/// the engine by reference so callers control stream ownership.
using Rng = std::mt19937_64;

constexpr Micros kMillis = 1000;
constexpr Micros kSeconds = 1000 * kMillis;

constexpr Micros from_seconds(double s) { return static_cast<Micros>(s * 1e6 + (s >= 0 ? 0.5 : -0.5)); }
constexpr double to_seconds(Micros us) { return static_cast<double>(us) / 1e6; }

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer; used to derive independent, reproducible sub-streams
/// from one experiment seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return mix64(mix64(mix64(seed ^ mix64(a)) ^ b) ^ mix64(c + 0x632be59bd9b4e019ULL));
}

/// Vehicle size classes. Ordered by size so comparisons are meaningful.
enum class SizeClass : std::uint8_t { S = 0, M = 1, L = 2 };

std::string to_string(SizeClass c);
SizeClass parse_size_class(const std::string& s);

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

} // namespace liver
