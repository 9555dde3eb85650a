#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "agar/bits.hpp"

namespace agar {

/* All randomness in the library flows through mt19937_64 with splitmix64
 * seeding; the standard pins the engine's output sequence, so identical
 * seeds give identical streams on every platform. */
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s);
    return std::mt19937_64(mixed);
}

inline BitString random_bits(std::size_t n, std::uint64_t seed) {
    auto eng = seeded_engine(seed);
    BitString out;
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if ((i & 63) == 0) word = eng();
        out.push_back(static_cast<Bit>((word >> (i & 63)) & 1u));
    }
    return out;
}

inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/* Marsaglia polar method; avoids sin/cos so the only libm calls are
 * sqrt and log, keeping reruns bit-identical on a given host. */
inline std::vector<double> gaussian_samples(std::size_t n, double sigma, std::uint64_t seed) {
    auto eng = seeded_engine(seed);
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        double u = 2.0 * uniform01(eng) - 1.0;
        double v = 2.0 * uniform01(eng) - 1.0;
        double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0) continue;
        double m = std::sqrt(-2.0 * std::log(s) / s);
        out.push_back(sigma * u * m);
        if (out.size() < n) out.push_back(sigma * v * m);
    }
    return out;
}

}  // namespace agar
