#pragma once

#include <cstdint>
#include <random>

namespace ehsim {

// splitmix64 mixing step; used to derive independent child seeds from a
// master seed plus a stream tag, so every component draws from its own
// reproducible stream no matter what order components run in.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(mix64(seed) ^ mix64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag_a, std::uint64_t tag_b) {
    return derive_seed(derive_seed(seed, tag_a), tag_b);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive_seed(derive_seed(seed, a, b), c);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform in [0, 1). Hand-rolled from raw engine output: the standard
// distributions are implementation-defined, and identical streams across
// library versions matter more here than one multiply.
inline double rand_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rand_range(Rng& rng, double lo, double hi) {
    return lo + rand_unit(rng) * (hi - lo);
}

// Uniform integer in [0, n). Modulo bias is < 2^-60 for the small n used here.
inline std::uint64_t rand_index(Rng& rng, std::uint64_t n) {
    return rng() % n;
}

}  // namespace ehsim
