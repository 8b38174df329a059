#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace redd {

// All randomness in the project flows through mt19937_64 plus the mappings
// below, so that a stream is fully determined by (algorithm, seed). The
// names/formulas are echoed in output metadata for cross-language replay.
using Rng = std::mt19937_64;

inline constexpr const char* kRngName = "mt19937_64";
inline constexpr const char* kSeedMixDoc =
    "cell_seed=splitmix64(base^(0x9E3779B97F4A7C15*(di+1))^(0xC2B2AE3D27D4EB4F*(li+1)))";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Per-cell seed for sweep cell (d_index, lambda_index). See kSeedMixDoc.
inline std::uint64_t cell_seed(std::uint64_t base, std::uint64_t d_index, std::uint64_t lambda_index) {
    return splitmix64(base ^ (0x9E3779B97F4A7C15ull * (d_index + 1)) ^
                      (0xC2B2AE3D27D4EB4Full * (lambda_index + 1)));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_u01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform_u01(rng) < p; }

// Unbiased uniform integer in [0, n).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

// Sorted d distinct indices from [0, K), uniform over all C(K,d) subsets.
// Partial Fisher-Yates; consumes exactly d bounded draws.
inline void draw_subset(Rng& rng, int K, int d, std::vector<int>& scratch, std::vector<int>& out) {
    scratch.resize(static_cast<std::size_t>(K));
    std::iota(scratch.begin(), scratch.end(), 0);
    for (int i = 0; i < d; ++i) {
        const int j = i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(K - i)));
        std::swap(scratch[static_cast<std::size_t>(i)], scratch[static_cast<std::size_t>(j)]);
    }
    out.assign(scratch.begin(), scratch.begin() + d);
    std::sort(out.begin(), out.end());
}

}  // namespace redd
