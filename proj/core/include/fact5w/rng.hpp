#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fact5w {

/// FNV-1a 64-bit hash. Used for token hashing, file checksums and artifact
/// fingerprints. Not cryptographic.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffset) {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= kFnvPrime;
    }
    return state;
}

constexpr std::uint64_t fnv1a64_u64(std::uint64_t value, std::uint64_t state = kFnvOffset) {
    for (int i = 0; i < 8; ++i) {
        state ^= (value >> (8 * i)) & 0xff;
        state *= kFnvPrime;
    }
    return state;
}

/// splitmix64 step. Counter-based: deterministic on every platform.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Maps a u64 to [0, 1) with 53 bits of precision. Exact IEEE-754 arithmetic,
/// so the result is identical on every conforming platform.
constexpr double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Deterministic RNG wrapper. std::mt19937_64 has a standard-specified output
/// sequence; the distribution conversions are done by hand because the
/// std::*_distribution classes are implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return u64_to_unit(next_u64()); }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Uses rejection sampling to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) {
            return 0;
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) {
            x = next_u64();
        }
        return x % n;
    }

    /// Fisher-Yates shuffle with a fixed visitation order.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace fact5w
