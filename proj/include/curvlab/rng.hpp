#pragma once

// Splittable counter-based PRNG (SplitMix64 core).  Streams are derived
// by hashing labels into the key, so sampling for one catalog entry or
// suite never depends on how many draws another consumed.  Output is
// identical across platforms for a fixed seed.

#include <cstdint>
#include <string_view>

namespace curvlab {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_label(std::string_view s) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}
} // namespace detail

class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : state_(detail::mix64(seed)) {}

    /// Independent child stream; deterministic in (parent key, label).
    SplitRng split(std::string_view label) const {
        return SplitRng(state_ ^ detail::hash_label(label));
    }
    SplitRng split(std::uint64_t index) const {
        return SplitRng(state_ ^ detail::mix64(index + 0x51ed2701ull));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

} // namespace curvlab
