#pragma once

// SplitMix64 in counter form. A stream is identified by a 64-bit key; its
// i-th output (i = 0, 1, ...) is
//
//     mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
//
// which is exactly the sequence produced by the classic SplitMix64 generator
// seeded with `key`. Outputs are pure functions of (key, i), so a stream can
// be split by using its outputs as keys of child streams. Nothing here
// depends on floating point, so results are bit-identical across platforms.

#include <cstdint>
#include <limits>

namespace recomb {

inline constexpr std::uint64_t splitmix_gamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    /// Output at an arbitrary position, independent of the cursor.
    constexpr std::uint64_t at(std::uint64_t index) const noexcept {
        return mix64(key_ + (index + 1) * splitmix_gamma);
    }

    constexpr std::uint64_t operator()() noexcept { return at(counter_++); }

    /// Child stream keyed by the index-th output of this one.
    constexpr CounterRng split(std::uint64_t index) const noexcept { return CounterRng(at(index)); }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t position() const noexcept { return counter_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Uniform double in (0, 1] from the top 53 bits.
inline double to_unit_interval(std::uint64_t u) noexcept {
    return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;
}

}  // namespace recomb
