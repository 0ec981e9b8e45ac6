#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace vitals {

inline constexpr double kPi = 3.14159265358979323846;

// SplitMix64 (Vigna's public-domain constants). Every seeded behaviour in this
// project — weight init, dataset splits, epoch shuffles, synthetic data —
// draws from this generator so that runs are reproducible bit for bit.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Top 53 bits mapped to [0, 1).
    double next_unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform on [-1, 1) scaled by `bound`.
    double next_symmetric(double bound) noexcept {
        return (2.0 * next_unit() - 1.0) * bound;
    }

    // Standard normal via Box-Muller. Two uniform draws per value, none
    // cached, so the stream position stays easy to reason about.
    double next_gaussian() noexcept {
        double u1 = 1.0 - next_unit();  // (0, 1], keeps log finite
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Bounded draw by modulo. The bias is below 2^-53 for every bound used
    // here and keeping the draw a single next() makes it easy to mirror in
    // other languages.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        return next() % bound;
    }

private:
    std::uint64_t state_;
};

// One application of the SplitMix64 output mix to an arbitrary word. Used to
// derive independent sub-stream seeds (e.g. per-epoch shuffle seeds).
constexpr std::uint64_t splitmix_mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// In-place Fisher-Yates, descending index, j = rng.next_below(i + 1).
template <typename T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace vitals
