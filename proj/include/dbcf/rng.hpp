#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace dbcf {

inline constexpr double kPi = 3.14159265358979323846;

/// splitmix64 finalizer; full-avalanche mix of a 64-bit value.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a stream index.
/// Used to expand one experiment seed into per-partition / per-query seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(master ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Minimal deterministic generator (splitmix64 sequence). The standard
/// <random> distributions are implementation-defined, so everything that
/// must reproduce byte-identically draws through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n) by rejection; n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one value per call, no caching).
    double next_gaussian() {
        double u = next_double();
        while (u <= 0.0) u = next_double();
        const double v = next_double();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
    }

    /// k distinct values sampled uniformly from items, in draw order.
    template <typename T>
    std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t k) {
        std::vector<T> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k && !items.empty(); ++i) {
            const std::size_t j = static_cast<std::size_t>(next_below(items.size()));
            out.push_back(items[j]);
            items[j] = items.back();
            items.pop_back();
        }
        return out;
    }

private:
    std::uint64_t state_;
};

}  // namespace dbcf
