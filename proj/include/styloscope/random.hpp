#pragma once

// Portable random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Standard distributions are implementation-defined, so all derived
// variates are produced here from raw engine output:
//
//   * seeding: std::seed_seq{lo32(seed), hi32(seed), stream} (seed_seq's
//     mixing algorithm is also fixed by the standard);
//   * uniform_index(n): rejection sampling on 64-bit words;
//   * uniform01(): top 53 bits scaled by 2^-53;
//   * normal(): Box-Muller on two uniform01() draws.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace styloscope {

class Random {
public:
    explicit Random(std::uint64_t seed, std::uint32_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32), stream};
        engine_.seed(seq);
    }

    /// Stream id derived from a short tag, so stages draw independent streams
    /// from one master seed ("split", "forest", ...). FNV-1a, 32-bit.
    static constexpr std::uint32_t stream_id(std::string_view tag) {
        std::uint32_t h = 2166136261u;
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 16777619u;
        }
        return h;
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    /// Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal(double mean = 0.0, double sd = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + sd * r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace styloscope
