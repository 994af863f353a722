#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hnnflow {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27; z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// counter-based key: every (seed, a, b, c) tuple yields an independent value,
// so parallel consumers get identical numbers regardless of schedule
inline std::uint64_t key4(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t k = mix64(seed + 0x9E3779B97F4A7C15ULL);
    k = mix64(k ^ (a + 0x9E3779B97F4A7C15ULL));
    k = mix64(k ^ (b + 0xD1B54A32D192ED03ULL));
    k = mix64(k ^ (c + 0x8BB84B93962EACC9ULL));
    return k;
}

inline double bits_to_unit(std::uint64_t k) { // (0,1]
    return static_cast<double>((k >> 11) + 1) * 0x1p-53;
}

// standard normal addressed by (seed, step, particle, dim); Box-Muller cosine branch
inline double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t particle, std::uint64_t dim) {
    const std::uint64_t k = key4(seed, step, particle, dim);
    const double u1 = bits_to_unit(k);
    const double u2 = bits_to_unit(mix64(k + 0x9E3779B97F4A7C15ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// sequential stream for data generation; mappings are hand-rolled because the
// std::*_distribution algorithms are implementation-defined and would break
// cross-toolchain reproducibility of seeded protocols
class SeqRng {
public:
    explicit SeqRng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { // [0,1)
        return static_cast<double>(eng_() >> 11) * 0x1p-53;
    }
    double uniform01_open() { // (0,1]
        return bits_to_unit(eng_());
    }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() { // Box-Muller pair, cached spare
        if (has_spare_) { has_spare_ = false; return spare_; }
        const double u1 = uniform01_open();
        const double u2 = uniform01_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace hnnflow
