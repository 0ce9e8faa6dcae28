#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace regmdp {

/// splitmix64 finalizer; used to derive independent stream seeds from a
/// master seed without correlating nearby values.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

/// Seeded random stream with platform-independent value mapping.
///
/// std::mt19937_64 output is pinned by the standard, but the standard
/// distributions are not; results would differ across standard libraries.
/// Uniform and gaussian draws are therefore mapped from raw engine output
/// so that identical seeds give bit-identical sequences everywhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no rejection, so draw count per
    /// sample is fixed and the stream stays reproducible).
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t next_raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace regmdp
