#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace spacinglab {

/// Mixing finalizer of the splitmix64 generator.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive the seed of trial `index` from a master seed. Distinct indices give
/// statistically independent streams, so trials can run on any worker layout
/// without changing the sampled values.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64_mix(master + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Counter-based 64-bit generator (splitmix64) with the usual transforms on
/// top: uniform, Box-Muller normal, Marsaglia-Tsang gamma, chi.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64_mix(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 == 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(two_pi_ * u2);
        have_cached_ = true;
        return r * std::cos(two_pi_ * u2);
    }

    /// Gamma(shape alpha, scale 1) via Marsaglia-Tsang squeeze.
    double gamma(double alpha) {
        if (!(alpha > 0.0)) throw std::invalid_argument("Rng::gamma: alpha <= 0");
        if (alpha < 1.0) {
            double u = 0.0;
            do {
                u = uniform();
            } while (u == 0.0);
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        double d = alpha - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Chi-distributed value with k degrees of freedom (k need not be integer).
    double chi(double k) { return std::sqrt(2.0 * gamma(0.5 * k)); }

  private:
    static constexpr double two_pi_ = 6.283185307179586476925286766559;
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

} // namespace spacinglab
