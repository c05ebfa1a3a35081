#pragma once
#include <cmath>
#include <stdexcept>

namespace spacinglab {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Reduce an angle to [0, 2*pi).
inline double wrap_angle(double x) {
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

/// Shorter-arc distance between two angles, in [0, pi].
inline double circular_distance(double a, double b) {
    double d = std::fabs(wrap_angle(a) - wrap_angle(b));
    return d > pi ? two_pi - d : d;
}

/// Midpoint of the shorter arc between two angles, in [0, 2*pi).
inline double circular_midpoint(double a, double b) {
    a = wrap_angle(a);
    b = wrap_angle(b);
    double m = 0.5 * (a + b);
    if (std::fabs(a - b) > pi) m = wrap_angle(m + pi);
    return m;
}

enum class IntervalKind { arc, real_interval };

/// Observation window: a circular arc on [0, 2*pi) or a real interval.
struct Interval {
    IntervalKind kind;
    double lo;
    double hi;

    static Interval arc(double lo, double hi) {
        return {IntervalKind::arc, lo, hi};
    }
    static Interval real(double lo, double hi) {
        if (!(lo < hi)) throw std::invalid_argument("Interval: need lo < hi");
        return {IntervalKind::real_interval, lo, hi};
    }
    static Interval full_circle() { return {IntervalKind::arc, 0.0, two_pi}; }

    /// Measure |I|: arc length in (0, 2*pi], or hi - lo.
    double length() const {
        if (kind == IntervalKind::real_interval) return hi - lo;
        double len = hi - lo;
        if (len >= two_pi) return two_pi;
        len = std::fmod(len, two_pi);
        if (len <= 0.0) len += two_pi;
        return len;
    }

    bool contains(double x) const {
        if (kind == IntervalKind::real_interval) return lo <= x && x <= hi;
        double len = length();
        if (len >= two_pi) return true;
        return wrap_angle(x - lo) <= len;
    }
};

} // namespace spacinglab
