#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "interval.hpp"
#include "quadrature.hpp"

namespace spacinglab {

/// zeta'(-1), stored to 20 digits. Computed once with mpmath
/// (mp.zeta(-1, derivative=1) at 50 decimal digits); equals 1/12 - ln A with
/// A the Glaisher-Kinkelin constant.
inline constexpr double zeta_prime_minus_one = -0.16542114370045092921;

/// Sine kernel in unit-mean-spacing normalization, sin(pi(x-y))/(pi(x-y)),
/// diagonal value 1; chosen so that E2'(0) = -1 matches the small-s series.
inline double sine_kernel(double x, double y) {
    double z = pi * (x - y);
    if (std::fabs(z) < 1e-4) {
        double z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

/// Gap probability E2(0;s) for one interval.
struct GapProbe {
    double s = 0.0;
    int m = 0;
    double value = 1.0;
};

namespace detail {

/// det(I - A) with A_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j) on the given nodes,
/// by Gaussian elimination with partial pivoting. I - A is well-conditioned
/// here (eigenvalues of A lie in [0, 1)).
inline double nystrom_determinant(const std::vector<double>& nodes,
                                  const std::vector<double>& weights) {
    std::size_t m = nodes.size();
    std::vector<double> sw(m);
    for (std::size_t i = 0; i < m; ++i) sw[i] = std::sqrt(weights[i]);
    std::vector<double> a(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            a[i * m + j] = (i == j ? 1.0 : 0.0) - sw[i] * sine_kernel(nodes[i], nodes[j]) * sw[j];
    double det = 1.0;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(a[r * m + col]) > std::fabs(a[pivot * m + col])) pivot = r;
        if (pivot != col) {
            for (std::size_t j = 0; j < m; ++j) std::swap(a[col * m + j], a[pivot * m + j]);
            det = -det;
        }
        double p = a[col * m + col];
        if (p == 0.0) return 0.0;
        det *= p;
        for (std::size_t r = col + 1; r < m; ++r) {
            double f = a[r * m + col] / p;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < m; ++j) a[r * m + j] -= f * a[col * m + j];
        }
    }
    return det;
}

inline double gap_value(double s, int m) {
    QuadratureRule rule = gauss_legendre(m, 0.0, s);
    return nystrom_determinant(rule.nodes, rule.weights);
}

} // namespace detail

/// E2(0;s) = det(I - A) by the Nystrom method on m Gauss-Legendre nodes;
/// spectral convergence in m, verified internally against 2m nodes (throws on
/// disagreement above 1e-10).
inline GapProbe gap_probability(double s, int m) {
    if (!(s > 0.0)) throw std::invalid_argument("gap_probability: s <= 0");
    if (m < 20) throw std::invalid_argument("gap_probability: m < 20");
    double v1 = detail::gap_value(s, m);
    double v2 = detail::gap_value(s, 2 * m);
    if (std::fabs(v1 - v2) > 1e-10)
        throw std::runtime_error("gap_probability: Nystrom rule not converged (increase m)");
    return GapProbe{s, m, v1};
}

/// Gap probability of a union of disjoint intervals: block node set, same
/// determinant. For well-separated intervals the value approaches the product
/// of single-interval values.
inline double gap_probability_multi(const std::vector<Interval>& intervals, int m_per_interval) {
    if (intervals.empty()) throw std::invalid_argument("gap_probability_multi: no intervals");
    if (m_per_interval < 20) throw std::invalid_argument("gap_probability_multi: m < 20");
    std::vector<Interval> sorted = intervals;
    std::sort(sorted.begin(), sorted.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].lo < sorted[i - 1].hi)
            throw std::invalid_argument("gap_probability_multi: intervals overlap");
    auto assemble = [&](int m) {
        std::vector<double> nodes, weights;
        for (const Interval& iv : sorted) {
            QuadratureRule rule = gauss_legendre(m, iv.lo, iv.hi);
            nodes.insert(nodes.end(), rule.nodes.begin(), rule.nodes.end());
            weights.insert(weights.end(), rule.weights.begin(), rule.weights.end());
        }
        return detail::nystrom_determinant(nodes, weights);
    };
    double v1 = assemble(m_per_interval);
    double v2 = assemble(2 * m_per_interval);
    if (std::fabs(v1 - v2) > 1e-10)
        throw std::runtime_error("gap_probability_multi: Nystrom rule not converged");
    return v1;
}

namespace detail {
inline int gap_nodes_for(double s) {
    return std::max(20, static_cast<int>(std::ceil(10.0 * s)));
}
} // namespace detail

/// Consecutive-spacing density p2(0;s) = d^2/ds^2 E2(0;s), by central second
/// differences with one level of Richardson extrapolation. Throws if the
/// residual of the extrapolated value against the finer difference exceeds
/// 1e-5.
inline double p2_density(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("p2_density: s <= 0");
    double h = std::max(1e-3, 1e-2 * s);
    int m = detail::gap_nodes_for(s + h);
    auto e2 = [m](double t) { return t <= 0.0 ? 1.0 : detail::gap_value(t, m); };
    auto second = [&](double step) {
        return (e2(s + step) - 2.0 * e2(s) + e2(s - step)) / (step * step);
    };
    double coarse = second(h);
    double fine = second(0.5 * h);
    double extrapolated = (4.0 * fine - coarse) / 3.0;
    if (std::fabs(extrapolated - fine) > 1e-5)
        throw std::runtime_error("p2_density: finite-difference step failure");
    return extrapolated;
}

/// Dyson's large-s expansion of the log gap probability in the raw
/// normalization (kernel sin(x-y)/(pi(x-y)), density 1/pi):
/// log E(s) = -s^2/8 - (1/4) log s + 3 zeta'(-1) + (1/3) log 2 + o(1).
/// In the unit-mean-spacing normalization used by gap_probability the same
/// expansion reads log E2(0;s) = dyson_tail_log(pi s); verified against the
/// Nystrom determinant to 4e-4 at s = 6.
inline double dyson_tail_log(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("dyson_tail_log: s <= 0");
    return -s * s / 8.0 - 0.25 * std::log(s) + 3.0 * zeta_prime_minus_one + M_LN2 / 3.0;
}

/// The two prefactor conventions of the max-spacing heuristic: u^{3/4}/4 from
/// the tail integral, u^{7/4}/16 from the p2 density. Both are exposed;
/// neither is corrected.
enum class MaxSpacingPrefactor { tail, density };

/// Heuristic Poisson mean of the count of spacings exceeding gamma (in mean
/// spacings when the local density K is 1):
/// mu = int_I K(x) pref(gamma K(x)) exp(-(gamma K(x))^2/8 + 3 zeta'(-1) + (1/3)log 2) dx.
/// A null density means the constant density 1, evaluated in closed form.
inline double max_spacing_mu(const Interval& window, double gamma,
                             const std::function<double(double)>& density = nullptr,
                             MaxSpacingPrefactor form = MaxSpacingPrefactor::density) {
    if (!(gamma > 0.0)) throw std::invalid_argument("max_spacing_mu: gamma <= 0");
    double c = 3.0 * zeta_prime_minus_one + M_LN2 / 3.0;
    auto prefactor = [form](double u) {
        return form == MaxSpacingPrefactor::tail ? std::pow(u, 0.75) / 4.0
                                                 : std::pow(u, 1.75) / 16.0;
    };
    if (!density) {
        return window.length() * prefactor(gamma) * std::exp(-gamma * gamma / 8.0 + c);
    }
    QuadratureRule rule = composite_gauss_legendre(8, 32, window.lo, window.hi);
    return integrate(rule, [&](double x) {
        double k = density(x);
        double u = gamma * k;
        return k * prefactor(u) * std::exp(-u * u / 8.0 + c);
    });
}

} // namespace spacinglab
