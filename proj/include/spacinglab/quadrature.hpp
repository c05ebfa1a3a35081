#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "interval.hpp"

namespace spacinglab {

/// Nodes and weights of a quadrature rule on a real interval.
/// Invariant: sum of weights equals the domain length, nodes lie strictly
/// inside the domain.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    Interval domain{IntervalKind::real_interval, 0.0, 1.0};
};

namespace detail {

/// Legendre P_m(x) and P_m'(x) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(int m, double x) {
    double p0 = 1.0, p1 = x;
    if (m == 0) return {1.0, 0.0};
    for (int k = 2; k <= m; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    double dp = m * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

} // namespace detail

/// m-point Gauss-Legendre nodes/weights on [-1, 1] (Newton iteration on the
/// Chebyshev initial guess; exact symmetry enforced by computing half).
inline void gauss_legendre_base(int m, std::vector<double>& x, std::vector<double>& w) {
    if (m < 1) throw std::invalid_argument("gauss_legendre_base: m < 1");
    x.assign(m, 0.0);
    w.assign(m, 0.0);
    int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = detail::legendre_pair(m, z);
            dp = d;
            double dz = p / d;
            z -= dz;
            if (std::fabs(dz) < 1e-15) {
                dp = detail::legendre_pair(m, z).second;
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if (m % 2 == 1) x[half - 1] = 0.0;
}

/// m-point Gauss-Legendre rule on [a, b].
inline QuadratureRule gauss_legendre(int m, double a, double b) {
    std::vector<double> x, w;
    gauss_legendre_base(m, x, w);
    QuadratureRule rule;
    rule.domain = Interval::real(a, b);
    rule.nodes.resize(m);
    rule.weights.resize(m);
    double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int i = 0; i < m; ++i) {
        rule.nodes[i] = mid + hw * x[i];
        rule.weights[i] = hw * w[i];
    }
    return rule;
}

/// Composite Gauss-Legendre rule: `panels` equal panels of `points_per_panel`
/// nodes each on [a, b]. Panel width bounds the resolvable oscillation scale.
inline QuadratureRule composite_gauss_legendre(int points_per_panel, int panels,
                                               double a, double b) {
    if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels < 1");
    std::vector<double> x, w;
    gauss_legendre_base(points_per_panel, x, w);
    QuadratureRule rule;
    rule.domain = Interval::real(a, b);
    double h = (b - a) / panels;
    rule.nodes.reserve(static_cast<std::size_t>(points_per_panel) * panels);
    rule.weights.reserve(static_cast<std::size_t>(points_per_panel) * panels);
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h, hw = 0.5 * h;
        for (int i = 0; i < points_per_panel; ++i) {
            rule.nodes.push_back(mid + hw * x[i]);
            rule.weights.push_back(hw * w[i]);
        }
    }
    return rule;
}

/// Composite rule whose panel width does not exceed `max_panel_width`.
inline QuadratureRule composite_for_wavelength(int points_per_panel, double max_panel_width,
                                               double a, double b) {
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel_width)));
    return composite_gauss_legendre(points_per_panel, panels, a, b);
}

template <class F>
double integrate(const QuadratureRule& rule, F&& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
}

} // namespace spacinglab
