#pragma once
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "interval.hpp"
#include "quadrature.hpp"

namespace spacinglab {

/// Default bulk margin: asymptotic formulas are used for |x| < (sqrt(2)-eps)sqrt(n).
inline constexpr double default_bulk_eps = 0.05;

namespace detail {
inline void require_bulk(double x, int n, double eps) {
    double limit = (std::sqrt(2.0) - eps) * std::sqrt(static_cast<double>(n));
    if (!(std::fabs(x) < limit))
        throw std::domain_error("asymptotics: point outside the bulk |x| < (sqrt(2)-eps)sqrt(n)");
}
} // namespace detail

/// Plancherel-Rotach phase Phi(x,n) = e^{-i pi/4} (x/sqrt(2n) + i sqrt(1-x^2/2n))^{n+1/2}
/// e^{-(i/2) x sqrt(2n-x^2)}, computed in log-polar form: all three factors are
/// unimodular in the bulk, so only the argument accumulates. The exponent n+1/2
/// and the leading e^{-i pi/4} are pinned by the exact-recurrence oracle: this
/// is the unique sign/index choice whose relative error decays like 1/n.
inline std::complex<double> pr_phase(double x, int n, double eps = default_bulk_eps) {
    if (n < 1) throw std::invalid_argument("pr_phase: n < 1");
    double c2 = x * x / (2.0 * n);
    if (c2 >= 1.0) throw std::domain_error("pr_phase: x^2/(2n) >= 1");
    detail::require_bulk(x, n, eps);
    double c = x / std::sqrt(2.0 * n);
    double phi = std::atan2(std::sqrt(1.0 - c * c), c);
    double arg = -0.25 * pi + (n + 0.5) * phi - 0.5 * x * std::sqrt(2.0 * n - x * x);
    return std::polar(1.0, arg);
}

/// Consecutive-index phase ratio: Phi(x,n+1)/Phi(x,n) = (x + i sqrt(2n-x^2))/sqrt(2n) + O(1/n).
inline std::complex<double> pr_ratio(double x, int n, double eps = default_bulk_eps) {
    if (n < 1) throw std::invalid_argument("pr_ratio: n < 1");
    if (x * x >= 2.0 * n) throw std::domain_error("pr_ratio: x^2 >= 2n");
    detail::require_bulk(x, n, eps);
    double s = std::sqrt(2.0 * n);
    return {x / s, std::sqrt(2.0 * n - x * x) / s};
}

/// Bulk Hermite asymptotics H_n(x) ~ exp(log_envelope) * oscillation, with
/// log_envelope = x^2/2 + ((n+1)/2)ln 2 + (n/2)ln n - n/2 - (1/4)ln(1-x^2/2n)
/// and oscillation = Re Phi(x,n); relative error O(1/n) away from zeros of the
/// oscillation.
struct HermitePrApprox {
    double log_envelope;
    double oscillation;
};

inline HermitePrApprox hermite_pr_approx(int n, double x, double eps = default_bulk_eps) {
    if (n < 1) throw std::invalid_argument("hermite_pr_approx: n < 1");
    detail::require_bulk(x, n, eps);
    double c2 = x * x / (2.0 * n);
    double log_env = 0.5 * x * x + 0.5 * (n + 1.0) * M_LN2 + 0.5 * n * std::log(static_cast<double>(n))
                   - 0.5 * n - 0.25 * std::log1p(-c2);
    return {log_env, pr_phase(x, n, eps).real()};
}

/// Wigner semicircle approximation of the diagonal kernel:
/// K_n(x,x) ~ (sqrt(2n)/pi) sqrt(1 - x^2/(2n)); 0 outside the support.
inline double semicircle_density(int n, double x) {
    if (n < 1) throw std::invalid_argument("semicircle_density: n < 1");
    double c2 = x * x / (2.0 * n);
    if (c2 >= 1.0) return 0.0;
    return std::sqrt(2.0 * n) / pi * std::sqrt(1.0 - c2);
}

/// Test helper for the unimodular identity Re[uv]^2 - Re[u] Re[uv^2] = Im[v]^2
/// (|u| = |v| = 1), used in squaring oscillatory asymptotics.
inline double unimodular_identity_residual(std::complex<double> u, std::complex<double> v) {
    double lhs = (u * v).real() * (u * v).real() - u.real() * (u * v * v).real();
    double rhs = v.imag() * v.imag();
    return std::fabs(lhs - rhs);
}

/// One-cut equilibrium measure Psi(x) dx on [a, b].
struct EquilibriumMeasure {
    double a;
    double b;
    std::function<double(double)> density;
};

/// Semicircle equilibrium measure of V(x) = x^2: Psi(z) = sqrt(2-z^2)/pi on [-sqrt2, sqrt2].
inline EquilibriumMeasure semicircle_measure() {
    double r = std::sqrt(2.0);
    return {-r, r, [](double z) { return std::sqrt(std::max(0.0, 2.0 - z * z)) / pi; }};
}

namespace detail {
/// Tail mass int_z^b Psi(u) du. The substitution u = b - w^2 removes the
/// square-root endpoint behavior; 64-node Gauss-Legendre with a single
/// refinement check against 32 nodes.
inline double equilibrium_tail(const EquilibriumMeasure& m, double z) {
    double wmax = std::sqrt(m.b - z);
    auto g = [&](double w) { return 2.0 * w * m.density(m.b - w * w); };
    double v32 = integrate(gauss_legendre(32, 0.0, wmax), g);
    double v64 = integrate(gauss_legendre(64, 0.0, wmax), g);
    if (std::fabs(v64 - v32) > 1e-10)
        return integrate(gauss_legendre(128, 0.0, wmax), g);
    return v64;
}
} // namespace detail

enum class EtaIndex { top, second };  // eta_n vs eta_{n-1}

/// Leading-order bulk asymptotics of the k-th derivative of the UUE
/// orthonormal function eta_n (index top) or eta_{n-1} (index second):
///   (n pi Psi(z))^k sqrt(2/((b-a)pi)) Re[(-i)^k e^{i n pi T(z)} (c1 q + c2 / q)]
/// with T(z) = int_z^b Psi, q = ((b-z)/(z-a))^{1/4}, c2 = e^{-i pi/4} and
/// c1 = e^{i pi/4} (top) or e^{-3i pi/4} (second). Each derivative of the
/// oscillatory exponential brings down -i n pi Psi(z), hence the (-i)^k.
inline double uue_eta_asymptotic(const EquilibriumMeasure& measure, int n, EtaIndex index,
                                 int k, double z, double eps = default_bulk_eps) {
    if (n < 1) throw std::invalid_argument("uue_eta_asymptotic: n < 1");
    if (k < 0) throw std::invalid_argument("uue_eta_asymptotic: k < 0");
    if (!(z >= measure.a + eps && z <= measure.b - eps))
        throw std::domain_error("uue_eta_asymptotic: z within eps of a support endpoint");
    const std::complex<double> minus_i{0.0, -1.0};
    std::complex<double> c1 = (index == EtaIndex::top) ? std::polar(1.0, 0.25 * pi)
                                                       : std::polar(1.0, -0.75 * pi);
    std::complex<double> c2 = std::polar(1.0, -0.25 * pi);
    double q = std::pow((measure.b - z) / (z - measure.a), 0.25);
    double tail = detail::equilibrium_tail(measure, z);
    std::complex<double> osc = std::pow(minus_i, k) * std::polar(1.0, n * pi * tail)
                             * (c1 * q + c2 / q);
    double amp = std::pow(n * pi * measure.density(z), k)
               * std::sqrt(2.0 / ((measure.b - measure.a) * pi));
    return amp * osc.real();
}

} // namespace spacinglab
