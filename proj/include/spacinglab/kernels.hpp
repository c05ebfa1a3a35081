#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "interval.hpp"

namespace spacinglab {

enum class Ensemble { CUE, GUE };

/// Kernel family and matrix size.
struct KernelSpec {
    Ensemble ensemble;
    int n;
};

/// Overflow-safe value of the Hermite pair (H_n(x), H_{n-1}(x)):
/// H_n(x) = h_n * exp(log_scale), H_{n-1}(x) = h_nm1 * exp(log_scale).
/// The larger mantissa stays in [1, B) with band B = 2^512, which keeps the
/// three-term recurrence in range to n >= 1e4.
struct ScaledHermitePair {
    int n = 0;
    double x = 0.0;
    double h_n = 1.0;
    double h_nm1 = 0.0;
    double log_scale = 0.0;

    /// H_n as a plain double; overflows for large n, intended for small-n use.
    double value() const { return h_n * std::exp(log_scale); }
};

namespace detail {
inline constexpr double hermite_band = 1.3407807929942597e154;         // 2^512
inline constexpr double hermite_log_band = 354.89135644669199275;     // 512*ln 2
inline constexpr double inv_hermite_band = 1.0 / hermite_band;

inline void renormalize(ScaledHermitePair& p) {
    double m = std::max(std::fabs(p.h_n), std::fabs(p.h_nm1));
    if (m == 0.0) return;
    while (m >= hermite_band) {
        p.h_n *= inv_hermite_band;
        p.h_nm1 *= inv_hermite_band;
        p.log_scale += hermite_log_band;
        m *= inv_hermite_band;
    }
    while (m < 1.0) {
        p.h_n *= hermite_band;
        p.h_nm1 *= hermite_band;
        p.log_scale -= hermite_log_band;
        m *= hermite_band;
    }
}
} // namespace detail

/// Hermite pair by the recurrence H_k = 2x H_{k-1} - 2(k-1) H_{k-2} with
/// periodic rescaling into the mantissa band.
inline ScaledHermitePair hermite_scaled(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite_scaled: n < 0");
    ScaledHermitePair p;
    p.n = n;
    p.x = x;
    if (n == 0) return p;                 // (H_0, "H_{-1}") = (1, 0)
    p.h_n = 2.0 * x;                      // H_1
    p.h_nm1 = 1.0;                        // H_0
    detail::renormalize(p);
    for (int k = 2; k <= n; ++k) {
        double next = 2.0 * x * p.h_n - 2.0 * (k - 1) * p.h_nm1;
        p.h_nm1 = p.h_n;
        p.h_n = next;
        detail::renormalize(p);
    }
    return p;
}

/// Orthonormal Hermite function eta_j(x) = H_j(x) e^{-x^2/2} / sqrt(2^j j! sqrt(pi)),
/// the weight-e^{-x^2} orthonormal family building the GUE kernel.
inline double eta(int j, double x) {
    if (j < 0) throw std::invalid_argument("eta: j < 0");
    ScaledHermitePair p = hermite_scaled(j, x);
    double log_norm = -0.5 * (j * M_LN2 + std::lgamma(j + 1.0) + 0.5 * std::log(pi));
    return p.h_n * std::exp(p.log_scale - 0.5 * x * x + log_norm);
}

/// CUE projection kernel K_n(delta) = (1/2pi) sum_{j<n} e^{ij delta}
///                               = (1/2pi) e^{i(n-1)delta/2} sin(n delta/2)/sin(delta/2),
/// continuous at delta = 0 with value n/(2pi); |K_n| <= n/(2pi).
inline std::complex<double> cue_kernel(int n, double delta) {
    if (n < 1) throw std::invalid_argument("cue_kernel: n < 1");
    double half = 0.5 * delta;
    double s = std::sin(half);
    if (std::fabs(s) < 1e-12) return {n / two_pi, 0.0};
    double mag = std::sin(n * half) / s / two_pi;
    return std::polar(mag, (n - 1.0) * half);
}

/// k-th derivative of the CUE kernel in delta, by exact termwise
/// differentiation: (1/2pi) sum_{j<n} (ij)^k e^{ij delta}. |value| <= n^{k+1}/(2pi).
inline std::complex<double> cue_kernel_derivative(int n, int k, double delta) {
    if (n < 1) throw std::invalid_argument("cue_kernel_derivative: n < 1");
    if (k < 0) throw std::invalid_argument("cue_kernel_derivative: k < 0");
    std::complex<double> sum = 0.0;
    const std::complex<double> i_unit{0.0, 1.0};
    std::complex<double> ik = std::pow(i_unit, k);
    for (int j = 0; j < n; ++j) {
        double jk = std::pow(static_cast<double>(j), k);
        if (j == 0) jk = (k == 0) ? 1.0 : 0.0;
        sum += jk * std::polar(1.0, j * delta);
    }
    return ik * sum / two_pi;
}

namespace detail {
/// Separation below which gue_kernel switches to the L'Hopital branch; the
/// quotient form loses about |x-y|^{-1} digits to cancellation.
inline double gue_switch_threshold(double x) {
    return 1e-4 * std::max(1.0, std::fabs(x));
}

/// L'Hopital (diagonal) branch evaluated at point m:
/// K_n(m,m) = e^{-m^2}/(2^n (n-1)! sqrt(pi)) * (H_n' H_{n-1} - H_{n-1}' H_n)(m)
/// with H_k' = 2k H_{k-1}.
inline double gue_kernel_diagonal(int n, double m) {
    ScaledHermitePair top = hermite_scaled(n, m);       // (H_n, H_{n-1})
    ScaledHermitePair low = hermite_scaled(n - 1, m);   // (H_{n-1}, H_{n-2})
    double log_c = -m * m - (n * M_LN2 + std::lgamma(static_cast<double>(n)) + 0.5 * std::log(pi));
    // H_{n-1}^2 carries scale 2*low.log_scale, H_{n-2} H_n carries low+top.
    double r = std::exp(low.log_scale - top.log_scale);
    double bracket = 2.0 * n * low.h_n * low.h_n * r
                   - 2.0 * (n - 1.0) * low.h_nm1 * top.h_n;
    return bracket * std::exp(log_c + low.log_scale + top.log_scale);
}
/// Closed-form quotient branch, valid away from the diagonal.
inline double gue_kernel_quotient(int n, double x, double y) {
    ScaledHermitePair px = hermite_scaled(n, x);
    ScaledHermitePair py = hermite_scaled(n, y);
    double log_c = -0.5 * (x * x + y * y)
                 - (n * M_LN2 + std::lgamma(static_cast<double>(n)) + 0.5 * std::log(pi));
    double bracket = px.h_n * py.h_nm1 - px.h_nm1 * py.h_n;
    return bracket * std::exp(log_c + px.log_scale + py.log_scale) / (x - y);
}

/// All eta_j(t), j < n, by the normalized three-term recurrence
/// eta_{j+1} = t sqrt(2/(j+1)) eta_j - sqrt(j/(j+1)) eta_{j-1}, carried with
/// a shared log scale so the e^{-t^2/2} start cannot underflow.
inline void eta_sequence(int n, double t, std::vector<double>& out, double& log_scale) {
    out.assign(n, 0.0);
    log_scale = -0.5 * t * t - 0.25 * std::log(pi);
    double prev = 0.0, cur = 1.0;  // eta_0 up to the scale factor
    for (int j = 0; j < n; ++j) {
        out[j] = cur;
        double next = t * std::sqrt(2.0 / (j + 1.0)) * cur - std::sqrt(j / (j + 1.0)) * prev;
        prev = cur;
        cur = next;
        double m = std::max(std::fabs(prev), std::fabs(cur));
        if (m >= hermite_band) {
            double inv = inv_hermite_band;
            prev *= inv;
            cur *= inv;
            log_scale += hermite_log_band;
            for (int i = 0; i <= j; ++i) out[i] *= inv;
        }
    }
}

/// Cancellation-free near-diagonal branch: K_n(x,y) = sum_{j<n} eta_j(x) eta_j(y).
inline double gue_kernel_near_diagonal(int n, double x, double y) {
    std::vector<double> ex, ey;
    double lx = 0.0, ly = 0.0;
    eta_sequence(n, x, ex, lx);
    eta_sequence(n, y, ey, ly);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += ex[j] * ey[j];
    return sum * std::exp(lx + ly);
}

} // namespace detail

/// GUE projection kernel K_n(x,y) (Christoffel-Darboux closed form with the
/// normalization 2^n (n-1)! sqrt(pi) handled in log space). The quotient form
/// loses |x-y|^{-1} digits to cancellation near the diagonal, so below the
/// switch threshold the orthonormal sum takes over; on the diagonal itself
/// the L'Hopital form with H_n' = 2n H_{n-1} is exact.
inline double gue_kernel(int n, double x, double y) {
    if (n < 1) throw std::invalid_argument("gue_kernel: n < 1");
    double diff = x - y;
    if (diff == 0.0) return detail::gue_kernel_diagonal(n, x);
    if (std::fabs(diff) <= detail::gue_switch_threshold(x))
        return detail::gue_kernel_near_diagonal(n, x, y);
    return detail::gue_kernel_quotient(n, x, y);
}

namespace detail {
struct Stencil {
    int len;
    int offset[5];
    double coeff[5];
};

/// Central-difference stencils of second-order accuracy for orders 0..4.
inline const Stencil& central_stencil(int k) {
    static const Stencil table[5] = {
        {1, {0}, {1.0}},
        {2, {-1, 1}, {-0.5, 0.5}},
        {3, {-1, 0, 1}, {1.0, -2.0, 1.0}},
        {4, {-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
        {5, {-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
    };
    if (k < 0 || k > 4) throw std::invalid_argument("central_stencil: order outside 0..4");
    return table[k];
}
} // namespace detail

/// Mixed partial d^kx/dx^kx d^ky/dy^ky K_n(x,y), kx + ky <= 4, by central
/// finite differences with step h = 1e-3 / sqrt(n) (the bulk oscillation
/// wavelength scales like n^{-1/2}).
/// Throws if the stencil mixes the diagonal and quotient branches where the
/// two disagree beyond 1e-6 relative (ill-conditioned configuration).
inline double gue_kernel_partial(int n, int kx, int ky, double x, double y) {
    if (kx < 0 || ky < 0 || kx + ky > 4)
        throw std::invalid_argument("gue_kernel_partial: need kx, ky >= 0 and kx+ky <= 4");
    if (kx == 0 && ky == 0) return gue_kernel(n, x, y);
    double h = 1e-3 / std::sqrt(static_cast<double>(n));
    const auto& sx = detail::central_stencil(kx);
    const auto& sy = detail::central_stencil(ky);

    // Branch-mixing probe: if some stencil points evaluate on each side of the
    // switch threshold, require the two branches to agree at the crossing.
    double th = detail::gue_switch_threshold(x);
    bool some_diag = false, some_quot = false;
    for (int i = 0; i < sx.len; ++i)
        for (int j = 0; j < sy.len; ++j) {
            double d = std::fabs((x + sx.offset[i] * h) - (y + sy.offset[j] * h));
            (d <= th ? some_diag : some_quot) = true;
        }
    if (some_diag && some_quot) {
        double m = 0.5 * (x + y);
        double quot = detail::gue_kernel_quotient(n, m + 0.5 * th, m - 0.5 * th);
        double diag = detail::gue_kernel_near_diagonal(n, m + 0.5 * th, m - 0.5 * th);
        if (std::fabs(quot - diag) > 1e-6 * std::max(1.0, std::fabs(diag)))
            throw std::runtime_error(
                "gue_kernel_partial: stencil spans the diagonal-switch threshold "
                "where the kernel branches disagree (ill-conditioned)");
    }

    double sum = 0.0;
    for (int i = 0; i < sx.len; ++i) {
        double row = 0.0;
        for (int j = 0; j < sy.len; ++j)
            row += sy.coeff[j] * gue_kernel(n, x + sx.offset[i] * h, y + sy.offset[j] * h);
        sum += sx.coeff[i] * row;
    }
    return sum / std::pow(h, kx + ky);
}

/// |sum_{j<n} phi_j(x) phi_j(y)  -  Christoffel-Darboux closed form|.
/// GUE: phi_j = eta_j, closed form b_{n-1} (eta_n(x)eta_{n-1}(y) - eta_n(y)eta_{n-1}(x))/(x-y)
/// with b_{n-1} = sqrt(n/2) for the weight e^{-x^2} (from x H_j = H_{j+1}/2 + j H_{j-1}).
/// CUE: Fourier sum against the closed geometric form; x, y are angles.
inline double christoffel_darboux_gap(int n, double x, double y, Ensemble ensemble) {
    if (n < 1) throw std::invalid_argument("christoffel_darboux_gap: n < 1");
    if (x == y) throw std::invalid_argument("christoffel_darboux_gap: x == y");
    if (ensemble == Ensemble::CUE) {
        std::complex<double> lhs = 0.0;
        for (int j = 0; j < n; ++j) lhs += std::polar(1.0, j * (x - y));
        lhs /= two_pi;
        return std::abs(lhs - cue_kernel(n, x - y));
    }
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) lhs += eta(j, x) * eta(j, y);
    double b = std::sqrt(0.5 * n);
    double rhs = b * (eta(n, x) * eta(n - 1, y) - eta(n, y) * eta(n - 1, x)) / (x - y);
    return std::fabs(lhs - rhs);
}

} // namespace spacinglab
