#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "asymptotics.hpp"
#include "interval.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace spacinglab {

/// Sorted eigenvalue sample: angles in [0, 2pi) for CUE, reals for GUE.
struct Spectrum {
    Ensemble ensemble;
    int n;
    std::vector<double> values;
    std::uint64_t seed;
};

/// Exact CUE eigenvalue sample by sequential determinantal-projection
/// sampling: the eigenvalues are the determinantal process of the projection
/// kernel (1/2pi) sum_{j<n} e^{ij(x-y)}. Points are drawn one at a time from
/// the conditional density obtained by Gram-Schmidt reduction of the Fourier
/// feature map against the already-selected points, with rejection against
/// the constant envelope n/(2pi).
inline Spectrum sample_cue_spectrum(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_cue_spectrum: n < 1");
    Rng rng(seed);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(two_pi);

    // Orthonormal basis (in C^n Fourier coordinates) of the span of the
    // feature vectors of already-selected points.
    std::vector<std::vector<std::complex<double>>> basis;
    basis.reserve(n);
    std::vector<std::complex<double>> phi(n), proj(n);
    Spectrum spec{Ensemble::CUE, n, {}, seed};
    spec.values.reserve(n);

    const long long proposal_budget = 100000LL * n;
    long long proposals = 0;
    while (static_cast<int>(spec.values.size()) < n) {
        double x = rng.uniform(0.0, two_pi);
        if (++proposals > proposal_budget)
            throw std::runtime_error("sample_cue_spectrum: rejection stalled (seed " +
                                     std::to_string(seed) + ")");
        // Feature vector phi_j(x) = e^{ijx}/sqrt(2pi), built incrementally.
        std::complex<double> step = std::polar(1.0, x), cur = 1.0;
        for (int j = 0; j < n; ++j) {
            phi[j] = cur * inv_sqrt_2pi;
            cur *= step;
        }
        // Squared projection onto the span of selected feature directions.
        double s = 0.0;
        std::fill(proj.begin(), proj.end(), std::complex<double>(0.0));
        for (const auto& e : basis) {
            std::complex<double> inner = 0.0;
            for (int j = 0; j < n; ++j) inner += phi[j] * std::conj(e[j]);
            s += std::norm(inner);
            for (int j = 0; j < n; ++j) proj[j] += inner * e[j];
        }
        double accept = (n / two_pi - s) * two_pi / n;
        if (rng.uniform() >= accept) continue;

        // Accept x; extend the basis with the reduced, normalized feature vector.
        double residual_norm = std::sqrt(std::max(0.0, n / two_pi - s));
        if (residual_norm == 0.0) continue;  // numerically degenerate proposal
        std::vector<std::complex<double>> e_new(n);
        for (int j = 0; j < n; ++j) e_new[j] = (phi[j] - proj[j]) / residual_norm;
        basis.push_back(std::move(e_new));
        spec.values.push_back(x);
    }
    std::sort(spec.values.begin(), spec.values.end());
    return spec;
}

namespace detail {

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL
/// iteration (values only). d = diagonal (length n), e = off-diagonal
/// (length n, e[n-1] unused). Overwrites d with the eigenvalues, unsorted.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e) {
    int n = static_cast<int>(d.size());
    if (n == 0) return;
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw std::runtime_error("tridiagonal_ql: no convergence in 50 sweeps");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace detail

/// Exact GUE eigenvalue sample (joint density ~ prod (l_i - l_j)^2 e^{-sum l^2})
/// via the beta = 2 tridiagonal model: diagonal N(0, 1/2), off-diagonal
/// chi_{2(n-i)}/2, eigenvalues by implicit-shift QL. The scaling is pinned by
/// the density validation against K_n(x,x) in the test suite.
inline Spectrum sample_gue_spectrum(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_gue_spectrum: n < 1");
    Rng rng(seed);
    std::vector<double> d(n), e(n, 0.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i) d[i] = inv_sqrt2 * rng.normal();
    for (int i = 0; i < n - 1; ++i) e[i] = 0.5 * rng.chi(2.0 * (n - 1 - i));
    try {
        detail::tridiagonal_ql(d, e);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("sample_gue_spectrum: eigensolver failed (seed " +
                                 std::to_string(seed) + ")");
    }
    std::sort(d.begin(), d.end());
    return Spectrum{Ensemble::GUE, n, std::move(d), seed};
}

namespace detail {
inline double spectrum_distance(const Spectrum& s, double a, double b) {
    return s.ensemble == Ensemble::CUE ? circular_distance(a, b) : std::fabs(a - b);
}
inline double spectrum_midpoint(const Spectrum& s, double a, double b) {
    return s.ensemble == Ensemble::CUE ? circular_midpoint(a, b) : 0.5 * (a + b);
}
} // namespace detail

/// Closest spacing Z: minimum distance over unordered pairs whose midpoint
/// lies in the window (shorter-arc distance and midpoint for CUE). Returns
/// +infinity if no pair qualifies.
inline double closest_spacing(const Spectrum& spec, const Interval& window) {
    if (spec.values.empty()) throw std::invalid_argument("closest_spacing: empty spectrum");
    double best = std::numeric_limits<double>::infinity();
    int n = static_cast<int>(spec.values.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = detail::spectrum_distance(spec, spec.values[i], spec.values[j]);
            if (d < best && window.contains(detail::spectrum_midpoint(spec, spec.values[i], spec.values[j])))
                best = d;
        }
    return best;
}

/// Close-pair count G_gamma: unordered pairs with distance < gamma and
/// midpoint in the window. (Equals the half-weighted ordered-pair sum
/// (1/2) sum_{i != j} of the indicator.)
inline int count_close_pairs(const Spectrum& spec, const Interval& window, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("count_close_pairs: gamma <= 0");
    int n = static_cast<int>(spec.values.size());
    int count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = detail::spectrum_distance(spec, spec.values[i], spec.values[j]);
            if (d < gamma && window.contains(detail::spectrum_midpoint(spec, spec.values[i], spec.values[j])))
                ++count;
        }
    return count;
}

/// Rescaling constant c such that the limiting tail of c * Z is e^{-beta^3}.
/// CUE: c = (n^4 |I| / (144 pi^2))^{1/3} (full circle: (n^4/(72 pi))^{1/3}).
/// GUE: c = ((pi^2/9) int_I K_n(x,x)^4 dx)^{1/3}, making the close-pair mean
/// at threshold gamma equal (c*gamma)^3; 128-node composite quadrature.
inline double rescale_constant(Ensemble ensemble, int n, const Interval& window,
                               double eps = default_bulk_eps) {
    if (n < 1) throw std::invalid_argument("rescale_constant: n < 1");
    if (ensemble == Ensemble::CUE) {
        double n4 = std::pow(static_cast<double>(n), 4);
        return std::cbrt(n4 * window.length() / (144.0 * pi * pi));
    }
    double bulk = (std::sqrt(2.0) - eps) * std::sqrt(static_cast<double>(n));
    if (std::fabs(window.lo) >= bulk || std::fabs(window.hi) >= bulk)
        throw std::invalid_argument("rescale_constant: GUE window outside the bulk");
    QuadratureRule rule = composite_gauss_legendre(8, 16, window.lo, window.hi);
    double integral = integrate(rule, [n](double x) {
        double k = gue_kernel(n, x, x);
        return k * k * k * k;
    });
    return std::cbrt(pi * pi / 9.0 * integral);
}

inline double rescale_statistic(double z, Ensemble ensemble, int n, const Interval& window,
                                double eps = default_bulk_eps) {
    return z * rescale_constant(ensemble, n, window, eps);
}

/// Per-beta empirical tail probabilities of the rescaled closest spacing.
struct TailResult {
    std::vector<double> betas;
    std::vector<double> tail;      // empirical Pr(rescaled Z > beta)
    std::vector<double> se;        // binomial standard error
    std::vector<double> rescaled;  // per-trial rescaled statistic, trial order
};

namespace detail {

/// Run `trials` independent jobs on `workers` threads. Job i writes only
/// slot i of its output, so the result is independent of scheduling.
template <class Job>
inline void run_trials(int trials, int workers, Job&& job) {
    workers = std::max(1, workers);
    if (workers == 1) {
        for (int t = 0; t < trials; ++t) job(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int t = w; t < trials; t += workers) job(t);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

/// Monte Carlo tail experiment for the Main Theorem: per-trial seeds are
/// derived from (seed, trial index), so output is byte-deterministic for any
/// worker count. Sampler failures are rethrown with the trial index attached.
inline TailResult tail_experiment(Ensemble ensemble, int n, const Interval& window,
                                  const std::vector<double>& betas, int trials,
                                  std::uint64_t seed, int workers = 1) {
    if (trials < 100) throw std::invalid_argument("tail_experiment: trials < 100");
    double c = rescale_constant(ensemble, n, window);
    TailResult result;
    result.betas = betas;
    result.rescaled.assign(trials, 0.0);
    std::vector<std::string> failure(trials);
    detail::run_trials(trials, workers, [&](int t) {
        try {
            Spectrum spec = (ensemble == Ensemble::CUE)
                                ? sample_cue_spectrum(n, split_seed(seed, t))
                                : sample_gue_spectrum(n, split_seed(seed, t));
            result.rescaled[t] = c * closest_spacing(spec, window);
        } catch (const std::exception& ex) {
            failure[t] = ex.what();
        }
    });
    for (int t = 0; t < trials; ++t)
        if (!failure[t].empty())
            throw std::runtime_error("tail_experiment: trial " + std::to_string(t) + ": " + failure[t]);

    for (double beta : betas) {
        int hits = 0;
        for (double r : result.rescaled)
            if (r > beta) ++hits;
        double p = static_cast<double>(hits) / trials;
        result.tail.push_back(p);
        result.se.push_back(std::sqrt(p * (1.0 - p) / trials));
    }
    return result;
}

} // namespace spacinglab
