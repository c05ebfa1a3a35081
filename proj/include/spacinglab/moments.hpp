#pragma once
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ensembles.hpp"
#include "interval.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"

namespace spacinglab {

/// Truncated consecutive-spacing density in mean-spacing units:
/// p(s) = pi^2 s^2/3 - 2 pi^4 s^4/45 + pi^6 s^6/315. Truncation error O(s^8);
/// intended for s <= 0.5.
inline double consecutive_spacing_density_series(double s) {
    if (s < 0.0) throw std::invalid_argument("consecutive_spacing_density_series: s < 0");
    double s2 = s * s;
    double p2 = pi * pi;
    return s2 * (p2 / 3.0 + s2 * (-2.0 * p2 * p2 / 45.0 + s2 * p2 * p2 * p2 / 315.0));
}

/// Heuristic close-pair mean. CUE: |I| gamma^3 n^4 / (144 pi^2).
/// GUE: (pi^2 gamma^3 / 9) int_I K_n(x,x)^4 dx (128-node composite rule).
/// Valid for gamma * n small; callers should track gamma^2 n^2.
inline double heuristic_mu(Ensemble ensemble, int n, const Interval& window, double gamma,
                           double eps = default_bulk_eps) {
    if (n < 1) throw std::invalid_argument("heuristic_mu: n < 1");
    if (gamma < 0.0) throw std::invalid_argument("heuristic_mu: gamma < 0");
    double g3 = gamma * gamma * gamma;
    if (ensemble == Ensemble::CUE) {
        double n4 = std::pow(static_cast<double>(n), 4);
        return window.length() * g3 * n4 / (144.0 * pi * pi);
    }
    double bulk = (std::sqrt(2.0) - eps) * std::sqrt(static_cast<double>(n));
    if (std::fabs(window.lo) >= bulk || std::fabs(window.hi) >= bulk)
        throw std::invalid_argument("heuristic_mu: GUE window outside the bulk");
    QuadratureRule rule = composite_gauss_legendre(8, 16, window.lo, window.hi);
    double integral = integrate(rule, [n](double x) {
        double k = gue_kernel(n, x, x);
        return k * k * k * k;
    });
    return pi * pi / 9.0 * g3 * integral;
}

namespace detail {

/// Close-pair first moment in midpoint/difference coordinates:
/// E(G) = int_I dx int_{-gamma/2}^{gamma/2} dy
///        [ K(x+y,x+y) K(x-y,x-y) - K(x+y,x-y)^2 ].
/// CUE reduces by translation invariance to |I| * the 1D y-integral.
inline double gaudin_at_resolution(const KernelSpec& spec, const Interval& window,
                                   double gamma, int refine) {
    int n = spec.n;
    double half = 0.5 * gamma;
    if (spec.ensemble == Ensemble::CUE) {
        // Panels resolve the e^{in theta} oscillation: width <= (2pi/n)/4.
        QuadratureRule yrule =
            composite_for_wavelength(8 * refine, 0.25 * two_pi / n, -half, half);
        double k0 = n / two_pi;
        double inner = integrate(yrule, [n, k0](double y) {
            return k0 * k0 - std::norm(cue_kernel(n, 2.0 * y));
        });
        return window.length() * inner;
    }
    // GUE: 2D composite rule; panel width tied to the bulk wavelength 2pi/sqrt(2n).
    double wavelength = two_pi / std::sqrt(2.0 * n);
    QuadratureRule xrule =
        composite_for_wavelength(8 * refine, 0.25 * wavelength, window.lo, window.hi);
    QuadratureRule yrule = composite_gauss_legendre(8 * refine, 4, -half, half);
    double sum = 0.0;
    for (std::size_t i = 0; i < xrule.nodes.size(); ++i) {
        double x = xrule.nodes[i];
        double inner = integrate(yrule, [&](double y) {
            double kd = gue_kernel(n, x + y, x + y) * gue_kernel(n, x - y, x - y);
            double ko = gue_kernel(n, x + y, x - y);
            return kd - ko * ko;
        });
        sum += xrule.weights[i] * inner;
    }
    return sum;
}

} // namespace detail

/// First moment E(G) by Gaudin's determinantal integral, with an internal
/// 2x-refinement check (throws if the two resolutions differ by more than
/// 1e-6 relative).
inline double gaudin_first_moment(const KernelSpec& spec, const Interval& window, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("gaudin_first_moment: gamma < 0");
    if (gamma == 0.0) return 0.0;
    double coarse = detail::gaudin_at_resolution(spec, window, gamma, 1);
    double fine = detail::gaudin_at_resolution(spec, window, gamma, 2);
    double scale = std::max(std::fabs(fine), 1e-300);
    if (std::fabs(fine - coarse) > 1e-6 * scale)
        throw std::runtime_error("gaudin_first_moment: quadrature resolution too coarse");
    return fine;
}

/// First moment by the narrow-strip local expansion
/// E(G) ~ int_I (gamma^3/12) (K Kff - K Kbb - Kf^2) dx, with
/// Kf = (d_x + d_y)K, Kff = (d_x + d_y)^2 K, Kbb = (d_x - d_y)^2 K on the
/// diagonal; the combination reduces to 4 K Kxy - (Kx + Ky)^2.
/// CUE is evaluated exactly: the combination is the constant
/// 4 (|K'(0)|^2 + K(0) |K''(0)|) giving |I| gamma^3 n^2 (n^2-1)/(144 pi^2).
inline double first_moment_local_expansion(const KernelSpec& spec, const Interval& window,
                                           double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("first_moment_local_expansion: gamma < 0");
    if (gamma == 0.0) return 0.0;
    int n = spec.n;
    double g3 = gamma * gamma * gamma;
    if (spec.ensemble == Ensemble::CUE) {
        // K'(0) = i n(n-1)/(4pi), K''(0) = -n(n-1)(2n-1)/(12pi), K(0) = n/(2pi):
        // |K'|^2 subtracts, K K'' enters with its sign flipped by the determinant.
        double nn = static_cast<double>(n);
        double combo = nn * nn * (nn * nn - 1.0) / (48.0 * pi * pi);
        return window.length() * g3 / 3.0 * combo;
    }
    double wavelength = two_pi / std::sqrt(2.0 * n);
    QuadratureRule rule = composite_for_wavelength(8, 0.25 * wavelength, window.lo, window.hi);
    double integral = integrate(rule, [n](double x) {
        double k = gue_kernel(n, x, x);
        double kx = gue_kernel_partial(n, 1, 0, x, x);
        double ky = gue_kernel_partial(n, 0, 1, x, x);
        double kxy = gue_kernel_partial(n, 1, 1, x, x);
        double kf = kx + ky;
        return 4.0 * k * kxy - kf * kf;
    });
    return g3 / 12.0 * integral;
}

namespace detail {

/// CUE Vandermonde weight prod |e^{i t_j} - e^{i t_k}|^2 and the GUE weight
/// prod (t_j - t_k)^2 e^{-sum t^2}.
inline double jpdf_weight(Ensemble ensemble, const std::vector<double>& t) {
    double w = 1.0;
    int n = static_cast<int>(t.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (ensemble == Ensemble::CUE) {
                double d = 2.0 - 2.0 * std::cos(t[i] - t[j]);
                w *= d;
            } else {
                double d = t[i] - t[j];
                w *= d * d;
            }
        }
    if (ensemble == Ensemble::GUE) {
        double s = 0.0;
        for (double v : t) s += v * v;
        w *= std::exp(-s);
    }
    return w;
}

inline QuadratureRule jpdf_domain_rule(Ensemble ensemble, double truncation, int points) {
    return ensemble == Ensemble::CUE
               ? composite_gauss_legendre(8, std::max(1, points / 8), 0.0, two_pi)
               : composite_gauss_legendre(8, std::max(1, points / 8), -truncation, truncation);
}

/// Normalization Z = int jpdf over the n-cube, computed numerically.
inline double jpdf_normalization(Ensemble ensemble, int n, const QuadratureRule& rule) {
    std::vector<double> t(n);
    std::function<double(int)> rec = [&](int depth) -> double {
        if (depth == n) return jpdf_weight(ensemble, t);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            t[depth] = rule.nodes[i];
            sum += rule.weights[i] * rec(depth + 1);
        }
        return sum;
    };
    return rec(0);
}

} // namespace detail

/// Oracle: E[sum_{i != j} g(t_i, t_j)] = n(n-1) E[g(t_1, t_2)] by direct
/// n-dimensional quadrature of the raw j.p.d.f. with self-computed
/// normalization. n in {2, 3}; GUE domain truncated to [-truncation, truncation].
inline double brute_force_expectation(Ensemble ensemble, int n,
                                      const std::function<double(double, double)>& g,
                                      double truncation = 6.0, int points = 48) {
    if (n != 2 && n != 3) throw std::invalid_argument("brute_force_expectation: n must be 2 or 3");
    QuadratureRule rule = detail::jpdf_domain_rule(ensemble, truncation, points);
    double z = detail::jpdf_normalization(ensemble, n, rule);
    std::vector<double> t(n);
    std::function<double(int)> rec = [&](int depth) -> double {
        if (depth == n) return detail::jpdf_weight(ensemble, t) * g(t[0], t[1]);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            t[depth] = rule.nodes[i];
            sum += rule.weights[i] * rec(depth + 1);
        }
        return sum;
    };
    return n * (n - 1.0) * rec(0) / z;
}

/// Oracle: E(G) for the close-pair indicator, parametrizing the pair region
/// exactly in midpoint/difference coordinates so the integrand stays smooth:
/// E(G) = n(n-1)/Z int_{x in I} int_{|y| < gamma/2} [int dt_3] w(x+y, x-y, t_3).
inline double brute_force_close_pairs(Ensemble ensemble, int n, const Interval& window,
                                      double gamma, double truncation = 6.0, int points = 48) {
    if (n != 2 && n != 3) throw std::invalid_argument("brute_force_close_pairs: n must be 2 or 3");
    if (!(gamma > 0.0)) throw std::invalid_argument("brute_force_close_pairs: gamma <= 0");
    QuadratureRule rule = detail::jpdf_domain_rule(ensemble, truncation, points);
    double z = detail::jpdf_normalization(ensemble, n, rule);
    double lo = (ensemble == Ensemble::CUE) ? 0.0 : window.lo;
    double hi = (ensemble == Ensemble::CUE) ? two_pi : window.hi;
    QuadratureRule xrule = composite_gauss_legendre(8, 16, lo, hi);
    QuadratureRule yrule = composite_gauss_legendre(8, 8, -0.5 * gamma, 0.5 * gamma);
    std::vector<double> t(n);
    double sum = 0.0;
    for (std::size_t ix = 0; ix < xrule.nodes.size(); ++ix) {
        double x = xrule.nodes[ix];
        if (ensemble == Ensemble::CUE && !window.contains(x)) continue;
        double inner = 0.0;
        for (std::size_t iy = 0; iy < yrule.nodes.size(); ++iy) {
            double y = yrule.nodes[iy];
            t[0] = x + y;
            t[1] = x - y;
            double v;
            if (n == 2) {
                v = detail::jpdf_weight(ensemble, t);
            } else {
                v = 0.0;
                for (std::size_t i3 = 0; i3 < rule.nodes.size(); ++i3) {
                    t[2] = rule.nodes[i3];
                    v += rule.weights[i3] * detail::jpdf_weight(ensemble, t);
                }
            }
            inner += yrule.weights[iy] * v;
        }
        sum += xrule.weights[ix] * inner;
    }
    return n * (n - 1.0) * sum / z;
}

/// Stirling partition numbers a_{i,k} = S(i,k) (a_{i,k} = k a_{i-1,k} + a_{i-1,k-1}):
/// the coefficients of the Poisson moment polynomial E(X^i) = sum_k a_{i,k} mu^k.
inline std::vector<long long> poisson_moment_coeffs(int i) {
    if (i < 1) throw std::invalid_argument("poisson_moment_coeffs: i < 1");
    std::vector<long long> prev{1};  // a_{1,1}
    for (int row = 2; row <= i; ++row) {
        std::vector<long long> cur(row, 0);
        for (int k = 1; k <= row; ++k) {
            long long a = 0, b = 0, term = 0;
            if (k <= row - 1) {
                if (__builtin_mul_overflow(static_cast<long long>(k), prev[k - 1], &a))
                    throw std::overflow_error("poisson_moment_coeffs: 64-bit overflow");
            }
            if (k >= 2) b = prev[k - 2];
            if (k == 1) b = 0;
            if (__builtin_add_overflow(a, b, &term))
                throw std::overflow_error("poisson_moment_coeffs: 64-bit overflow");
            cur[k - 1] = term;
        }
        prev = std::move(cur);
    }
    return prev;
}

/// Inverse coefficients b^{j,i} with mu^j = sum_i b^{j,i} E(X^i):
/// b^{j,i} = b^{j-1,i-1} - (j-1) b^{j-1,i}; biorthogonal to a_{i,k}.
inline std::vector<long long> poisson_inverse_coeffs(int j) {
    if (j < 1) throw std::invalid_argument("poisson_inverse_coeffs: j < 1");
    std::vector<long long> prev{1};  // b^{1,1}
    for (int row = 2; row <= j; ++row) {
        std::vector<long long> cur(row, 0);
        for (int i = 1; i <= row; ++i) {
            long long shifted = (i >= 2) ? prev[i - 2] : 0;
            long long scaled = 0;
            if (i <= row - 1) {
                if (__builtin_mul_overflow(static_cast<long long>(row - 1), prev[i - 1], &scaled))
                    throw std::overflow_error("poisson_inverse_coeffs: 64-bit overflow");
            }
            long long term = 0;
            if (__builtin_sub_overflow(shifted, scaled, &term))
                throw std::overflow_error("poisson_inverse_coeffs: 64-bit overflow");
            cur[i - 1] = term;
        }
        prev = std::move(cur);
    }
    return prev;
}

/// Poisson moment E(X^k) = sum_j a_{k,j} mu^j.
inline double poisson_moment(int k, double mu) {
    std::vector<long long> a = poisson_moment_coeffs(k);
    double sum = 0.0, mu_pow = 1.0;
    for (int j = 1; j <= k; ++j) {
        mu_pow *= mu;
        sum += static_cast<double>(a[j - 1]) * mu_pow;
    }
    return sum;
}

/// Summary of the collapse enumeration for the 2k pair indices
/// {i_1, j_1, ..., i_k, j_k}: set partitions with no class containing both
/// i_m and j_m; classes linked by sharing a pair index m form clusters; a
/// collapse is clean when every cluster has exactly two classes.
struct CollapseSummary {
    long long total = 0;
    long long clean = 0;
    long long mixed = 0;
    std::map<int, long long> clean_by_cluster;  // cluster count l -> #clean
};

namespace detail {
inline int find_root(std::vector<int>& parent, int v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}
} // namespace detail

/// Exhaustive collapse enumeration via restricted-growth strings over the 2k
/// symbols (symbol 2m is i_{m+1}, symbol 2m+1 is j_{m+1}).
inline CollapseSummary enumerate_collapses(int k) {
    if (k < 1 || k > 5) throw std::invalid_argument("enumerate_collapses: need 1 <= k <= 5");
    int m = 2 * k;
    std::vector<int> label(m, 0);
    CollapseSummary summary;
    std::function<void(int, int)> rec = [&](int pos, int used) {
        if (pos == m) {
            // Filter: i_t and j_t may not share a class.
            for (int t = 0; t < k; ++t)
                if (label[2 * t] == label[2 * t + 1]) return;
            ++summary.total;
            // Cluster the classes: union the classes of i_t and j_t.
            std::vector<int> parent(used);
            std::iota(parent.begin(), parent.end(), 0);
            for (int t = 0; t < k; ++t) {
                int a = detail::find_root(parent, label[2 * t]);
                int b = detail::find_root(parent, label[2 * t + 1]);
                if (a != b) parent[a] = b;
            }
            std::vector<int> size(used, 0);
            for (int c = 0; c < used; ++c) ++size[detail::find_root(parent, c)];
            int clusters = 0;
            bool clean = true;
            for (int c = 0; c < used; ++c)
                if (size[c] > 0) {
                    ++clusters;
                    if (size[c] != 2) clean = false;
                }
            if (clean) {
                ++summary.clean;
                ++summary.clean_by_cluster[clusters];
            } else {
                ++summary.mixed;
            }
            return;
        }
        for (int c = 0; c <= used; ++c) {
            label[pos] = c;
            rec(pos + 1, std::max(used, c + 1));
        }
    };
    rec(0, 0);
    return summary;
}

/// Clean-collapse count with l clusters: S(k,l) * 2^{k-l} (Stirling number
/// from the moment-coefficient table).
inline long long clean_collapse_count_formula(int k, int l) {
    if (l < 1 || l > k) throw std::invalid_argument("clean_collapse_count_formula: need 1 <= l <= k");
    std::vector<long long> a = poisson_moment_coeffs(k);
    return a[l - 1] << (k - l);
}

/// Empirical vs Poisson moments of the close-pair count.
struct MomentReport {
    int k_max = 0;
    double mu = 0.0;                   // heuristic mean
    std::vector<double> empirical;     // E(G^k), k = 1..k_max
    std::vector<double> se;            // jackknife standard errors
    std::vector<double> poisson;       // sum_j a_{k,j} mu^j
    double quadrature_first_moment = 0.0;
};

/// Monte Carlo moments of G against the Poisson prediction. Deterministic for
/// fixed seed under any worker count (ensembles trial contract).
inline MomentReport moment_report(Ensemble ensemble, int n, const Interval& window, double gamma,
                                  int k_max, int trials, std::uint64_t seed, int workers = 1) {
    if (trials < 1000) throw std::invalid_argument("moment_report: trials < 1000");
    if (k_max < 1 || k_max > 4) throw std::invalid_argument("moment_report: need 1 <= k_max <= 4");
    std::vector<int> counts(trials, 0);
    std::vector<std::string> failure(trials);
    detail::run_trials(trials, workers, [&](int t) {
        try {
            Spectrum spec = (ensemble == Ensemble::CUE)
                                ? sample_cue_spectrum(n, split_seed(seed, t))
                                : sample_gue_spectrum(n, split_seed(seed, t));
            counts[t] = count_close_pairs(spec, window, gamma);
        } catch (const std::exception& ex) {
            failure[t] = ex.what();
        }
    });
    for (int t = 0; t < trials; ++t)
        if (!failure[t].empty())
            throw std::runtime_error("moment_report: trial " + std::to_string(t) + ": " + failure[t]);

    MomentReport report;
    report.k_max = k_max;
    report.mu = heuristic_mu(ensemble, n, window, gamma);
    report.quadrature_first_moment =
        gaudin_first_moment(KernelSpec{ensemble, n}, window, gamma);
    for (int k = 1; k <= k_max; ++k) {
        double mean = 0.0;
        for (int c : counts) mean += std::pow(static_cast<double>(c), k);
        mean /= trials;
        // Jackknife over trials; for a sample mean this reduces to the usual
        // standard error of the mean.
        double var = 0.0;
        for (int c : counts) {
            double d = std::pow(static_cast<double>(c), k) - mean;
            var += d * d;
        }
        var /= static_cast<double>(trials) * (trials - 1.0);
        report.empirical.push_back(mean);
        report.se.push_back(std::sqrt(var));
        report.poisson.push_back(poisson_moment(k, report.mu));
    }
    return report;
}

} // namespace spacinglab
