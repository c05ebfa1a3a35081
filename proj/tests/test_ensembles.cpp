#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <spacinglab/ensembles.hpp>
#include <spacinglab/quadrature.hpp>

using namespace spacinglab;

namespace {

Spectrum make_cue(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return Spectrum{Ensemble::CUE, static_cast<int>(values.size()), std::move(values), 0};
}

int count_in_arc(const Spectrum& s, double lo, double len) {
    Interval a = Interval::arc(lo, lo + len);
    int c = 0;
    for (double v : s.values)
        if (a.contains(v)) ++c;
    return c;
}

} // namespace

TEST_CASE("sample_cue_spectrum invariants and first intensity") {
    for (int n : {1, 5, 16}) {
        Spectrum s = sample_cue_spectrum(n, 7777 + n);
        CHECK(s.n == n);
        CHECK(static_cast<int>(s.values.size()) == n);
        for (int i = 0; i < n; ++i) {
            CHECK(s.values[i] >= 0.0);
            CHECK(s.values[i] < two_pi);
            if (i > 0) CHECK(s.values[i] > s.values[i - 1]);
        }
    }

    // n = 1: the single angle is uniform; mean over 1e4 seeds near pi.
    {
        double sum = 0.0;
        int trials = 10000;
        for (int t = 0; t < trials; ++t)
            sum += sample_cue_spectrum(1, split_seed(11, t)).values[0];
        double mean = sum / trials;
        double se = (two_pi / std::sqrt(12.0)) / std::sqrt(static_cast<double>(trials));
        CHECK(std::fabs(mean - pi) < 3.0 * se);
    }

    // n = 16: expected count in an arc of length pi/2 is 16/(4) = 4.
    {
        int trials = 10000;
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            Spectrum s = sample_cue_spectrum(16, split_seed(21, t));
            int c = count_in_arc(s, 1.0, 0.5 * pi);
            sum += c;
            sumsq += static_cast<double>(c) * c;
        }
        double mean = sum / trials;
        double var = sumsq / trials - mean * mean;
        double se = std::sqrt(var / trials);
        CHECK(std::fabs(mean - 4.0) < 3.0 * se);
    }

    // n = 8: the count in an arc of length pi is under-dispersed relative to
    // the Poisson variance 4 (eigenvalue repulsion).
    {
        int trials = 10000;
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            Spectrum s = sample_cue_spectrum(8, split_seed(31, t));
            int c = count_in_arc(s, 0.0, pi);
            sum += c;
            sumsq += static_cast<double>(c) * c;
        }
        double mean = sum / trials;
        double var = sumsq / trials - mean * mean;
        CHECK(var < 3.0);
    }
}

TEST_CASE("sample_gue_spectrum invariants and moments") {
    for (int n : {1, 4, 32}) {
        Spectrum s = sample_gue_spectrum(n, 999 + n);
        CHECK(s.n == n);
        CHECK(static_cast<int>(s.values.size()) == n);
        for (int i = 1; i < n; ++i) CHECK(s.values[i] > s.values[i - 1]);
    }

    // n = 1: density e^{-x^2}/sqrt(pi), variance 1/2.
    {
        int trials = 10000;
        double sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            double x = sample_gue_spectrum(1, split_seed(41, t)).values[0];
            sumsq += x * x;
        }
        double var = sumsq / trials;
        double se = std::sqrt(0.5) / std::sqrt(static_cast<double>(trials));
        CHECK(std::fabs(var - 0.5) < 3.0 * se);
    }

    // n = 2: E[(l1-l2)^2] = 3, frozen from 2D quadrature of the explicit jpdf.
    {
        int trials = 100000;
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            Spectrum s = sample_gue_spectrum(2, split_seed(51, t));
            double gap = s.values[1] - s.values[0];
            sum += gap * gap;
            sumsq += gap * gap * gap * gap;
        }
        double mean = sum / trials;
        double se = std::sqrt((sumsq / trials - mean * mean) / trials);
        CHECK(std::fabs(mean - 3.0) < 3.0 * se);
    }
}

TEST_CASE("gue eigenvalue histogram matches the kernel diagonal") {
    // 1e3 samples of n = 64; empirical bin probabilities on [-10, 10] vs the
    // integrated density K_64(x,x)/64, in L1 distance. This test pins the
    // tridiagonal scaling convention.
    const int n = 64, trials = 1000, bins = 80;
    const double lo = -10.0, hi = 10.0, width = (hi - lo) / bins;
    std::vector<double> counts(bins, 0.0);
    long long total = 0;
    for (int t = 0; t < trials; ++t) {
        Spectrum s = sample_gue_spectrum(n, split_seed(61, t));
        for (double v : s.values) {
            total += 1;
            if (v >= lo && v < hi) counts[static_cast<int>((v - lo) / width)] += 1.0;
        }
    }
    double l1 = 0.0;
    for (int b = 0; b < bins; ++b) {
        double a = lo + b * width;
        double model = integrate(gauss_legendre(4, a, a + width),
                                 [n](double x) { return gue_kernel(n, x, x) / n; });
        l1 += std::fabs(counts[b] / total - model);
    }
    CHECK(l1 < 0.05);
}

TEST_CASE("closest_spacing examples") {
    CHECK(closest_spacing(make_cue({0.10, 0.15, 0.50}), Interval::full_circle()) ==
          doctest::Approx(0.05).epsilon(1e-12));
    // Wraparound: {0.05, 6.25} -> 2pi - 6.25 + 0.05.
    CHECK(closest_spacing(make_cue({0.05, 6.25}), Interval::full_circle()) ==
          doctest::Approx(two_pi - 6.25 + 0.05).epsilon(1e-12));
    // Midpoint 1.1 outside the window: no qualifying pair.
    CHECK(closest_spacing(make_cue({1.0, 1.2}), Interval::arc(3.0, 4.0)) ==
          std::numeric_limits<double>::infinity());
    // Real-line spectrum.
    Spectrum g{Ensemble::GUE, 3, {-1.0, 0.2, 0.3}, 0};
    CHECK(closest_spacing(g, Interval::real(-2.0, 2.0)) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(closest_spacing(g, Interval::real(-2.0, -0.9)) ==
          std::numeric_limits<double>::infinity());
}

TEST_CASE("count_close_pairs examples and monotonicity") {
    // Four mutually close eigenvalues contribute 6 pairs.
    CHECK(count_close_pairs(make_cue({1.0, 1.01, 1.02, 1.03}), Interval::full_circle(), 0.1) == 6);
    CHECK(count_close_pairs(make_cue({0.5, 1.5, 2.5}), Interval::full_circle(), 1e-9) == 0);
    CHECK(count_close_pairs(make_cue({0.0, 0.01, 0.02}), Interval::full_circle(), 0.015) == 2);

    Spectrum s = sample_cue_spectrum(16, 909);
    int prev = -1;
    for (double gamma : {0.01, 0.05, 0.2, 0.8, 3.0}) {
        int c = count_close_pairs(s, Interval::full_circle(), gamma);
        CHECK(c >= prev);
        prev = c;
    }
    prev = -1;
    for (double len : {0.5, 1.5, 3.0, 6.0}) {
        int c = count_close_pairs(s, Interval::arc(1.0, 1.0 + len), 0.5);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("pair-count / closest-spacing equivalence on random spectra") {
    // G_gamma = 0 iff Z > gamma, over 1e3 random spectra and gamma values.
    std::uint64_t state = 5;
    auto next_unit = [&state] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    for (int t = 0; t < 1000; ++t) {
        bool cue = (t % 2 == 0);
        Spectrum s = cue ? sample_cue_spectrum(8, split_seed(71, t))
                         : sample_gue_spectrum(8, split_seed(71, t));
        Interval w = cue ? Interval::arc(0.0, 1.0 + 5.0 * next_unit())
                         : Interval::real(-3.0, -3.0 + 6.0 * next_unit() + 0.01);
        double gamma = 0.01 + 0.5 * next_unit();
        bool no_pairs = count_close_pairs(s, w, gamma) == 0;
        bool z_above = closest_spacing(s, w) > gamma;
        // Z < gamma can hold with G = 0 only on the measure-zero tie Z == gamma.
        CHECK(no_pairs == z_above);
    }
}

TEST_CASE("rotation invariance of the closest spacing") {
    for (int t = 0; t < 50; ++t) {
        Spectrum s = sample_cue_spectrum(12, split_seed(81, t));
        std::vector<double> rotated;
        for (double v : s.values) rotated.push_back(wrap_angle(v + 1.2345));
        Spectrum r = make_cue(rotated);
        CHECK(closest_spacing(s, Interval::full_circle()) ==
              doctest::Approx(closest_spacing(r, Interval::full_circle())).epsilon(1e-12));
    }
}

TEST_CASE("rescale_statistic") {
    // Full circle: the two CUE scalings agree, 2pi/(144 pi^2) = 1/(72 pi).
    double n4 = std::pow(64.0, 4);
    CHECK(std::cbrt(n4 * two_pi / (144.0 * pi * pi)) ==
          doctest::Approx(std::cbrt(n4 / (72.0 * pi))).epsilon(1e-14));
    CHECK(rescale_statistic(0.0, Ensemble::CUE, 64, Interval::full_circle()) == 0.0);
    // Frozen: 1e-3 * (64^4/(72 pi))^{1/3}.
    CHECK(rescale_statistic(1e-3, Ensemble::CUE, 64, Interval::full_circle()) ==
          doctest::Approx(0.04201578759862171909).epsilon(1e-14));

    // GUE: quadrature constant close to its semicircle approximation.
    Interval w = Interval::real(-1.0, 1.0);
    double c = rescale_constant(Ensemble::GUE, 64, w);
    double approx_integral = integrate(gauss_legendre(64, w.lo, w.hi), [](double x) {
        double k = semicircle_density(64, x);
        return k * k * k * k;
    });
    CHECK(c == doctest::Approx(std::cbrt(pi * pi / 9.0 * approx_integral)).epsilon(0.05));
    CHECK_THROWS_AS(rescale_constant(Ensemble::GUE, 4, Interval::real(-5.0, 5.0)),
                    std::invalid_argument);
}

TEST_CASE("tail_experiment basics and determinism") {
    // beta = 0: a qualifying pair always exists for n >= 2 on the full circle.
    // beta = 5: at n = 8 the minimum spacing cannot exceed the mean spacing,
    // so the rescaled statistic never reaches 5.
    TailResult r = tail_experiment(Ensemble::CUE, 8, Interval::full_circle(), {0.0, 5.0}, 1000, 13);
    CHECK(r.tail[0] == 1.0);
    CHECK(r.tail[1] <= 0.001);

    // Bit-identical output for any worker count.
    TailResult w1 = tail_experiment(Ensemble::CUE, 8, Interval::full_circle(), {1.0}, 200, 17, 1);
    TailResult w3 = tail_experiment(Ensemble::CUE, 8, Interval::full_circle(), {1.0}, 200, 17, 3);
    CHECK(w1.rescaled == w3.rescaled);
    CHECK(w1.tail == w3.tail);

    TailResult g1 = tail_experiment(Ensemble::GUE, 16, Interval::real(-2.0, 2.0), {1.0}, 200, 19, 1);
    TailResult g4 = tail_experiment(Ensemble::GUE, 16, Interval::real(-2.0, 2.0), {1.0}, 200, 19, 4);
    CHECK(g1.rescaled == g4.rescaled);

    CHECK_THROWS_AS(
        tail_experiment(Ensemble::CUE, 4, Interval::full_circle(), {1.0}, 50, 1),
        std::invalid_argument);
}

TEST_CASE("cue tail probability approaches exp(-beta^3)") {
    // n = 64, full circle, beta = 1, 2e4 trials: within 0.03 of e^{-1}.
    TailResult r =
        tail_experiment(Ensemble::CUE, 64, Interval::full_circle(), {1.0}, 20000, 2024);
    CHECK(std::fabs(r.tail[0] - std::exp(-1.0)) < 0.03);
}
