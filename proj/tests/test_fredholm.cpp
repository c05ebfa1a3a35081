#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <spacinglab/asymptotics.hpp>
#include <spacinglab/fredholm.hpp>
#include <spacinglab/moments.hpp>
#include <spacinglab/quadrature.hpp>

using namespace spacinglab;

namespace {

// Small-s Taylor series of the gap probability, truncated at s^8.
double gap_series(double s) {
    double p2 = pi * pi, p4 = p2 * p2, p6 = p4 * p2;
    double s2 = s * s, s4 = s2 * s2;
    return 1.0 - s + p2 * s4 / 36.0 - p4 * s4 * s2 / 675.0 + p6 * s4 * s4 / 17640.0;
}

} // namespace

TEST_CASE("sine_kernel") {
    CHECK(sine_kernel(0.3, 0.3) == 1.0);
    CHECK(sine_kernel(1.7, 0.7) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(sine_kernel(0.5, 0.0) == doctest::Approx(2.0 / pi).epsilon(1e-14));
    CHECK(sine_kernel(0.2, 0.9) == doctest::Approx(sine_kernel(0.9, 0.2)).epsilon(1e-15));
    // The Taylor branch joins the quotient branch smoothly.
    double eps = 1e-4 / pi;
    CHECK(sine_kernel(eps * 0.999, 0.0) ==
          doctest::Approx(sine_kernel(eps * 1.001, 0.0)).epsilon(1e-10));
}

TEST_CASE("gap_probability values and convergence") {
    CHECK(gap_probability(1e-6, 20).value == doctest::Approx(1.0).epsilon(1e-6));
    // Frozen series value at s = 0.5; the Nystrom result must land within the
    // s^10 truncation budget.
    CHECK(std::fabs(gap_probability(0.5, 20).value - 0.51509278245362136123) < 2e-4);
    // Spectral convergence: m = 40 vs m = 80 at s = 2 agree to 1e-10.
    CHECK(std::fabs(detail::gap_value(2.0, 40) - detail::gap_value(2.0, 80)) < 1e-10);
    for (double s : {0.5, 2.0, 5.0, 8.0}) {
        int m = std::max(20, static_cast<int>(10.0 * s));
        CHECK(std::fabs(detail::gap_value(s, m) - detail::gap_value(s, 2 * m)) < 1e-10);
    }

    // Bounds and strict monotonic decrease in s.
    double prev = 1.0;
    for (double s : {0.2, 0.6, 1.0, 2.0, 3.0, 5.0}) {
        double v = gap_probability(s, 50).value;
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        CHECK(v < prev);
        prev = v;
    }

    CHECK_THROWS_AS(gap_probability(0.0, 40), std::invalid_argument);
    CHECK_THROWS_AS(gap_probability(1.0, 10), std::invalid_argument);
}

TEST_CASE("gap_probability matches the small-s series") {
    // The discrepancy is the first dropped Taylor term pi^8 s^10/518400
    // (1.1e-4 at s = 0.6), measured once and frozen here.
    double sup = 0.0;
    for (double s = 0.05; s <= 0.6 + 1e-12; s += 0.05)
        sup = std::max(sup, std::fabs(gap_probability(s, 24).value - gap_series(s)));
    CHECK(sup < 2e-4);
    double diff = gap_series(0.6) - gap_probability(0.6, 24).value;
    double next_term = std::pow(pi, 8) * std::pow(0.6, 10) / 518400.0;
    CHECK(diff == doctest::Approx(next_term).epsilon(0.1));
}

TEST_CASE("widom slope of the log gap probability") {
    // d/ds log E2 ~ -pi^2 s/4 in the large-s regime (unit mean spacing),
    // within 10%.
    for (double s : {5.0, 6.5, 8.0}) {
        int m = static_cast<int>(12.0 * s);
        double h = 0.05;
        double slope = (std::log(detail::gap_value(s + h, m)) -
                        std::log(detail::gap_value(s - h, m))) /
                       (2.0 * h);
        CHECK(std::fabs(slope / (-pi * pi * s / 4.0) - 1.0) < 0.1);
    }
}

TEST_CASE("gap_probability_multi") {
    CHECK(gap_probability_multi({Interval::real(0.0, 1.5)}, 30) ==
          doctest::Approx(gap_probability(1.5, 30).value).epsilon(1e-12));
    // Far-separated intervals approximately split into a product; the
    // residual coupling decays with the separation (1.8e-5 measured at d=20).
    double single = gap_probability(1.0, 30).value;
    double split_err_prev = std::numeric_limits<double>::infinity();
    for (double d : {10.0, 20.0, 40.0}) {
        double joint = gap_probability_multi(
            {Interval::real(0.0, 1.0), Interval::real(1.0 + d, 2.0 + d)}, 30);
        double err = std::fabs(joint - single * single);
        CHECK(err < split_err_prev);
        split_err_prev = err;
        if (d == 20.0) CHECK(err < 5e-5);
    }
    // Adjacent intervals are the same operator as their union.
    double adjacent = gap_probability_multi({Interval::real(0.0, 1.0), Interval::real(1.0, 2.0)}, 30);
    CHECK(std::fabs(adjacent - gap_probability(2.0, 30).value) < 1e-8);

    CHECK_THROWS_AS(gap_probability_multi({}, 30), std::invalid_argument);
    CHECK_THROWS_AS(
        gap_probability_multi({Interval::real(0.0, 1.0), Interval::real(0.5, 2.0)}, 30),
        std::invalid_argument);
}

TEST_CASE("p2_density") {
    CHECK(std::fabs(p2_density(0.1) - consecutive_spacing_density_series(0.1)) < 1e-4);
    // Cross-module: the series truncation holds to 5e-3 at s = 0.3.
    CHECK(std::fabs(p2_density(0.3) - consecutive_spacing_density_series(0.3)) < 5e-3);
    // Leading behavior pi^2 s^2 / 3.
    CHECK(p2_density(0.05) == doctest::Approx(pi * pi * 0.0025 / 3.0).epsilon(0.02));
    for (double s : {0.2, 0.7, 1.5, 3.0, 5.0}) CHECK(p2_density(s) > -1e-8);

    // Normalization: int_0^10 p2 = E2'(10) - E2'(0) = 1 up to a negligible tail.
    QuadratureRule rule = composite_gauss_legendre(8, 20, 1e-3, 10.0);
    double total = integrate(rule, [](double s) { return p2_density(s); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));

    CHECK_THROWS_AS(p2_density(0.0), std::invalid_argument);
}

TEST_CASE("dyson_tail_log") {
    // Frozen from the closed form with the stored zeta'(-1).
    CHECK(dyson_tail_log(10.0) == doctest::Approx(-13.340860644163215772).epsilon(1e-14));
    CHECK(dyson_tail_log(6.0) == doctest::Approx(-5.2131542382217181014).epsilon(1e-14));
    // The -s^2/8 term dominates as s grows.
    CHECK(dyson_tail_log(30.0) / (-30.0 * 30.0 / 8.0) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(dyson_tail_log(100.0) / (-100.0 * 100.0 / 8.0) == doctest::Approx(1.0).epsilon(0.002));
    // Against the Nystrom determinant: the expansion is in raw units, so the
    // unit-mean-spacing gap at s compares against dyson_tail_log(pi s).
    CHECK(std::fabs(std::log(detail::gap_value(6.0, 80)) - dyson_tail_log(pi * 6.0)) < 0.05);
    CHECK_THROWS_AS(dyson_tail_log(0.0), std::invalid_argument);
}

TEST_CASE("max_spacing_mu") {
    Interval w = Interval::real(0.0, 10.0);
    // Constant density: closed form for both prefactor conventions.
    double c = 3.0 * zeta_prime_minus_one + std::log(2.0) / 3.0;
    CHECK(max_spacing_mu(w, 4.0) ==
          doctest::Approx(10.0 * std::pow(4.0, 1.75) / 16.0 * std::exp(-2.0 + c))
              .epsilon(1e-13));
    CHECK(max_spacing_mu(w, 4.0, nullptr, MaxSpacingPrefactor::tail) ==
          doctest::Approx(10.0 * std::pow(4.0, 0.75) / 4.0 * std::exp(-2.0 + c))
              .epsilon(1e-13));
    // The closed form equals the quadrature of the integrand at density 1.
    auto unit = [](double) { return 1.0; };
    CHECK(max_spacing_mu(w, 4.0, unit) == doctest::Approx(max_spacing_mu(w, 4.0)).epsilon(1e-12));

    // Gaussian suppression at large gamma.
    CHECK(max_spacing_mu(w, 50.0) < 1e-100);

    // Variable density: positive, finite, decreasing in gamma past the mode.
    auto density = [](double x) { return semicircle_density(64, x) / semicircle_density(64, 0.0); };
    double prev = std::numeric_limits<double>::infinity();
    for (double gamma : {3.0, 4.0, 5.0}) {
        double mu = max_spacing_mu(Interval::real(-1.0, 1.0), gamma, density);
        CHECK(mu > 0.0);
        CHECK(std::isfinite(mu));
        CHECK(mu < prev);
        prev = mu;
    }
    CHECK_THROWS_AS(max_spacing_mu(w, 0.0), std::invalid_argument);
}
