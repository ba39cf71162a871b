#include "irt/errors.hpp"
#include "irt/special.hpp"

#include <doctest.h>

#include <cmath>

using namespace irt;

TEST_SUITE_BEGIN("special");

TEST_CASE("stable sigmoid never overflows and stays symmetric") {
    CHECK(stable_sigmoid(0.0) == 0.5);
    CHECK(stable_sigmoid(800.0) == doctest::Approx(1.0));
    CHECK(stable_sigmoid(-800.0) == doctest::Approx(0.0));
    CHECK(std::isfinite(stable_sigmoid(5000.0)));
    for (double x : {-30.0, -3.5, -0.1, 0.7, 12.0, 700.0}) {
        CHECK(stable_sigmoid(x) + stable_sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("normal cdf matches known quantiles") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-10));
    CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-8));
}

TEST_CASE("chi-square sf agrees with the analytic df=2 and df=4 forms") {
    // df=2: sf(x) = exp(-x/2); df=4: sf(x) = exp(-x/2) (1 + x/2).
    for (double x = 0.25; x < 50.0; x += 0.93) {
        CHECK(chi_square_sf(x, 2) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-12));
        CHECK(chi_square_sf(x, 4) ==
              doctest::Approx(std::exp(-0.5 * x) * (1.0 + 0.5 * x)).epsilon(1e-12));
    }
}

TEST_CASE("chi-square sf hits standard critical values") {
    CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_sf(14.067140449340169, 7) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_sf(0.0, 5) == 1.0);
}

TEST_CASE("chi-square sf rejects bad input") {
    CHECK_THROWS_AS(chi_square_sf(1.0, 0), validation_error);
    CHECK_THROWS_AS(chi_square_sf(std::nan(""), 3), validation_error);
    CHECK_THROWS_AS(gamma_q(-1.0, 2.0), validation_error);
}

TEST_CASE("gauss-legendre integrates high-degree polynomials exactly") {
    const auto& rule = gauss_legendre(20);
    double weight_sum = 0.0;
    for (double w : rule.weights) weight_sum += w;
    CHECK(weight_sum == doctest::Approx(2.0).epsilon(1e-14));

    // x^38 is within the exactness degree 2*20-1 = 39.
    double integral = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        integral += rule.weights[i] * std::pow(rule.nodes[i], 38);
    }
    CHECK(integral == doctest::Approx(2.0 / 39.0).epsilon(1e-12));
}

TEST_CASE("adaptive integration reaches the requested tolerance") {
    const double pi = integrate([](double x) { return 4.0 / (1.0 + x * x); }, 0.0, 1.0, 1e-11);
    CHECK(pi == doctest::Approx(M_PI).epsilon(1e-10));

    const double mass = integrate([](double x) { return normal_pdf(x); }, -9.0, 9.0, 1e-11);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 1.0, 0.0, 1e-8), validation_error);
}

TEST_SUITE_END();
