#include <doctest.h>

#include <cmath>

#include "ubmlab/special_functions.hpp"

using namespace ubmlab;

namespace {

double log_factorial(int k) { return std::lgamma(k + 1.0); }

// log E|det(U - 1)|^gamma = sum_j [lgamma(j) + lgamma(j + gamma) - 2 lgamma(j + gamma/2)]
double ks_product(int n, double g) {
    double acc = 0.0;
    for (int j = 1; j <= n; ++j) acc += std::lgamma(j) + std::lgamma(j + g) - 2.0 * std::lgamma(j + 0.5 * g);
    return acc;
}

constexpr double kGlaisher = 1.2824271291006226369;

}  // namespace

TEST_CASE("Barnes G at the integers is a superfactorial") {
    CHECK(log_barnes_g(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_barnes_g(2.0) == doctest::Approx(0.0).epsilon(1e-14));
    for (int n = 3; n <= 40; ++n) {
        double expect = 0.0;
        for (int k = 0; k <= n - 2; ++k) expect += log_factorial(k);
        CHECK(std::abs(log_barnes_g(n) - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("Barnes G at one half") {
    const double expect = std::log(2.0) / 24.0 + 0.125 - 0.25 * std::log(M_PI) - 1.5 * std::log(kGlaisher);
    CHECK(std::abs(log_barnes_g(0.5) - expect) < 1e-13);
    CHECK(std::abs(log_barnes_g(1.5) - expect - std::lgamma(0.5)) < 1e-13);
    CHECK(std::abs(barnes_g(0.5) - 0.6032442812094465) < 1e-13);
}

TEST_CASE("Barnes G functional equation") {
    for (double x : {0.05, 0.3, 0.77, 1.0, 1.9, 3.14159, 7.5, 19.2, 55.5, 150.25, 199.9, 250.0, 1000.3}) {
        const double lhs = log_barnes_g(x + 1.0);
        const double rhs = std::lgamma(x) + log_barnes_g(x);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("large-argument expansion agrees with the product route") {
    for (double x : {20.0, 33.3, 80.0, 150.0, 199.0}) {
        const double a = log_barnes_g_asymptotic(x);
        const double b = log_barnes_g(x);
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }
}

TEST_CASE("Keating-Snaith moments") {
    SUBCASE("n = 1 is a beta integral") {
        for (double g : {0.3, 1.0, 2.5}) {
            const double expect = std::lgamma(1 + g) - 2 * std::lgamma(1 + 0.5 * g);
            CHECK(std::abs(log_keating_snaith_moment(1, g) - expect) < 1e-13);
        }
    }
    SUBCASE("gamma = 2 and 4 are polynomials in n") {
        for (int n = 1; n <= 60; ++n) {
            CHECK(keating_snaith_moment(n, 2.0) == doctest::Approx(n + 1.0).epsilon(1e-12));
            const double m4 = (n + 1.0) * (n + 2.0) * (n + 2.0) * (n + 3.0) / 12.0;
            CHECK(keating_snaith_moment(n, 4.0) == doctest::Approx(m4).epsilon(1e-11));
        }
    }
    SUBCASE("gamma = 0 is one") { CHECK(keating_snaith_moment(37, 0.0) == doctest::Approx(1.0).epsilon(1e-14)); }
    SUBCASE("matches the gamma-function product") {
        for (int n : {5, 16, 64, 128, 300}) {
            for (double g : {0.5, 1.0, 1.7, 2.0, 2.8}) {
                const double a = log_keating_snaith_moment(n, g);
                const double b = ks_product(n, g);
                CHECK(std::abs(a - b) <= 1e-11 * std::max(1.0, std::abs(b)));
            }
        }
    }
}

TEST_CASE("log_fh_constant") {
    CHECK(std::abs(log_fh_constant(2.0) - 0.0) < 1e-14);  // G(2)^2 / G(3) = 1
    const double g1 = 2 * log_barnes_g(1.5) - log_barnes_g(2.0);
    CHECK(std::abs(log_fh_constant(1.0) - g1) < 1e-14);
}

TEST_CASE("log_sinh") {
    for (double x : {1e-8, 0.01, 1.0, 5.0, 30.0}) CHECK(std::abs(log_sinh(x) - std::log(std::sinh(x))) < 1e-13 * std::max(1.0, std::abs(std::log(std::sinh(x)))));
    CHECK(std::abs(log_sinh(1000.0) - (1000.0 - std::log(2.0))) < 1e-12);
}

TEST_CASE("Gauss-Hermite rule integrates normal moments") {
    const GaussRule r = gauss_hermite_normal(20);
    double w = 0, m2 = 0, m4 = 0, m6 = 0, m3 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double x = r.nodes[i];
        w += r.weights[i];
        m2 += r.weights[i] * x * x;
        m3 += r.weights[i] * x * x * x;
        m4 += r.weights[i] * std::pow(x, 4);
        m6 += r.weights[i] * std::pow(x, 6);
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(m3) < 1e-13);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
    // E cos(Z) = e^{-1/2}
    double c = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) c += r.weights[i] * std::cos(r.nodes[i]);
    CHECK(std::abs(c - std::exp(-0.5)) < 1e-12);
}

TEST_CASE("Gauss-Legendre rule is exact to degree 2n - 1") {
    const GaussRule r = gauss_legendre(8);
    for (int d = 0; d <= 15; ++d) {
        double acc = 0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * std::pow(r.nodes[i], d);
        const double expect = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
        CHECK(std::abs(acc - expect) < 1e-14);
    }
}
