#include "ubmlab/special_functions.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ubmlab {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr double kZetaPrimeMinusOne = -0.16542114370045092921391966024278064;
constexpr int kProductTerms = 1000;

// sum_{k > K} k^{-s} by Euler-Maclaurin from K.
double zeta_tail(double s, double K) {
    const double a = std::pow(K, 1.0 - s) / (s - 1.0);
    const double b = std::pow(K, -s) / 2.0;
    const double c = s * std::pow(K, -s - 1.0) / 12.0;
    const double d = s * (s + 1.0) * (s + 2.0) * std::pow(K, -s - 3.0) / 720.0;
    return a - b + c - d;
}

// k log(1 + z/k) - z + z^2/(2k)
double product_term(double z, double k) {
    const double u = z / k;
    if (std::abs(u) < 0.05) {
        // z^m / (m k^{m-1}) (-1)^{m+1}, m >= 3
        double sum = 0.0;
        double power = z * u * u;  // z^3 / k^2
        for (int m = 3; m < 40; ++m) {
            const double term = ((m % 2 == 1) ? 1.0 : -1.0) * power / m;
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            power *= u;
        }
        return sum;
    }
    return k * std::log1p(u) - z + z * z / (2.0 * k);
}

// log G(1 + z) for z in (-1, 1] by the Weierstrass product.
double log_barnes_g_product(double z) {
    double sum = 0.0;
    for (int k = kProductTerms; k >= 1; --k) sum += product_term(z, static_cast<double>(k));
    // tail: sum_m (-1)^{m+1} z^m / m * zeta_tail(m - 1)
    double tail = 0.0;
    double power = z * z * z;
    for (int m = 3; m < 30; ++m) {
        const double term = ((m % 2 == 1) ? 1.0 : -1.0) * power / m * zeta_tail(m - 1.0, kProductTerms);
        tail += term;
        if (std::abs(term) < 1e-20) break;
        power *= z;
    }
    return 0.5 * z * std::log(2.0 * std::numbers::pi) - 0.5 * (z + (1.0 + kEulerGamma) * z * z) + sum + tail;
}

}  // namespace

double log_barnes_g_asymptotic(double x) {
    const double z = x - 1.0;
    const double lz = std::log(z);
    const double z2 = z * z;
    double series = 0.0;
    // B_{2k+2} / (4 k (k+1) z^{2k})
    static constexpr double kCoeff[] = {-1.0 / 240.0, 1.0 / 1008.0, -1.0 / 1440.0, 1.0 / 1056.0,
                                        -691.0 / (2730.0 * 120.0)};
    double inv = 1.0 / z2;
    for (double c : kCoeff) {
        series += c * inv;
        inv /= z2;
    }
    return 0.5 * z2 * lz - 0.75 * z2 + 0.5 * z * std::log(2.0 * std::numbers::pi) - lz / 12.0 +
           kZetaPrimeMinusOne + series;
}

double log_barnes_g(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("log_barnes_g: argument must be positive");
    if (x > 200.0) return log_barnes_g_asymptotic(x);
    double acc = 0.0;
    while (x > 2.0) {
        x -= 1.0;
        acc += std::lgamma(x);
    }
    return acc + log_barnes_g_product(x - 1.0);
}

double barnes_g(double x) { return std::exp(log_barnes_g(x)); }

double log_keating_snaith_moment(int n, double gamma) {
    if (n < 1) throw std::invalid_argument("keating_snaith_moment: n must be >= 1");
    if (!(gamma >= 0.0)) throw std::invalid_argument("keating_snaith_moment: gamma must be >= 0");
    double acc = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double jj = j;
        acc += std::lgamma(jj) + std::lgamma(jj + gamma) - 2.0 * std::lgamma(jj + 0.5 * gamma);
    }
    return acc;
}

double keating_snaith_moment(int n, double gamma) { return std::exp(log_keating_snaith_moment(n, gamma)); }

double log_fh_constant(double gamma) { return 2.0 * log_barnes_g(1.0 + 0.5 * gamma) - log_barnes_g(1.0 + gamma); }

double log_sinh(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_sinh: argument must be positive");
    if (x < 1.0) return std::log(std::sinh(x));
    return x + std::log1p(-std::exp(-2.0 * x)) - std::numbers::ln2;
}

namespace {

GaussRule golub_welsch(int order, const std::function<double(int)>& offdiag, double mass) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        J(k, k - 1) = offdiag(k);
        J(k - 1, k) = offdiag(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        rule.weights[i] = mass * v * v;
    }
    return rule;
}

}  // namespace

GaussRule gauss_hermite_normal(int order) {
    if (order < 1) throw std::invalid_argument("gauss_hermite_normal: order must be >= 1");
    return golub_welsch(order, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
}

GaussRule gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    return golub_welsch(
        order,
        [](int k) {
            const double kk = k;
            return kk / std::sqrt(4.0 * kk * kk - 1.0);
        },
        2.0);
}

}  // namespace ubmlab
