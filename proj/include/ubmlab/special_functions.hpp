#pragma once

#include <vector>

namespace ubmlab {

/// log G(x) for the Barnes G-function, x > 0.
double log_barnes_g(double x);

/// G(x) for x > 0.
double barnes_g(double x);

/// log G(x) by the large-argument expansion only. Accurate for x >= 20.
double log_barnes_g_asymptotic(double x);

/// log E|det(U - e^{i theta})|^gamma over Haar U(n), gamma >= 0.
double log_keating_snaith_moment(int n, double gamma);
double keating_snaith_moment(int n, double gamma);

/// log G(1+g/2)^2 / G(1+g).
double log_fh_constant(double gamma);

/// log sinh(x) for x > 0 without overflow.
double log_sinh(double x);

/// Nodes and weights for E[f(Z)], Z ~ N(0, 1) (probabilists' Hermite rule).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussRule gauss_hermite_normal(int order);

/// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int order);

}  // namespace ubmlab
