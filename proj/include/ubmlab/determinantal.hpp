#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ubmlab/common.hpp"
#include "ubmlab/spectral.hpp"

namespace ubmlab {

/// Multi-time kernel of the stationary eigenvalue process, times in the
/// dynamics clock. For a time gap tau and s = tau / n, with c = (n+1)/2 and
/// a = (n-1)/2:
///   i <= j:  (1/2pi) sum_{k=1..n} e^{((k-c)^2 - a^2) s} cos((x-y)(k-c))
///   i >  j: -(1/2pi) sum_{k outside [1,n]} e^{-((k-c)^2 - a^2) s} cos((x-y)(k-c))
/// At equal times the second branch is the Dirichlet kernel minus a delta; it
/// is evaluated off the diagonal only.
class ExtendedKernel {
public:
    ExtendedKernel(int n, std::vector<double> times);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }

    /// Modes (k - c) and weights for the (i, j) block, sign folded into the weights.
    struct Block {
        std::vector<double> modes;
        std::vector<double> weights;
        bool delta_corner = false;  // i > j at equal times
    };
    [[nodiscard]] Block block(std::size_t i, std::size_t j) const;

    [[nodiscard]] Complex evaluate(std::size_t i, double x, std::size_t j, double y) const;
    [[nodiscard]] static double evaluate_block(const Block& b, double u);

private:
    int n_;
    std::vector<double> times_;
};

ExtendedKernel equilibrium_extended_kernel(int n, std::vector<double> times);

enum class HeatKernelMode { ThetaSeries, FourierSeries };

/// T(x, y) = sum_k (-1)^{k(n-1)} p_t(x - y - 2k pi), p_t the Gaussian of variance t,
/// or its Fourier dual (1/2pi) sum_m e^{-m^2 t/2} cos((x-y) m), m in Z - (n+1)/2.
double twisted_heat_kernel(double x, double y, double t, int n, HeatKernelMode mode);

/// A bounded test function on one circle copy. When `arcs` is non-empty, g
/// vanishes off those arcs and the copy is discretized by composite
/// Gauss-Legendre panels on them; otherwise by the periodic trapezoid rule.
struct CircleTest {
    std::function<double(double)> g;
    std::vector<std::pair<double, double>> arcs;
    std::vector<double> breakpoints;

    [[nodiscard]] bool is_zero() const { return !g; }
};

CircleTest zero_test();
CircleTest arc_indicator_test(double lo, double hi, double value);
CircleTest full_circle_test(std::function<double(double)> g);

struct FredholmProblem {
    int n = 1;
    std::vector<double> times;
    std::vector<CircleTest> tests;
    int quadrature_m = 0;  // per copy; trapezoid copies need m >= 8n
    int panel_order = 16;
};

struct FredholmResult {
    double value = 1.0;
    double imag_residue = 0.0;
    int m = 0;
    int size = 0;
};

/// E[prod_j prod_i (1 + g_j(z_i(t_j)))] as det(I + sqrt(w) g K sqrt(w)).
/// Copies at equal times are merged into a single test (1+g_a)(1+g_b) - 1.
FredholmResult fredholm_expectation(const FredholmProblem& problem);
FredholmResult fredholm_expectation_serial(const FredholmProblem& problem);

struct QuadratureNodes {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureNodes circle_test_nodes(const CircleTest& test, int m, int panel_order);

enum class MicroscaleBranch { Forward, Backward };

/// Forward: (1/pi) int_0^{1/2} e^{(z^2 - 1/4) tau} cos(mu z) dz.
/// Backward: (1/pi) int_{1/2}^inf e^{(1/4 - z^2) tau} cos(mu z) dz (tau > 0).
double microscale_limit_kernel(double mu, double tau, MicroscaleBranch branch);

/// Single-time kernel from a deterministic start x (distinct angles), raw
/// heat time t:
///   K(z, y) = sum_i T(x_i, z) E prod_{j != i} sin((y - iB - x_j)/2) / sin((x_i - x_j)/2),
/// B ~ N(0, t). The product is a Laurent polynomial in e^{i(y - iB)/2}, so the
/// expectation is exact: E e^{kB/2} = e^{k^2 t/8}. The sum over i cancels that
/// growth, which costs about (n-1)^2 t/8 nats of precision; beyond 30 the call
/// throws std::domain_error.
Complex out_of_equilibrium_kernel(const std::vector<double>& x, double t, double z, double y);

/// Dynamics-clock time to the raw heat time of the twisted kernel.
inline double raw_heat_time(double dynamics_time, int n) { return 2.0 * dynamics_time / n; }

/// Quintic smoothstep bump: 1 on [0, 1], 0 on [2, inf), C^2.
double chi_bump(double r);

/// |z - E|^gamma chi(|z - E| / theta) + (2 theta)^gamma (1 - chi), theta = lambda / n.
CircleSymbol truncated_singularity_symbol(double e, double gamma, double lambda, int n, int k_max = -1);

/// Test function g = f / (2 theta)^gamma - 1 for the Fredholm engine.
CircleTest truncated_singularity_test(double e, double gamma, double lambda, int n);

struct DecouplingResult {
    double joint = 0.0;
    double first = 0.0;
    double second = 0.0;
    double ratio = 0.0;
};

DecouplingResult decoupling_ratio(double e1, double e2, double t1, double t2, double gamma1, double gamma2,
                                  double lambda, int n, int quadrature_m = 0);

}  // namespace ubmlab
