#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ubmlab/common.hpp"
#include "ubmlab/seed_tree.hpp"
#include "ubmlab/unitary_dynamics.hpp"

namespace ubmlab {

/// Product cells on [t_lo, t_hi] x [theta_lo, theta_hi]. The field is sampled
/// at `sub` x `sub` midpoints inside each cell.
struct CylinderGrid {
    double t_lo = 0.0;
    double t_hi = 1.0;
    int nt = 1;
    double theta_lo = 0.0;
    double theta_hi = kTwoPi;
    int ntheta = 1;
    int sub = 1;

    void validate() const;
    [[nodiscard]] std::vector<double> sample_times() const;
    [[nodiscard]] std::vector<double> sample_angles() const;
    [[nodiscard]] double cell_area() const { return (t_hi - t_lo) / nt * (theta_hi - theta_lo) / ntheta; }
    [[nodiscard]] double area() const { return (t_hi - t_lo) * (theta_hi - theta_lo); }
};

enum class FieldKind { MatrixBorn, GaussianReference };

const char* to_string(FieldKind kind) noexcept;

struct CylinderField {
    FieldKind kind = FieldKind::GaussianReference;
    int k_max = 0;  // mode truncation (gaussian) or 0
    int n = 0;      // matrix size (matrix-born) or 0
    double epsilon = 0.0;
    CylinderGrid grid;
    std::vector<double> times;
    std::vector<double> angles;
    std::vector<double> values;  // times x angles, row-major

    [[nodiscard]] double at(std::size_t ti, std::size_t ai) const { return values[ti * angles.size() + ai]; }
};

/// h(t, x) = sum_{k<=k_max} e^{-k eps} (A_k(t) cos kx + B_k(t) sin kx), with A_k, B_k
/// independent stationary OU processes of variance 1/(2k) and rate k.
CylinderField sample_gaussian_field(int k_max, const CylinderGrid& grid, const SeedTree& seed, double epsilon = 0.0);

/// h^eps(t, x) = sum_k log|1 - e^{-eps} e^{i(theta_k(t) - x)}| from a path
/// recorded at grid.sample_times().
CylinderField matrix_born_field(const PhaseTrajectory& traj, const CylinderGrid& grid, double epsilon = 0.0);

/// Stationary beta=2 path at the grid's sample times, then matrix_born_field.
CylinderField sample_matrix_born_field(int n, const CylinderGrid& grid, const SeedTree& seed, double epsilon = 0.0);

/// 1/2 log(max(|e^z|, |e^w|) / |e^z - e^w|), z = t + i theta.
double cylinder_covariance(Complex z, Complex w);
/// Same quantity as P_{|t-s|} C(x - y) by the closed-form Poisson sum.
double cylinder_covariance_poisson(Complex z, Complex w);
/// Truncated series 1/2 sum_{k<=terms} e^{-k|t-s|} cos(k(x-y)) / k.
double cylinder_covariance_series(Complex z, Complex w, int terms);

/// Variance of the mollified gaussian reference field: 1/2 sum_{k<=k_max} e^{-2k eps}/k.
double gaussian_field_variance(int k_max, double epsilon);

/// log E e^{gamma h^eps(t, x)} for the matrix-born field: Keating-Snaith at eps = 0,
/// otherwise the Toeplitz determinant of |1 - e^{-eps} e^{i phi}|^gamma.
double log_matrix_normalizer(int n, double gamma, double epsilon);

struct ChaosCell {
    double t_lo, t_hi, theta_lo, theta_hi, mass;
};

struct ChaosMeasure {
    double gamma = 0.0;
    std::string normalization;
    std::string tag;  // "no-quantitative-acceptance" in the L1 phase
    std::vector<ChaosCell> cells;

    [[nodiscard]] double total_mass() const;
};

inline constexpr double kGmcGammaLimit = 2.8284271247461903;  // 2 sqrt 2

struct GmcOptions {
    std::optional<double> log_normalizer;  // skip recomputation across samples
};

ChaosMeasure gmc_measure(const CylinderField& field, double gamma, const GmcOptions& options = {});

struct Patch {
    double t_lo, t_hi, theta_lo, theta_hi;
    [[nodiscard]] double area() const { return (t_hi - t_lo) * (theta_hi - theta_lo); }
};

/// e^{gamma^2 P_{|t-s| + 2 eps} C(x - y)}.
double gmc_two_point_kernel(Complex z, Complex w, double gamma, double epsilon);

/// int_A int_B e^{gamma^2 P_{|t-s|+2eps} C(x-y)} dz dw, reduced to a 2-D integral
/// over the differences.
double gmc_cross_moment_prediction(const Patch& a, const Patch& b, double gamma, double epsilon);

/// Second moment of mu(1_patch).
double gmc_second_moment_prediction(const Patch& patch, double gamma, double epsilon);

/// max over the grid of h / log n (positive maximum).
double max_field_statistic(const CylinderField& field);

void write_measure_csv(const ChaosMeasure& measure, std::ostream& out);

}  // namespace ubmlab
