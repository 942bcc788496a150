#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ubmlab/common.hpp"
#include "ubmlab/seed_tree.hpp"

namespace ubmlab {

struct UnitaryMatrix {
    ComplexMatrix entries;

    UnitaryMatrix() = default;
    explicit UnitaryMatrix(ComplexMatrix m) : entries(std::move(m)) {}

    [[nodiscard]] int n() const noexcept { return static_cast<int>(entries.rows()); }
    /// max |U*U - Id| entrywise.
    [[nodiscard]] double unitarity_error() const;
    [[nodiscard]] Complex trace() const { return entries.trace(); }
    /// Eigenangles in [0, 2pi), sorted.
    [[nodiscard]] std::vector<double> eigenphases() const;
};

/// Orthonormal basis of skew-Hermitian n x n matrices for N<X, Y>_R = N Re Tr(X Y*).
///
/// Elements are stored as descriptors rather than dense matrices: for each pair
/// k < l an antisymmetric element (E_kl - E_lk)/sqrt(2n) and a symmetric one
/// i(E_kl + E_lk)/sqrt(2n), then the diagonal elements i E_kk / sqrt(n).
class SkewBasis {
public:
    enum class Kind { Antisymmetric, Symmetric, Diagonal };
    struct Element {
        int row;
        int col;
        Kind kind;
    };

    explicit SkewBasis(int n);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] std::size_t size() const noexcept { return elements_.size(); }
    [[nodiscard]] const Element& descriptor(std::size_t i) const { return elements_.at(i); }
    [[nodiscard]] ComplexMatrix element(std::size_t i) const;
    /// sum_k c_k X_k.
    [[nodiscard]] ComplexMatrix combine(const std::vector<double>& coeffs) const;

private:
    int n_;
    std::vector<Element> elements_;
};

SkewBasis skew_basis(int n);

/// Re Tr(X Y*).
double real_inner(const ComplexMatrix& x, const ComplexMatrix& y);

/// Haar-distributed unitary (QR of a complex Ginibre matrix, diagonal phase fix).
UnitaryMatrix sample_haar_unitary(int n, const SeedTree& seed);
UnitaryMatrix sample_haar_unitary(int n, std::mt19937_64& rng);

/// Default step min(1e-3, 0.1/n).
double default_dt(int n);

/// Geometric Euler steps U <- U exp(sqrt(2 dt) Xi), Xi standard Gaussian in the
/// skew basis. Returns the states after every `record_every` steps, the
/// starting state first, and always the final state.
std::vector<UnitaryMatrix> evolve_unitary(const UnitaryMatrix& start, double dt, int steps, const SeedTree& seed,
                                          int record_every = 1);

/// One geometric step, in place. Exposed for callers running many short paths.
void unitary_step(ComplexMatrix& u, double dt, std::mt19937_64& rng);

/// exp(X) for skew-Hermitian X via the Hermitian eigendecomposition of -iX.
ComplexMatrix skew_hermitian_exp(const ComplexMatrix& x);

struct PhaseTrajectory {
    int n = 0;
    double beta = 2.0;
    double dt = 0.0;
    std::string seed_path;
    std::vector<double> times;
    /// phases[s][j]: lifted angle of particle j at times[s].
    std::vector<std::vector<double>> phases;
};

class CollisionError : public std::runtime_error {
public:
    CollisionError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

/// Euler-Maruyama for the circular Dyson dynamics
///   d theta_j = (beta / 2n) sum_{i != j} cot((theta_j - theta_i)/2) dt + sqrt(2/n) dB_j.
///
/// Phases are kept in cyclic order and lifted. For beta >= 1 a step that would
/// shrink any gap by more than half (or reorder) is refined on the Brownian
/// bridge, up to 20 halvings.
class DysonIntegrator {
public:
    DysonIntegrator(int n, double beta, double dt);

    /// Advance `theta` (cyclically sorted, lifted) by `steps` steps of size dt.
    /// `t0` is only used for error reports.
    void advance(std::vector<double>& theta, int steps, std::mt19937_64& rng, double t0 = 0.0);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] long long refinements() const noexcept { return refinements_; }

    static constexpr int kMaxHalvings = 40;
    static constexpr double kCollisionGap = 1e-12;

private:
    void drift(const std::vector<double>& theta, std::vector<double>& out);
    void substep(std::vector<double>& theta, double h, const std::vector<double>& dw, std::mt19937_64& rng, int depth,
                 double t);
    bool acceptable(const std::vector<double>& before, const std::vector<double>& after) const;

    int n_;
    double beta_;
    double dt_;
    long long refinements_ = 0;
    std::vector<double> cos_, sin_, drift_;
};

/// Sorted CUE eigenphases in [0, 2pi).
std::vector<double> cue_eigenphases(int n, std::mt19937_64& rng);
std::vector<double> cue_eigenphases(int n, const SeedTree& seed);

/// Evolve `start` for `steps` steps and record every `record_every` steps.
PhaseTrajectory evolve_eigenphases(const std::vector<double>& start, double dt, int steps, double beta,
                                   const SeedTree& seed, int record_every = 1);

/// Stationary beta=2 path from a CUE start, recorded at the given times.
/// Times must be increasing and >= 0; each gap is covered with steps of at
/// most `dt` (shrunk so the grid is hit exactly).
PhaseTrajectory stationary_phase_path(int n, const std::vector<double>& times, const SeedTree& seed, double dt = 0.0);

/// Half-width of the spread of theta_(k) - 2 pi k / n: the max lattice
/// deviation after the best rotation.
double lattice_deviation(const std::vector<double>& phases);

struct RigidityRow {
    double time = 0.0;
    double deviation = 0.0;
    double statistic = 0.0;  // n * deviation / log n
    bool flagged = false;    // n * deviation > (log n)^2
};

std::vector<RigidityRow> rigidity_report(const PhaseTrajectory& traj);

}  // namespace ubmlab
