#include "ubmlab/unitary_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace ubmlab {

double UnitaryMatrix::unitarity_error() const {
    const int m = n();
    ComplexMatrix g = entries.adjoint() * entries;
    g -= ComplexMatrix::Identity(m, m);
    return g.cwiseAbs().maxCoeff();
}

std::vector<double> UnitaryMatrix::eigenphases() const {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(entries, false);
    std::vector<double> out(static_cast<std::size_t>(n()));
    for (int i = 0; i < n(); ++i) out[i] = wrap_angle(std::arg(es.eigenvalues()(i)));
    std::sort(out.begin(), out.end());
    return out;
}

SkewBasis::SkewBasis(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("skew_basis: n must be >= 1");
    elements_.reserve(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            elements_.push_back({k, l, Kind::Antisymmetric});
            elements_.push_back({k, l, Kind::Symmetric});
        }
    }
    for (int k = 0; k < n; ++k) elements_.push_back({k, k, Kind::Diagonal});
}

ComplexMatrix SkewBasis::element(std::size_t i) const {
    std::vector<double> c(size(), 0.0);
    c.at(i) = 1.0;
    return combine(c);
}

ComplexMatrix SkewBasis::combine(const std::vector<double>& coeffs) const {
    if (coeffs.size() != size()) throw std::invalid_argument("SkewBasis::combine: wrong coefficient count");
    const double off = 1.0 / std::sqrt(2.0 * n_);
    const double diag = 1.0 / std::sqrt(static_cast<double>(n_));
    ComplexMatrix x = ComplexMatrix::Zero(n_, n_);
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const Element& e = elements_[i];
        const double c = coeffs[i];
        switch (e.kind) {
            case Kind::Antisymmetric:
                x(e.row, e.col) += c * off;
                x(e.col, e.row) -= c * off;
                break;
            case Kind::Symmetric:
                x(e.row, e.col) += Complex(0.0, c * off);
                x(e.col, e.row) += Complex(0.0, c * off);
                break;
            case Kind::Diagonal:
                x(e.row, e.row) += Complex(0.0, c * diag);
                break;
        }
    }
    return x;
}

SkewBasis skew_basis(int n) { return SkewBasis(n); }

double real_inner(const ComplexMatrix& x, const ComplexMatrix& y) { return (x.array() * y.conjugate().array()).sum().real(); }

UnitaryMatrix sample_haar_unitary(int n, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("sample_haar_unitary: n must be >= 1");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    ComplexMatrix z(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(i, j) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix& r = qr.matrixQR();
    for (int j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        const double a = std::abs(d);
        const Complex phase = a > 0.0 ? d / a : Complex(1.0, 0.0);
        q.col(j) *= phase;
    }
    return UnitaryMatrix(std::move(q));
}

UnitaryMatrix sample_haar_unitary(int n, const SeedTree& seed) {
    auto rng = seed.engine();
    return sample_haar_unitary(n, rng);
}

double default_dt(int n) { return std::min(1e-3, 0.1 / static_cast<double>(std::max(n, 1))); }

ComplexMatrix skew_hermitian_exp(const ComplexMatrix& x) {
    const ComplexMatrix h = Complex(0.0, -1.0) * x;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const auto& v = es.eigenvectors();
    ComplexVector phases(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) phases(i) = std::polar(1.0, es.eigenvalues()(i));
    return v * phases.asDiagonal() * v.adjoint();
}

void unitary_step(ComplexMatrix& u, double dt, std::mt19937_64& rng) {
    const int n = static_cast<int>(u.rows());
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(2.0 * dt);
    const double off = scale / std::sqrt(2.0 * n);
    const double diag = scale / std::sqrt(static_cast<double>(n));
    // same coefficient order as SkewBasis
    ComplexMatrix xi = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            const double a = normal(rng);
            const double b = normal(rng);
            xi(k, l) = Complex(a * off, b * off);
            xi(l, k) = Complex(-a * off, b * off);
        }
    }
    for (int k = 0; k < n; ++k) xi(k, k) = Complex(0.0, normal(rng) * diag);
    u = u * skew_hermitian_exp(xi);
    if (!u.allFinite()) throw std::runtime_error("unitary_step: non-finite entries after step");
}

std::vector<UnitaryMatrix> evolve_unitary(const UnitaryMatrix& start, double dt, int steps, const SeedTree& seed,
                                          int record_every) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_unitary: dt must be positive");
    if (steps < 0) throw std::invalid_argument("evolve_unitary: steps must be >= 0");
    if (record_every < 1) throw std::invalid_argument("evolve_unitary: record_every must be >= 1");
    std::vector<UnitaryMatrix> out;
    out.push_back(start);
    auto rng = seed.engine();
    ComplexMatrix u = start.entries;
    for (int s = 1; s <= steps; ++s) {
        unitary_step(u, dt, rng);
        if (s % record_every == 0 || s == steps) out.emplace_back(u);
    }
    return out;
}

DysonIntegrator::DysonIntegrator(int n, double beta, double dt)
    : n_(n), beta_(beta), dt_(dt), cos_(n), sin_(n), drift_(n) {
    if (n < 1) throw std::invalid_argument("DysonIntegrator: n must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("DysonIntegrator: beta must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("DysonIntegrator: dt must be positive");
}

void DysonIntegrator::drift(const std::vector<double>& theta, std::vector<double>& out) {
    const int n = n_;
    for (int j = 0; j < n; ++j) {
        cos_[j] = std::cos(theta[j]);
        sin_[j] = std::sin(theta[j]);
        out[j] = 0.0;
    }
    const double c = beta_ / (2.0 * n);
    for (int j = 0; j < n; ++j) {
        const double cj = cos_[j];
        const double sj = sin_[j];
        double acc = 0.0;
        for (int i = j + 1; i < n; ++i) {
            // cot((theta_j - theta_i)/2) = sin(d) / (1 - cos d), 1 - cos d = |z_j - z_i|^2 / 2
            const double dc = cj - cos_[i];
            const double ds = sj - sin_[i];
            const double s = sj * cos_[i] - cj * sin_[i];
            const double cot = 2.0 * s / (dc * dc + ds * ds);
            acc += cot;
            out[i] -= cot;
        }
        out[j] += acc;
    }
    for (int j = 0; j < n; ++j) out[j] *= c;
}

bool DysonIntegrator::acceptable(const std::vector<double>& before, const std::vector<double>& after) const {
    const int n = n_;
    if (n == 1) return true;
    for (int j = 0; j < n; ++j) {
        const double g0 = (j + 1 < n) ? before[j + 1] - before[j] : before[0] + kTwoPi - before[n - 1];
        const double g1 = (j + 1 < n) ? after[j + 1] - after[j] : after[0] + kTwoPi - after[n - 1];
        if (!(g1 > 0.0) || std::abs(g1 - g0) > 0.5 * g0) return false;
    }
    return true;
}

void DysonIntegrator::substep(std::vector<double>& theta, double h, const std::vector<double>& dw,
                              std::mt19937_64& rng, int depth, double t) {
    const int n = n_;
    drift(theta, drift_);
    const double noise = std::sqrt(2.0 / n);
    std::vector<double> next(n);
    for (int j = 0; j < n; ++j) next[j] = theta[j] + drift_[j] * h + noise * dw[j];
    for (double v : next) {
        if (!std::isfinite(v)) throw CollisionError("dyson step produced a non-finite phase", t);
    }
    if (beta_ < 1.0) {
        for (int j = 0; j < n && n > 1; ++j) {
            const double g = (j + 1 < n) ? next[j + 1] - next[j] : next[0] + kTwoPi - next[n - 1];
            if (!(g > kCollisionGap)) {
                std::ostringstream msg;
                msg << "eigenphase collision between particles " << j << " and " << (j + 1) % n << " at t=" << t;
                throw CollisionError(msg.str(), t);
            }
        }
        theta.swap(next);
        return;
    }
    if (acceptable(theta, next)) {
        theta.swap(next);
        return;
    }
    if (depth >= kMaxHalvings) {
        std::ostringstream msg;
        msg << "near-collision not resolved after " << kMaxHalvings << " step halvings at t=" << t;
        throw CollisionError(msg.str(), t);
    }
    ++refinements_;
    // Brownian bridge midpoint: W(h/2) | W(h) ~ N(W(h)/2, h/4)
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(h / 4.0);
    std::vector<double> first(n), second(n);
    for (int j = 0; j < n; ++j) {
        first[j] = 0.5 * dw[j] + sd * normal(rng);
        second[j] = dw[j] - first[j];
    }
    substep(theta, 0.5 * h, first, rng, depth + 1, t);
    substep(theta, 0.5 * h, second, rng, depth + 1, t + 0.5 * h);
}

void DysonIntegrator::advance(std::vector<double>& theta, int steps, std::mt19937_64& rng, double t0) {
    if (static_cast<int>(theta.size()) != n_) throw std::invalid_argument("DysonIntegrator: wrong phase count");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(dt_);
    std::vector<double> dw(n_);
    for (int s = 0; s < steps; ++s) {
        for (int j = 0; j < n_; ++j) dw[j] = sd * normal(rng);
        substep(theta, dt_, dw, rng, 0, t0 + s * dt_);
    }
}

std::vector<double> cue_eigenphases(int n, std::mt19937_64& rng) { return sample_haar_unitary(n, rng).eigenphases(); }

std::vector<double> cue_eigenphases(int n, const SeedTree& seed) {
    auto rng = seed.engine();
    return cue_eigenphases(n, rng);
}

namespace {

std::vector<double> cyclic_start(const std::vector<double>& start) {
    std::vector<double> theta(start.size());
    std::transform(start.begin(), start.end(), theta.begin(), wrap_angle);
    std::sort(theta.begin(), theta.end());
    const std::size_t n = theta.size();
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (theta[j + 1] - theta[j] <= DysonIntegrator::kCollisionGap) {
            throw std::invalid_argument("evolve_eigenphases: initial phases must be distinct");
        }
    }
    if (n > 1 && theta[0] + kTwoPi - theta[n - 1] <= DysonIntegrator::kCollisionGap) {
        throw std::invalid_argument("evolve_eigenphases: initial phases must be distinct");
    }
    return theta;
}

}  // namespace

PhaseTrajectory evolve_eigenphases(const std::vector<double>& start, double dt, int steps, double beta,
                                   const SeedTree& seed, int record_every) {
    if (start.empty()) throw std::invalid_argument("evolve_eigenphases: empty start");
    if (steps < 0) throw std::invalid_argument("evolve_eigenphases: steps must be >= 0");
    if (record_every < 1) throw std::invalid_argument("evolve_eigenphases: record_every must be >= 1");
    const int n = static_cast<int>(start.size());
    DysonIntegrator integrator(n, beta, dt);
    PhaseTrajectory traj;
    traj.n = n;
    traj.beta = beta;
    traj.dt = dt;
    traj.seed_path = seed.path_string();
    std::vector<double> theta = cyclic_start(start);
    traj.times.push_back(0.0);
    traj.phases.push_back(theta);
    auto rng = seed.engine();
    int done = 0;
    while (done < steps) {
        const int chunk = std::min(record_every, steps - done);
        integrator.advance(theta, chunk, rng, done * dt);
        done += chunk;
        traj.times.push_back(done * dt);
        traj.phases.push_back(theta);
    }
    return traj;
}

PhaseTrajectory stationary_phase_path(int n, const std::vector<double>& times, const SeedTree& seed, double dt) {
    if (times.empty()) throw std::invalid_argument("stationary_phase_path: no times");
    if (dt <= 0.0) dt = default_dt(n);
    auto rng = seed.engine();
    std::vector<double> theta = cue_eigenphases(n, rng);
    PhaseTrajectory traj;
    traj.n = n;
    traj.beta = 2.0;
    traj.dt = dt;
    traj.seed_path = seed.path_string();
    double now = 0.0;
    for (double t : times) {
        if (t < now) throw std::invalid_argument("stationary_phase_path: times must be increasing and >= 0");
        const double gap = t - now;
        if (gap > 0.0) {
            const int steps = static_cast<int>(std::ceil(gap / dt - 1e-9));
            DysonIntegrator integrator(n, 2.0, gap / steps);
            integrator.advance(theta, steps, rng, now);
        }
        now = t;
        traj.times.push_back(t);
        traj.phases.push_back(theta);
    }
    return traj;
}

double lattice_deviation(const std::vector<double>& phases) {
    const std::size_t n = phases.size();
    if (n == 0) return 0.0;
    std::vector<double> sorted(n);
    std::transform(phases.begin(), phases.end(), sorted.begin(), wrap_angle);
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted[0];
    double hi = sorted[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double d = sorted[k] - kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return 0.5 * (hi - lo);
}

std::vector<RigidityRow> rigidity_report(const PhaseTrajectory& traj) {
    std::vector<RigidityRow> rows;
    rows.reserve(traj.times.size());
    const double n = traj.n;
    const double log_n = std::log(n);
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        RigidityRow row;
        row.time = traj.times[s];
        row.deviation = lattice_deviation(traj.phases[s]);
        row.statistic = traj.n > 1 ? n * row.deviation / log_n : 0.0;
        row.flagged = traj.n > 1 && n * row.deviation > log_n * log_n;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ubmlab
