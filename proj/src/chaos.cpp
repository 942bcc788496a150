#include "ubmlab/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ubmlab/fisher_hartwig.hpp"
#include "ubmlab/parallel.hpp"
#include "ubmlab/spectral.hpp"
#include "ubmlab/special_functions.hpp"

namespace ubmlab {

void CylinderGrid::validate() const {
    if (!(t_hi > t_lo) || !(theta_hi > theta_lo)) throw std::invalid_argument("CylinderGrid: empty window");
    if (nt < 1 || ntheta < 1 || sub < 1) throw std::invalid_argument("CylinderGrid: cell counts must be >= 1");
    if (t_lo < 0.0) throw std::invalid_argument("CylinderGrid: times must be >= 0");
}

namespace {

std::vector<double> midpoints(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    const double h = (hi - lo) / count;
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h;
    return out;
}

}  // namespace

std::vector<double> CylinderGrid::sample_times() const { return midpoints(t_lo, t_hi, nt * sub); }
std::vector<double> CylinderGrid::sample_angles() const { return midpoints(theta_lo, theta_hi, ntheta * sub); }

const char* to_string(FieldKind kind) noexcept {
    return kind == FieldKind::MatrixBorn ? "matrix-born" : "gaussian-reference";
}

CylinderField sample_gaussian_field(int k_max, const CylinderGrid& grid, const SeedTree& seed, double epsilon) {
    if (k_max < 1) throw std::invalid_argument("sample_gaussian_field: k_max must be >= 1");
    if (epsilon < 0.0) throw std::invalid_argument("sample_gaussian_field: epsilon must be >= 0");
    grid.validate();

    CylinderField field;
    field.kind = FieldKind::GaussianReference;
    field.k_max = k_max;
    field.epsilon = epsilon;
    field.grid = grid;
    field.times = grid.sample_times();
    field.angles = grid.sample_angles();
    const std::size_t na = field.angles.size();
    const std::size_t nk = static_cast<std::size_t>(k_max);
    field.values.assign(field.times.size() * na, 0.0);

    // cos/sin tables, damped by e^{-k eps}
    std::vector<double> ctab(nk * na), stab(nk * na);
    for (std::size_t k = 0; k < nk; ++k) {
        const double damp = std::exp(-static_cast<double>(k + 1) * epsilon);
        for (std::size_t a = 0; a < na; ++a) {
            const double x = static_cast<double>(k + 1) * field.angles[a];
            ctab[k * na + a] = damp * std::cos(x);
            stab[k * na + a] = damp * std::sin(x);
        }
    }

    auto rng = seed.engine();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> amp_a(nk), amp_b(nk), sd(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        sd[k] = std::sqrt(0.5 / static_cast<double>(k + 1));
        amp_a[k] = sd[k] * normal(rng);
        amp_b[k] = sd[k] * normal(rng);
    }

    double t_prev = field.times.front();
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        const double dt = field.times[ti] - t_prev;
        if (dt > 0.0) {
            for (std::size_t k = 0; k < nk; ++k) {
                const double rho = std::exp(-static_cast<double>(k + 1) * dt);
                const double noise = sd[k] * std::sqrt(-std::expm1(-2.0 * static_cast<double>(k + 1) * dt));
                amp_a[k] = rho * amp_a[k] + noise * normal(rng);
                amp_b[k] = rho * amp_b[k] + noise * normal(rng);
            }
        }
        t_prev = field.times[ti];
        double* row = field.values.data() + ti * na;
        for (std::size_t k = 0; k < nk; ++k) {
            const double* c = ctab.data() + k * na;
            const double* s = stab.data() + k * na;
            for (std::size_t a = 0; a < na; ++a) row[a] += amp_a[k] * c[a] + amp_b[k] * s[a];
        }
    }
    return field;
}

CylinderField matrix_born_field(const PhaseTrajectory& traj, const CylinderGrid& grid, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("matrix_born_field: epsilon must be >= 0");
    grid.validate();
    CylinderField field;
    field.kind = FieldKind::MatrixBorn;
    field.n = traj.n;
    field.epsilon = epsilon;
    field.grid = grid;
    field.times = grid.sample_times();
    field.angles = grid.sample_angles();
    if (traj.times.size() != field.times.size())
        throw std::invalid_argument("matrix_born_field: trajectory must be recorded at the grid sample times");
    for (std::size_t i = 0; i < field.times.size(); ++i) {
        if (std::abs(traj.times[i] - field.times[i]) > 1e-12)
            throw std::invalid_argument("matrix_born_field: trajectory times do not match the grid");
    }
    const std::size_t na = field.angles.size();
    field.values.resize(field.times.size() * na);
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        const auto& phases = traj.phases[ti];
        for (std::size_t a = 0; a < na; ++a)
            field.values[ti * na + a] = mollified_log_char_poly(phases, field.angles[a], epsilon);
    }
    return field;
}

CylinderField sample_matrix_born_field(int n, const CylinderGrid& grid, const SeedTree& seed, double epsilon) {
    grid.validate();
    const PhaseTrajectory traj = stationary_phase_path(n, grid.sample_times(), seed);
    return matrix_born_field(traj, grid, epsilon);
}

namespace {

void check_distinct(Complex z, Complex w) {
    const double du = std::abs(wrap_signed(z.imag() - w.imag()));
    if (z.real() == w.real() && du == 0.0) throw std::invalid_argument("cylinder_covariance: z = w");
}

}  // namespace

double cylinder_covariance(Complex z, Complex w) {
    check_distinct(z, w);
    // divide through by the larger modulus so nothing overflows
    const double m = std::max(z.real(), w.real());
    const Complex ez = std::exp(Complex(z.real() - m, z.imag()));
    const Complex ew = std::exp(Complex(w.real() - m, w.imag()));
    return -0.5 * std::log(std::abs(ez - ew));
}

double cylinder_covariance_poisson(Complex z, Complex w) {
    check_distinct(z, w);
    return poisson_green(z.imag() - w.imag(), std::abs(z.real() - w.real()));
}

double cylinder_covariance_series(Complex z, Complex w, int terms) {
    const double tau = std::abs(z.real() - w.real());
    const double u = z.imag() - w.imag();
    double acc = 0.0;
    for (int k = terms; k >= 1; --k) acc += std::exp(-k * tau) * std::cos(k * u) / k;
    return 0.5 * acc;
}

double gaussian_field_variance(int k_max, double epsilon) {
    double acc = 0.0;
    for (int k = k_max; k >= 1; --k) acc += std::exp(-2.0 * k * epsilon) / k;
    return 0.5 * acc;
}

double log_matrix_normalizer(int n, double gamma, double epsilon) {
    if (n < 1) throw std::invalid_argument("log_matrix_normalizer: n must be >= 1");
    if (epsilon <= 0.0) return log_keating_snaith_moment(n, gamma);
    // |1 - r e^{i phi}|^gamma = (1 - r e^{i phi})^{a} (1 - r e^{-i phi})^{a}, a = gamma / 2,
    // so f_k = sum_j b_{j+k} b_j with b_j = binom(a, j) (-r)^j.
    const double r = std::exp(-epsilon);
    const double a = 0.5 * gamma;
    std::vector<double> b{1.0};
    for (int j = 0; j < 200000; ++j) {
        const double next = b.back() * (j - a) / (j + 1) * r;
        b.push_back(next);
        if (std::abs(next) < 1e-18 * (1.0 - r) && j > 2 * n) break;
    }
    CircleSymbol coeffs(n - 1 > 0 ? n - 1 : 0, "mollified-power");
    for (int k = 0; k <= coeffs.k_max(); ++k) {
        double acc = 0.0;
        for (std::size_t j = b.size(); j-- > 0;) {
            if (j + static_cast<std::size_t>(k) < b.size()) acc += b[j + static_cast<std::size_t>(k)] * b[j];
        }
        coeffs.set_coeff(k, acc);
        coeffs.set_coeff(-k, acc);
    }
    const ToeplitzResult det = toeplitz_determinant(coeffs, n);
    if (det.value.real() <= 0.0) throw std::runtime_error("log_matrix_normalizer: non-positive Toeplitz determinant");
    return det.log_abs;
}

double ChaosMeasure::total_mass() const {
    std::vector<double> masses;
    masses.reserve(cells.size());
    for (const auto& c : cells) masses.push_back(c.mass);
    return parallel::tree_sum(masses);
}

ChaosMeasure gmc_measure(const CylinderField& field, double gamma, const GmcOptions& options) {
    if (!std::isfinite(gamma) || gamma < 0.0 || gamma >= kGmcGammaLimit)
        throw std::invalid_argument("gmc_measure: gamma must lie in [0, 2 sqrt 2)");
    const CylinderGrid& g = field.grid;
    const std::size_t na = field.angles.size();
    if (field.values.size() != field.times.size() * na ||
        field.times.size() != static_cast<std::size_t>(g.nt * g.sub) ||
        na != static_cast<std::size_t>(g.ntheta * g.sub))
        throw std::invalid_argument("gmc_measure: field does not match its grid");

    ChaosMeasure measure;
    measure.gamma = gamma;
    if (gamma >= 2.0) measure.tag = "no-quantitative-acceptance";

    double log_norm = 0.0;
    if (field.kind == FieldKind::GaussianReference) {
        measure.normalization = "gaussian-epsilon";
        log_norm = 0.5 * gamma * gamma * gaussian_field_variance(field.k_max, field.epsilon);
    } else {
        measure.normalization = field.epsilon > 0.0 ? "toeplitz-mollified" : "keating_snaith";
        log_norm = gamma == 0.0 ? 0.0 : log_matrix_normalizer(field.n, gamma, field.epsilon);
    }
    if (options.log_normalizer) log_norm = *options.log_normalizer;

    const double dt = (g.t_hi - g.t_lo) / g.nt;
    const double dth = (g.theta_hi - g.theta_lo) / g.ntheta;
    const double point_weight = g.cell_area() / (static_cast<double>(g.sub) * g.sub);
    measure.cells.reserve(static_cast<std::size_t>(g.nt * g.ntheta));
    const std::size_t sub = static_cast<std::size_t>(g.sub);
    for (int i = 0; i < g.nt; ++i) {
        for (int j = 0; j < g.ntheta; ++j) {
            double mass = 0.0;
            for (std::size_t p = 0; p < sub; ++p) {
                const std::size_t ti = static_cast<std::size_t>(i) * sub + p;
                for (std::size_t q = 0; q < sub; ++q) {
                    const std::size_t ai = static_cast<std::size_t>(j) * sub + q;
                    mass += std::exp(gamma * field.values[ti * na + ai] - log_norm);
                }
            }
            mass *= point_weight;
            if (!std::isfinite(mass) || mass < 0.0) throw std::runtime_error("gmc_measure: non-finite cell mass");
            measure.cells.push_back(
                {g.t_lo + i * dt, g.t_lo + (i + 1) * dt, g.theta_lo + j * dth, g.theta_lo + (j + 1) * dth, mass});
        }
    }
    return measure;
}

double gmc_two_point_kernel(Complex z, Complex w, double gamma, double epsilon) {
    const double tau = std::abs(z.real() - w.real()) + 2.0 * epsilon;
    return std::exp(gamma * gamma * poisson_green(z.imag() - w.imag(), tau));
}

namespace {

// Length of {s in [a1, a2] : s + d in [b1, b2]}.
double overlap(double a1, double a2, double b1, double b2, double d) {
    return std::max(0.0, std::min(a2, b2 - d) - std::max(a1, b1 - d));
}

std::vector<double> breakpoints(double a1, double a2, double b1, double b2, bool periodic) {
    const double lo = b1 - a2;
    const double hi = b2 - a1;
    std::vector<double> pts{lo, hi};
    for (double p : {b1 - a1, b2 - a2, 0.0}) {
        if (p > lo && p < hi) pts.push_back(p);
    }
    if (periodic) {
        for (int m = -3; m <= 3; ++m) {
            const double p = m * kTwoPi;
            if (m != 0 && p > lo && p < hi) pts.push_back(p);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

template <class F>
double piecewise_integral(const std::vector<double>& pts, F&& f, double tol) {
    boost::math::quadrature::tanh_sinh<double> ts;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] > pts[i]) acc += ts.integrate(f, pts[i], pts[i + 1], tol);
    }
    return acc;
}

}  // namespace

double gmc_cross_moment_prediction(const Patch& a, const Patch& b, double gamma, double epsilon) {
    if (!(gamma >= 0.0) || gamma >= 2.0)
        throw std::invalid_argument("gmc_second_moment_prediction: gamma must lie in [0, 2)");
    if (epsilon < 0.0) throw std::invalid_argument("gmc_second_moment_prediction: epsilon must be >= 0");
    if (!(a.t_hi > a.t_lo && a.theta_hi > a.theta_lo && b.t_hi > b.t_lo && b.theta_hi > b.theta_lo))
        throw std::invalid_argument("gmc_second_moment_prediction: empty patch");
    if (gamma == 0.0) return a.area() * b.area();

    const auto t_pts = breakpoints(a.t_lo, a.t_hi, b.t_lo, b.t_hi, false);
    const auto u_pts = breakpoints(a.theta_lo, a.theta_hi, b.theta_lo, b.theta_hi, true);
    const double g2 = gamma * gamma;
    constexpr double tol = 1e-10;

    auto inner = [&](double d_t) {
        const double wt = overlap(a.t_lo, a.t_hi, b.t_lo, b.t_hi, d_t);
        if (wt <= 0.0) return 0.0;
        const double tau = std::abs(d_t) + 2.0 * epsilon;
        auto f = [&](double d_u) {
            const double wu = overlap(a.theta_lo, a.theta_hi, b.theta_lo, b.theta_hi, d_u);
            if (wu <= 0.0) return 0.0;
            return wu * std::exp(g2 * poisson_green(d_u, tau));
        };
        return wt * piecewise_integral(u_pts, f, tol);
    };
    return piecewise_integral(t_pts, inner, tol);
}

double gmc_second_moment_prediction(const Patch& patch, double gamma, double epsilon) {
    return gmc_cross_moment_prediction(patch, patch, gamma, epsilon);
}

double max_field_statistic(const CylinderField& field) {
    const int n = field.kind == FieldKind::MatrixBorn ? field.n : field.k_max;
    if (n < 2) throw std::invalid_argument("max_field_statistic: need n >= 2");
    if (field.values.empty()) throw std::invalid_argument("max_field_statistic: empty field");
    const double m = *std::max_element(field.values.begin(), field.values.end());
    return m / std::log(static_cast<double>(n));
}

void write_measure_csv(const ChaosMeasure& measure, std::ostream& out) {
    out << "# gamma=" << std::setprecision(17) << measure.gamma << " normalization=" << measure.normalization;
    if (!measure.tag.empty()) out << " tag=" << measure.tag;
    out << "\n";
    out << "t_lo,t_hi,theta_lo,theta_hi,mass\n";
    for (const auto& c : measure.cells)
        out << c.t_lo << ',' << c.t_hi << ',' << c.theta_lo << ',' << c.theta_hi << ',' << c.mass << '\n';
}

}  // namespace ubmlab
