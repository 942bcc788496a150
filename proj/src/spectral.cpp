#include "ubmlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ubmlab/parallel.hpp"

namespace ubmlab {

CircleSymbol::CircleSymbol(int k_max, std::string kind)
    : k_max_(k_max), kind_(std::move(kind)), coeffs_(static_cast<std::size_t>(2 * k_max + 1)) {
    if (k_max < 0) throw std::invalid_argument("CircleSymbol: k_max must be >= 0");
}

void CircleSymbol::set_coeff(int k, Complex value) {
    if (k < -k_max_ || k > k_max_) throw std::out_of_range("CircleSymbol::set_coeff: k outside truncation");
    coeffs_[static_cast<std::size_t>(k + k_max_)] = value;
}

Complex CircleSymbol::evaluate(double theta) const {
    if (evaluator_) return evaluator_(theta);
    return evaluate_series(theta);
}

Complex CircleSymbol::evaluate_series(double theta) const {
    Complex acc = coeff(0);
    const Complex step = std::polar(1.0, theta);
    Complex e = step;
    for (int k = 1; k <= k_max_; ++k) {
        acc += coeff(k) * e + coeff(-k) * std::conj(e);
        e *= step;
    }
    return acc;
}

double CircleSymbol::trace(const std::vector<double>& phases) const {
    double acc = 0.0;
    for (double p : phases) acc += evaluate(p).real();
    return acc;
}

bool CircleSymbol::is_real(double tol) const {
    for (int k = 0; k <= k_max_; ++k) {
        if (std::abs(coeff(-k) - std::conj(coeff(k))) > tol) return false;
    }
    return true;
}

double CircleSymbol::h_half_norm_squared() const {
    double acc = 0.0;
    for (int k = 1; k <= k_max_; ++k) acc += k * (std::norm(coeff(k)) + std::norm(coeff(-k)));
    return acc;
}

CircleSymbol cos_symbol(int m, double amplitude) {
    CircleSymbol f(std::abs(m), "cos");
    if (m == 0) {
        f.set_coeff(0, amplitude);
    } else {
        f.set_coeff(m, 0.5 * amplitude);
        f.set_coeff(-m, 0.5 * amplitude);
    }
    f.set_evaluator([m, amplitude](double t) { return Complex(amplitude * std::cos(m * t), 0.0); });
    return f;
}

CircleSymbol sin_symbol(int m, double amplitude) {
    CircleSymbol f(std::abs(m), "sin");
    if (m != 0) {
        // sin(m t) = (e^{imt} - e^{-imt}) / 2i
        f.set_coeff(m, Complex(0.0, -0.5 * amplitude));
        f.set_coeff(-m, Complex(0.0, 0.5 * amplitude));
    }
    f.set_evaluator([m, amplitude](double t) { return Complex(amplitude * std::sin(m * t), 0.0); });
    return f;
}

CircleSymbol constant_symbol(double c) {
    CircleSymbol f(0, "constant");
    f.set_coeff(0, c);
    f.set_evaluator([c](double) { return Complex(c, 0.0); });
    return f;
}

CircleSymbol log_singularity_symbol(double angle, int k_max) {
    CircleSymbol f(k_max, "log-singularity");
    for (int k = 1; k <= k_max; ++k) {
        const Complex phase = std::polar(1.0, -k * angle);
        f.set_coeff(k, -phase / (2.0 * k));
        f.set_coeff(-k, -std::conj(phase) / (2.0 * k));
    }
    f.set_evaluator([angle](double t) {
        const double d = 2.0 * std::abs(std::sin(0.5 * (t - angle)));
        return Complex(std::log(d), 0.0);
    });
    f.add_singularity({angle, 0.0});
    return f;
}

CircleSymbol fourier_coefficients(const CircleSymbol::Evaluator& f, int k_max, int quadrature_points,
                                  const std::vector<SingularityMark>& marks) {
    if (!marks.empty()) {
        throw std::invalid_argument(
            "fourier_coefficients: singular symbol; use the analytic coefficient path instead of quadrature");
    }
    if (quadrature_points < 4 * k_max || quadrature_points < 1) {
        throw std::invalid_argument("fourier_coefficients: need quadrature_points >= 4 k_max");
    }
    const int m = quadrature_points;
    std::vector<Complex> values(static_cast<std::size_t>(m));
    std::vector<Complex> roots(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double theta = kTwoPi * j / m;
        values[j] = f(theta);
        roots[j] = std::polar(1.0, -theta);
    }
    CircleSymbol out(k_max);
    for (int k = -k_max; k <= k_max; ++k) {
        Complex acc{};
        const long long kk = ((k % m) + m) % m;
        for (int j = 0; j < m; ++j) acc += values[j] * roots[static_cast<std::size_t>((kk * j) % m)];
        out.set_coeff(k, acc / static_cast<double>(m));
    }
    out.set_evaluator(f);
    return out;
}

double h_half_inner(const CircleSymbol& f, const CircleSymbol& g, double t) {
    if (t < 0.0) throw std::invalid_argument("h_half_inner: t must be >= 0");
    const int k_max = std::min(f.k_max(), g.k_max());
    Complex acc{};
    for (int k = 1; k <= k_max; ++k) {
        const double damp = std::exp(-k * t);
        if (damp == 0.0) break;
        acc += static_cast<double>(k) * damp * (f.coeff(k) * g.coeff(-k) + f.coeff(-k) * g.coeff(k));
    }
    return acc.real();
}

CircleSymbol poisson_smooth(const CircleSymbol& f, double t) {
    if (t < 0.0) throw std::invalid_argument("poisson_smooth: t must be >= 0");
    CircleSymbol out(f.k_max(), f.kind());
    for (int k = -f.k_max(); k <= f.k_max(); ++k) out.set_coeff(k, f.coeff(k) * std::exp(-std::abs(k) * t));
    if (t == 0.0 && f.has_evaluator()) out.set_evaluator(f.evaluator());
    return out;
}

CircleSymbol symbol_product(const CircleSymbol& f, const CircleSymbol& g, int k_max) {
    CircleSymbol out(k_max, "product");
    for (int k = -k_max; k <= k_max; ++k) {
        Complex acc{};
        const int lo = std::max(-f.k_max(), k - g.k_max());
        const int hi = std::min(f.k_max(), k + g.k_max());
        for (int j = lo; j <= hi; ++j) acc += f.coeff(j) * g.coeff(k - j);
        out.set_coeff(k, acc);
    }
    if (f.has_evaluator() && g.has_evaluator()) {
        auto fe = f.evaluator();
        auto ge = g.evaluator();
        out.set_evaluator([fe, ge](double t) { return fe(t) * ge(t); });
    }
    return out;
}

CircleSymbol symbol_sum(const CircleSymbol& f, const CircleSymbol& g) {
    const int k_max = std::max(f.k_max(), g.k_max());
    CircleSymbol out(k_max, "sum");
    for (int k = -k_max; k <= k_max; ++k) out.set_coeff(k, f.coeff(k) + g.coeff(k));
    if (f.has_evaluator() && g.has_evaluator()) {
        auto fe = f.evaluator();
        auto ge = g.evaluator();
        out.set_evaluator([fe, ge](double t) { return fe(t) + ge(t); });
    }
    return out;
}

CircleSymbol symbol_scale(const CircleSymbol& f, Complex c) {
    CircleSymbol out(f.k_max(), f.kind());
    for (int k = -f.k_max(); k <= f.k_max(); ++k) out.set_coeff(k, c * f.coeff(k));
    if (f.has_evaluator()) {
        auto fe = f.evaluator();
        out.set_evaluator([fe, c](double t) { return c * fe(t); });
    }
    return out;
}

void write_symbol_csv(const CircleSymbol& f, std::ostream& out) {
    out << std::setprecision(17);
    out << "# kind=" << f.kind() << " k_max=" << f.k_max() << '\n';
    out << "k,re,im\n";
    for (int k = -f.k_max(); k <= f.k_max(); ++k) {
        out << k << ',' << f.coeff(k).real() << ',' << f.coeff(k).imag() << '\n';
    }
}

CircleSymbol read_symbol_csv(std::istream& in) {
    std::string line;
    std::string kind = "fourier";
    std::vector<std::pair<int, Complex>> rows;
    int k_max = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream h(line.substr(1));
            std::string field;
            while (h >> field) {
                if (field.rfind("kind=", 0) == 0) kind = field.substr(5);
            }
            continue;
        }
        if (line.rfind("k,", 0) == 0) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
            throw std::runtime_error("symbol csv: malformed row '" + line + "'");
        }
        const int k = std::stoi(a);
        rows.emplace_back(k, Complex(std::stod(b), std::stod(c)));
        k_max = std::max(k_max, std::abs(k));
    }
    CircleSymbol f(k_max, kind);
    for (const auto& [k, v] : rows) f.set_coeff(k, v);
    return f;
}

bool FieldSample::any_clipped() const {
    return std::any_of(clipped.begin(), clipped.end(), [](char c) { return c != 0; });
}

double log_char_poly(const std::vector<double>& phases, double theta, bool* clipped) {
    double acc = 0.0;
    bool clip = false;
    for (double p : phases) {
        double d = 2.0 * std::abs(std::sin(0.5 * (p - theta)));
        if (d < kLogClip) {
            d = kLogClip;
            clip = true;
        }
        acc += std::log(d);
    }
    if (clipped) *clipped = clip;
    return acc;
}

double mollified_log_char_poly(const std::vector<double>& phases, double theta, double eps) {
    if (eps <= 0.0) return log_char_poly(phases, theta);
    const double r = std::exp(-eps);
    double acc = 0.0;
    for (double p : phases) {
        // |1 - r e^{iu}|^2 = 1 - 2 r cos u + r^2
        const double c = std::cos(p - theta);
        acc += 0.5 * std::log1p(r * r - 2.0 * r * c);
    }
    return acc;
}

namespace {

template <class Mapper>
FieldSample field_with(Mapper&& mapper, const PhaseTrajectory& traj, const std::vector<double>& angles) {
    FieldSample out;
    out.times = traj.times;
    out.angles = angles;
    out.source = traj.seed_path;
    const std::size_t na = angles.size();
    auto rows = mapper(traj.times.size(), [&](std::size_t ti) {
        std::pair<std::vector<double>, std::vector<char>> row;
        row.first.resize(na);
        row.second.resize(na);
        for (std::size_t a = 0; a < na; ++a) {
            bool clip = false;
            row.first[a] = log_char_poly(traj.phases[ti], angles[a], &clip);
            row.second[a] = clip ? 1 : 0;
        }
        return row;
    });
    out.values.reserve(rows.size() * na);
    out.clipped.reserve(rows.size() * na);
    for (auto& r : rows) {
        out.values.insert(out.values.end(), r.first.begin(), r.first.end());
        out.clipped.insert(out.clipped.end(), r.second.begin(), r.second.end());
    }
    return out;
}

}  // namespace

FieldSample field_from_trajectory(const PhaseTrajectory& traj, const std::vector<double>& angles) {
    return field_with([](std::size_t n, auto&& f) { return parallel::map_indexed(n, f); }, traj, angles);
}

FieldSample field_from_trajectory_serial(const PhaseTrajectory& traj, const std::vector<double>& angles) {
    return field_with([](std::size_t n, auto&& f) { return serial::map_indexed(n, f); }, traj, angles);
}

void write_field_csv(const FieldSample& field, std::ostream& out) {
    out << std::setprecision(17);
    out << "# source=" << field.source << '\n';
    out << "t,theta,value,clipped\n";
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        for (std::size_t a = 0; a < field.angles.size(); ++a) {
            const std::size_t idx = ti * field.angles.size() + a;
            out << field.times[ti] << ',' << field.angles[a] << ',' << field.values[idx] << ','
                << static_cast<int>(field.clipped[idx]) << '\n';
        }
    }
}

double counting_statistic(const std::vector<double>& phases, double theta) {
    if (!(theta > 0.0 && theta < kTwoPi)) throw std::invalid_argument("counting_statistic: theta must be in (0, 2pi)");
    int count = 0;
    for (double p : phases) {
        const double w = wrap_angle(p);
        if (w > 0.0 && w <= theta) ++count;
    }
    const double n = static_cast<double>(phases.size());
    return kPi * (count - n * theta / kTwoPi);
}

double im_log_char_poly(const std::vector<double>& phases, double theta) {
    double acc = 0.0;
    for (double p : phases) acc += std::arg(Complex(1.0, 0.0) - std::polar(1.0, theta - p));
    return acc;
}

Complex borel_transform(const UnitaryMatrix& u, Complex z, const std::optional<ComplexMatrix>& a) {
    const int n = u.n();
    Eigen::ComplexEigenSolver<ComplexMatrix> es(u.entries, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(z - es.eigenvalues()(i)) < 1e-12) {
            throw std::domain_error("borel_transform: z is within 1e-12 of an eigenvalue");
        }
    }
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const ComplexMatrix weight = a ? *a : ComplexMatrix(id / static_cast<double>(n));
    const ComplexMatrix lhs = z * id - u.entries;
    const ComplexMatrix rhs = (z * id + u.entries) * weight;
    const ComplexMatrix x = lhs.partialPivLu().solve(rhs);
    return x.trace();
}

Complex characteristic_flow(Complex z, double t) {
    const double r = std::abs(z);
    if (r == 1.0) throw std::domain_error("characteristic_flow: |z| = 1 is not in the domain");
    return r > 1.0 ? z * std::exp(t) : z * std::exp(-t);
}

void BiasSpec::validate() const {
    for (const auto& ins : insertions) {
        if (!std::isfinite(ins.symbol.h_half_norm_squared()) || !std::isfinite(ins.time)) {
            throw std::invalid_argument("BiasSpec: insertion with non-finite H^{1/2} norm or time");
        }
    }
}

std::size_t time_index(const PhaseTrajectory& traj, double t) {
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (std::abs(traj.times[i] - t) <= 1e-9) return i;
    }
    std::ostringstream msg;
    msg << "trajectory has no slice at t=" << t;
    throw std::invalid_argument(msg.str());
}

double BiasSpec::log_weight(const PhaseTrajectory& traj) const {
    double acc = 0.0;
    for (const auto& ins : insertions) acc += ins.symbol.trace(traj.phases[time_index(traj, ins.time)]);
    return acc;
}

Estimate reweighted_expectation(const std::vector<PhaseTrajectory>& samples, const BiasSpec& bias,
                                const std::function<double(const PhaseTrajectory&)>& observable, double min_ess) {
    bias.validate();
    const std::size_t n = samples.size();
    std::vector<double> lw(n), obs(n);
    for (std::size_t i = 0; i < n; ++i) {
        lw[i] = bias.log_weight(samples[i]);
        obs[i] = observable(samples[i]);
        if (!std::isfinite(lw[i]) || !std::isfinite(obs[i])) {
            throw SampleError("non-finite weight or observable", samples[i].seed_path);
        }
    }
    std::string lineage;
    if (!samples.empty()) {
        lineage = samples.front().seed_path;
        if (const auto cut = lineage.rfind('/'); cut != std::string::npos) lineage.resize(cut);
    }
    return self_normalized_estimate(lw, obs, min_ess, lineage);
}

double loop_equation_rhs(const BiasSpec& bias, const CircleSymbol& h, double r) {
    Complex acc{};
    for (const auto& ins : bias.insertions) {
        const double gap = std::abs(ins.time - r);
        const int k_max = std::min(ins.symbol.k_max(), h.k_max());
        for (int k = -k_max; k <= k_max; ++k) {
            if (k == 0) continue;
            const int ak = std::abs(k);
            acc += std::exp(-ak * gap) * static_cast<double>(ak) * ins.symbol.coeff(-k) * h.coeff(k);
        }
    }
    return acc.real();
}

}  // namespace ubmlab
