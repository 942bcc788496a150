#include "ubmlab/fisher_hartwig.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "ubmlab/parallel.hpp"
#include "ubmlab/special_functions.hpp"

namespace ubmlab {

namespace {

bool same_angle(double a, double b) {
    const double d = std::abs(wrap_signed(a - b));
    return d < 1e-14;
}

}  // namespace

void FHSymbol::validate() const {
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (!(factors[i].alpha > -0.5)) throw std::invalid_argument("FHSymbol: exponents must exceed -1/2");
        for (std::size_t j = i + 1; j < factors.size(); ++j) {
            if (same_angle(factors[i].angle, factors[j].angle)) {
                throw std::invalid_argument("FHSymbol: coincident singularities");
            }
        }
    }
    if (!smooth.is_real(1e-12)) throw std::invalid_argument("FHSymbol: smooth part must be real");
}

double FHSymbol::evaluate(double theta) const {
    double v = std::exp(smooth.evaluate_real(theta));
    for (const auto& f : factors) {
        const double d = 2.0 * std::abs(std::sin(0.5 * (theta - f.angle)));
        v *= std::pow(d, 2.0 * f.alpha);
    }
    return v;
}

std::vector<double> fh_factor_coefficients(double alpha, int m_max) {
    if (!(alpha > -0.5)) throw std::invalid_argument("fh_factor_coefficients: alpha must exceed -1/2");
    std::vector<double> c(static_cast<std::size_t>(m_max) + 1);
    c[0] = std::exp(std::lgamma(1.0 + 2.0 * alpha) - 2.0 * std::lgamma(1.0 + alpha));
    for (int m = 0; m < m_max; ++m) c[m + 1] = c[m] * (m - alpha) / (m + 1.0 + alpha);
    return c;
}

namespace {

// Coefficients of e^V, grown until the outermost ones are negligible.
std::vector<Complex> exp_smooth_coefficients(const CircleSymbol& v, int& range) {
    if (v.h_half_norm_squared() == 0.0 && std::abs(v.coeff(0)) == 0.0) {
        range = 0;
        return {Complex(1.0, 0.0)};
    }
    int l = std::max(32, 8 * v.k_max() + 16);
    for (int attempt = 0; attempt < 8; ++attempt, l *= 2) {
        auto ev = [&v](double t) { return std::exp(v.evaluate(t)); };
        CircleSymbol e = fourier_coefficients(ev, l, 8 * l);
        double peak = 0.0;
        for (int k = -l; k <= l; ++k) peak = std::max(peak, std::abs(e.coeff(k)));
        if (std::abs(e.coeff(l)) + std::abs(e.coeff(-l)) < 1e-15 * peak) {
            // trim trailing negligible modes
            int keep = l;
            while (keep > 0 && std::abs(e.coeff(keep)) + std::abs(e.coeff(-keep)) < 1e-16 * peak) --keep;
            range = keep;
            std::vector<Complex> out(static_cast<std::size_t>(2 * keep + 1));
            for (int k = -keep; k <= keep; ++k) out[k + keep] = e.coeff(k);
            return out;
        }
    }
    throw TruncationLossError("fh_symbol_coefficients: e^V coefficients do not decay", 1.0);
}

struct FactorTable {
    double alpha;
    double angle;
    std::vector<double> c;

    [[nodiscard]] Complex at(long long j) const {
        const std::size_t m = static_cast<std::size_t>(j < 0 ? -j : j);
        return c[m] * std::polar(1.0, -static_cast<double>(j) * angle);
    }
};

double envelope(const std::vector<Complex>& acc, int range, int width) {
    double e = 0.0;
    for (int j = std::max(0, range - width); j <= range; ++j) {
        e = std::max({e, std::abs(acc[range + j]), std::abs(acc[range - j])});
    }
    return e;
}

}  // namespace

CircleSymbol fh_symbol_coefficients(const FHSymbol& symbol, int k_max, const FHCoefficientOptions& options,
                                    double* loss) {
    symbol.validate();
    if (k_max < 0) throw std::invalid_argument("fh_symbol_coefficients: k_max must be >= 0");
    int l = 0;
    const std::vector<Complex> ev = exp_smooth_coefficients(symbol.smooth, l);
    const int m = static_cast<int>(symbol.factors.size());
    CircleSymbol out(k_max, "fisher-hartwig");
    double total_loss = 0.0;

    if (m == 0) {
        for (int k = -std::min(k_max, l); k <= std::min(k_max, l); ++k) out.set_coeff(k, ev[k + l]);
    } else if (m == 1) {
        const auto& f = symbol.factors[0];
        FactorTable t{f.alpha, f.angle, fh_factor_coefficients(f.alpha, k_max + l)};
        for (int k = -k_max; k <= k_max; ++k) {
            Complex acc{};
            for (int j = -l; j <= l; ++j) acc += ev[j + l] * t.at(k - j);
            out.set_coeff(k, acc);
        }
    } else {
        int range = options.internal_range;
        if (m >= 3) range = std::min(range, 4096);
        std::vector<FactorTable> tables;
        for (const auto& f : symbol.factors) {
            tables.push_back({f.alpha, f.angle, fh_factor_coefficients(f.alpha, 2 * range + k_max + l + 1)});
        }
        // acc = e^V * first factor on |j| <= range
        std::vector<Complex> acc(static_cast<std::size_t>(2 * range + 1));
        for (int j = -range; j <= range; ++j) {
            Complex s{};
            for (int i = -l; i <= l; ++i) s += ev[i + l] * tables[0].at(j - i);
            acc[j + range] = s;
        }
        double slowest = tables[0].alpha;
        const auto tail = [&](double env, const FactorTable& next) {
            const double a = 1.0 + 2.0 * slowest;
            const double b = 1.0 + 2.0 * next.alpha;
            const double p = a + b;
            if (p <= 1.0) return std::numeric_limits<double>::infinity();
            return 2.0 * env * std::abs(next.c[static_cast<std::size_t>(range)]) * range / (p - 1.0);
        };
        for (int f = 1; f + 1 < m; ++f) {
            total_loss += tail(envelope(acc, range, 64), tables[f]);
            std::vector<Complex> next(acc.size());
            for (int j = -range; j <= range; ++j) {
                Complex s{};
                for (int i = -range; i <= range; ++i) s += acc[i + range] * tables[f].at(j - i);
                next[j + range] = s;
            }
            acc.swap(next);
            slowest = std::min(slowest, tables[f].alpha);
        }
        const FactorTable& last = tables[m - 1];
        total_loss += tail(envelope(acc, range, 64), last);
        for (int k = -k_max; k <= k_max; ++k) {
            Complex s{};
            for (int j = -range; j <= range; ++j) s += acc[j + range] * last.at(k - j);
            out.set_coeff(k, s);
        }
    }
    if (loss) *loss = total_loss;
    if (!(total_loss <= options.max_loss)) {
        std::ostringstream msg;
        msg << "fh_symbol_coefficients: estimated truncation loss " << total_loss << " exceeds " << options.max_loss
            << "; raise the internal range";
        throw TruncationLossError(msg.str(), total_loss);
    }
    out.set_evaluator([symbol](double t) { return Complex(symbol.evaluate(t), 0.0); });
    for (const auto& f : symbol.factors) out.add_singularity({f.angle, 2.0 * f.alpha});
    return out;
}

namespace {

template <class Mapper>
ComplexMatrix toeplitz_with(Mapper&& mapper, const CircleSymbol& coeffs, int n) {
    if (n < 1) throw std::invalid_argument("toeplitz_matrix: n must be >= 1");
    ComplexMatrix t(n, n);
    // one task per diagonal d = j - k
    mapper(static_cast<std::size_t>(2 * n - 1), [&](std::size_t idx) {
        const int d = static_cast<int>(idx) - (n - 1);
        const Complex v = coeffs.coeff(d);
        for (int k = std::max(0, -d); k < n && k + d < n; ++k) t(k + d, k) = v;
        return 0;
    });
    return t;
}

ToeplitzResult determinant_of(const ComplexMatrix& t) {
    Eigen::PartialPivLU<ComplexMatrix> lu(t);
    const ComplexMatrix& u = lu.matrixLU();
    ToeplitzResult r;
    double log_abs = 0.0;
    Complex phase = lu.permutationP().determinant();
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const double a = std::abs(u(i, i));
        log_abs += std::log(a);
        phase *= (a > 0.0) ? u(i, i) / a : Complex(0.0, 0.0);
    }
    r.log_abs = log_abs;
    r.value = phase * std::exp(log_abs);
    const double rc = lu.rcond();
    r.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    r.unreliable = !(r.condition <= kToeplitzConditionLimit);
    return r;
}

}  // namespace

ComplexMatrix toeplitz_matrix(const CircleSymbol& coeffs, int n) {
    return toeplitz_with([](std::size_t m, auto&& f) { return parallel::map_indexed(m, f); }, coeffs, n);
}

ComplexMatrix toeplitz_matrix_serial(const CircleSymbol& coeffs, int n) {
    return toeplitz_with([](std::size_t m, auto&& f) { return serial::map_indexed(m, f); }, coeffs, n);
}

ToeplitzResult toeplitz_determinant(const CircleSymbol& coeffs, int n) {
    return determinant_of(toeplitz_matrix(coeffs, n));
}

ToeplitzResult toeplitz_determinant_serial(const CircleSymbol& coeffs, int n) {
    return determinant_of(toeplitz_matrix_serial(coeffs, n));
}

double log_widom_asymptotic(const FHSymbol& symbol, int n) {
    symbol.validate();
    if (n < 1) throw std::invalid_argument("widom_asymptotic: n must be >= 1");
    const CircleSymbol& v = symbol.smooth;
    double log_value = n * v.coeff(0).real() + 0.5 * v.h_half_norm_squared();
    double alpha_sq = 0.0;
    for (std::size_t j = 0; j < symbol.factors.size(); ++j) {
        const auto& fj = symbol.factors[j];
        log_value -= fj.alpha * (v.evaluate_real(fj.angle) - v.coeff(0).real());
        alpha_sq += fj.alpha * fj.alpha;
        log_value += 2.0 * log_barnes_g(1.0 + fj.alpha) - log_barnes_g(1.0 + 2.0 * fj.alpha);
        for (std::size_t k = j + 1; k < symbol.factors.size(); ++k) {
            const auto& fk = symbol.factors[k];
            const double dist = 2.0 * std::abs(std::sin(0.5 * (fj.angle - fk.angle)));
            log_value -= 2.0 * fj.alpha * fk.alpha * std::log(dist);
        }
    }
    log_value += alpha_sq * std::log(static_cast<double>(n));
    return log_value;
}

double widom_asymptotic(const FHSymbol& symbol, int n) { return std::exp(log_widom_asymptotic(symbol, n)); }

void InsertionConfig::validate() const {
    for (std::size_t i = 0; i < singularities.size(); ++i) {
        const auto& a = singularities[i];
        if (!(a.gamma >= 0.0) || a.gamma > max_gamma) {
            throw std::invalid_argument("InsertionConfig: exponent outside [0, C]");
        }
        for (std::size_t j = i + 1; j < singularities.size(); ++j) {
            const auto& b = singularities[j];
            if (a.t == b.t && same_angle(a.theta, b.theta)) {
                throw std::invalid_argument("InsertionConfig: coincident singularities");
            }
        }
    }
}

double poisson_green(double u, double tau) {
    if (tau < 0.0) throw std::invalid_argument("poisson_green: tau must be >= 0");
    const double r = std::exp(-tau);
    // |1 - r e^{iu}|^2 = (1 - r)^2 + 4 r sin^2(u/2)
    const double s = std::sin(0.5 * u);
    const double one_minus_r = -std::expm1(-tau);
    const double mod2 = one_minus_r * one_minus_r + 4.0 * r * s * s;
    if (mod2 == 0.0) throw std::domain_error("poisson_green: divergent at zero separation");
    return -0.25 * std::log(mod2);
}

namespace {

// (P_tau - P_inf) f evaluated at angle x.
double poisson_centered_value(const CircleSymbol& f, double tau, double x) {
    Complex acc{};
    for (int k = 1; k <= f.k_max(); ++k) {
        const double damp = std::exp(-k * tau);
        const Complex e = std::polar(1.0, k * x);
        acc += damp * (f.coeff(k) * e + f.coeff(-k) * std::conj(e));
    }
    return acc.real();
}

}  // namespace

double log_multitime_fh_rhs(const InsertionConfig& config, int n) {
    config.validate();
    if (n < 1) throw std::invalid_argument("multitime_fh_rhs: n must be >= 1");
    double log_value = 0.0;
    for (const auto& s : config.smooth) log_value += n * s.f.coeff(0).real();
    double quad = 0.0;
    for (const auto& a : config.smooth) {
        for (const auto& b : config.smooth) quad += h_half_inner(a.f, b.f, std::abs(a.s - b.s));
    }
    log_value += 0.5 * quad;
    for (const auto& z : config.singularities) {
        for (const auto& s : config.smooth) {
            log_value -= 0.5 * z.gamma * poisson_centered_value(s.f, std::abs(z.t - s.s), z.theta);
        }
        log_value += 0.25 * z.gamma * z.gamma * std::log(static_cast<double>(n)) + log_fh_constant(z.gamma);
    }
    // ordered pairs: max(e^t, e^s) / |e^z - e^w| = 1 / |1 - e^{-|t-s|} e^{i(theta - phi)}|
    for (std::size_t i = 0; i < config.singularities.size(); ++i) {
        for (std::size_t j = 0; j < config.singularities.size(); ++j) {
            if (i == j) continue;
            const auto& z = config.singularities[i];
            const auto& w = config.singularities[j];
            log_value += 0.25 * z.gamma * w.gamma * 2.0 * poisson_green(z.theta - w.theta, std::abs(z.t - w.t));
        }
    }
    return log_value;
}

double multitime_fh_rhs(const InsertionConfig& config, int n) { return std::exp(log_multitime_fh_rhs(config, n)); }

double covariance_functional(const CovarianceTag& a, const CovarianceTag& b) {
    struct Visitor {
        double operator()(const SmoothTag& x, const SmoothTag& y) const {
            return h_half_inner(x.f, y.f, std::abs(x.time - y.time));
        }
        double operator()(const SmoothTag& x, const LogTag& y) const {
            return -0.5 * y.gamma * poisson_centered_value(x.f, std::abs(x.time - y.time), y.angle);
        }
        double operator()(const LogTag& x, const SmoothTag& y) const { return (*this)(y, x); }
        double operator()(const LogTag& x, const LogTag& y) const {
            const double tau = std::abs(x.time - y.time);
            if (tau == 0.0 && same_angle(x.angle, y.angle)) {
                throw std::domain_error("covariance_functional: log/log at zero separation diverges");
            }
            return x.gamma * y.gamma * poisson_green(x.angle - y.angle, tau);
        }
    };
    return std::visit(Visitor{}, a, b);
}

double exact_linear_covariance(int n, double t, const CircleSymbol& f, const CircleSymbol& g) {
    if (n < 1) throw std::invalid_argument("exact_linear_covariance: n must be >= 1");
    if (t < 0.0) throw std::invalid_argument("exact_linear_covariance: t must be >= 0");
    const int k_max = std::min(f.k_max(), g.k_max());
    const double nn = n;
    Complex acc{};
    for (int j = -k_max; j <= k_max; ++j) {
        if (j == 0) continue;
        const Complex c = f.coeff(j) * g.coeff(-j);
        if (c == Complex{}) continue;
        const double aj = std::abs(j);
        double weight;
        if (aj <= nn - 1.0) {
            // sgn(j) sinh(j^2 t/n) / sinh(j t/n) = sinh(j^2 t/n) / sinh(|j| t/n), limit |j| at t = 0
            weight = t == 0.0 ? aj
                              : std::exp(-aj * t + log_sinh(aj * aj * t / nn) - log_sinh(aj * t / nn));
        } else {
            // limit n at t = 0
            weight = t == 0.0 ? nn : std::exp(-aj * aj * t / nn + log_sinh(aj * t) - log_sinh(aj * t / nn));
        }
        acc += weight * c;
    }
    return acc.real();
}

}  // namespace ubmlab
