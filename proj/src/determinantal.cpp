#include "ubmlab/determinantal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ubmlab/parallel.hpp"
#include "ubmlab/special_functions.hpp"

namespace ubmlab {

ExtendedKernel::ExtendedKernel(int n, std::vector<double> times) : n_(n), times_(std::move(times)) {
    if (n < 1) throw std::invalid_argument("ExtendedKernel: n must be >= 1");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i])) throw std::invalid_argument("ExtendedKernel: non-finite time");
        if (i > 0 && times_[i] < times_[i - 1]) throw std::invalid_argument("ExtendedKernel: times must be sorted");
    }
}

ExtendedKernel::Block ExtendedKernel::block(std::size_t i, std::size_t j) const {
    const double tau = std::abs(times_.at(i) - times_.at(j));
    const double s = tau / n_;
    const double c = 0.5 * (n_ + 1);
    const double a = 0.5 * (n_ - 1);
    Block b;
    if (i <= j || tau == 0.0) {
        b.delta_corner = i > j;
        for (int k = 1; k <= n_; ++k) {
            const double m = k - c;
            b.modes.push_back(m);
            b.weights.push_back(std::exp((m * m - a * a) * s) / kTwoPi);
        }
        return b;
    }
    // modes +-(a + l), l >= 1, weight e^{-(2 a l + l^2) s}
    for (long long l = 1;; ++l) {
        const double ll = static_cast<double>(l);
        const double w = std::exp(-(2.0 * a * ll + ll * ll) * s);
        b.modes.push_back(a + ll);
        b.weights.push_back(-w / kTwoPi);
        b.modes.push_back(-(a + ll));
        b.weights.push_back(-w / kTwoPi);
        // remaining terms are bounded by a geometric series with ratio r
        const double r = std::exp(-(2.0 * a + 2.0 * ll + 1.0) * s);
        const double tail = r < 1.0 ? 2.0 * w * r / (1.0 - r) / kTwoPi : std::numeric_limits<double>::infinity();
        if (tail < 1e-16) break;
        if (l > 50'000'000) throw std::runtime_error("ExtendedKernel: backward series does not converge");
    }
    return b;
}

double ExtendedKernel::evaluate_block(const Block& b, double u) {
    double acc = 0.0;
    for (std::size_t k = 0; k < b.modes.size(); ++k) acc += b.weights[k] * std::cos(u * b.modes[k]);
    return acc;
}

Complex ExtendedKernel::evaluate(std::size_t i, double x, std::size_t j, double y) const {
    const Block b = block(i, j);
    if (b.delta_corner && std::abs(wrap_signed(x - y)) == 0.0) {
        throw std::domain_error("ExtendedKernel: equal-time backward block is singular on the diagonal");
    }
    return {evaluate_block(b, x - y), 0.0};
}

ExtendedKernel equilibrium_extended_kernel(int n, std::vector<double> times) {
    return ExtendedKernel(n, std::move(times));
}

double twisted_heat_kernel(double x, double y, double t, int n, HeatKernelMode mode) {
    if (!(t > 0.0)) throw std::invalid_argument("twisted_heat_kernel: t must be positive");
    if (n < 1) throw std::invalid_argument("twisted_heat_kernel: n must be >= 1");
    constexpr int kMaxTerms = 10000;
    const double u = wrap_signed(x - y);
    // wrapping x - y by 2 pi j multiplies the theta series by (-1)^{j(n-1)}
    const double shift = (x - y) - u;
    const long long wraps = std::llround(shift / kTwoPi);
    const double twist = ((n - 1) % 2 != 0 && (wraps % 2 != 0)) ? -1.0 : 1.0;
    if (mode == HeatKernelMode::ThetaSeries) {
        const double norm = 1.0 / std::sqrt(kTwoPi * t);
        const bool odd_twist = (n - 1) % 2 != 0;
        double acc = norm * std::exp(-u * u / (2.0 * t));
        for (int k = 1; k < kMaxTerms; ++k) {
            const double sign = (odd_twist && (k % 2 != 0)) ? -1.0 : 1.0;
            const double a = u - kTwoPi * k;
            const double b = u + kTwoPi * k;
            const double ta = norm * std::exp(-a * a / (2.0 * t));
            const double tb = norm * std::exp(-b * b / (2.0 * t));
            acc += sign * (ta + tb);
            if (ta + tb < 1e-17 && std::abs(a) > std::sqrt(t)) return twist * acc;
        }
        throw std::runtime_error("twisted_heat_kernel: theta series did not converge");
    }
    const double c = 0.5 * (n + 1);
    // modes m = k - c for k in Z; pair m with -m
    double acc = 0.0;
    const bool half = (n % 2 == 0);
    int start;
    if (half) {
        start = 0;  // m = 1/2, 3/2, ...
    } else {
        acc += 1.0;  // m = 0
        start = 1;
    }
    for (int k = start; k < kMaxTerms; ++k) {
        const double m = half ? k + 0.5 : static_cast<double>(k);
        const double w = std::exp(-0.5 * m * m * t);
        acc += 2.0 * w * std::cos(u * m);
        if (w < 1e-17 && m * m * t > 1.0) return twist * acc / kTwoPi;
    }
    (void)c;
    throw std::runtime_error("twisted_heat_kernel: Fourier series did not converge in 1e4 terms");
}

CircleTest zero_test() { return CircleTest{}; }

CircleTest arc_indicator_test(double lo, double hi, double value) {
    if (!(hi > lo) || hi - lo > kTwoPi) throw std::invalid_argument("arc_indicator_test: bad arc");
    CircleTest t;
    const double len = hi - lo;
    t.g = [lo, len, value](double x) { return wrap_angle(x - lo) <= len ? value : 0.0; };
    t.arcs.emplace_back(lo, hi);
    return t;
}

CircleTest full_circle_test(std::function<double(double)> g) {
    CircleTest t;
    t.g = std::move(g);
    return t;
}

QuadratureNodes circle_test_nodes(const CircleTest& test, int m, int panel_order) {
    QuadratureNodes q;
    if (m < 1) throw std::invalid_argument("circle_test_nodes: m must be >= 1");
    if (test.arcs.empty()) {
        q.nodes.resize(m);
        q.weights.assign(m, kTwoPi / m);
        for (int k = 0; k < m; ++k) q.nodes[k] = kTwoPi * k / m;
        return q;
    }
    const GaussRule gl = gauss_legendre(panel_order);
    double total = 0.0;
    for (const auto& [lo, hi] : test.arcs) total += hi - lo;
    const int panels_total = std::max(1, m / panel_order);
    const double h_target = total / panels_total;
    for (const auto& [lo, hi] : test.arcs) {
        std::vector<double> cuts{lo, hi};
        for (double bp : test.breakpoints) {
            const double lifted = lo + wrap_angle(bp - lo);
            if (lifted > lo && lifted < hi) cuts.push_back(lifted);
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double a = cuts[c];
            const double b = cuts[c + 1];
            if (b - a <= 0.0) continue;
            const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / h_target - 1e-9)));
            const double h = (b - a) / panels;
            for (int p = 0; p < panels; ++p) {
                const double mid = a + (p + 0.5) * h;
                for (int k = 0; k < panel_order; ++k) {
                    q.nodes.push_back(mid + 0.5 * h * gl.nodes[k]);
                    q.weights.push_back(0.5 * h * gl.weights[k]);
                }
            }
        }
    }
    return q;
}

namespace {

bool arcs_overlap(const std::vector<std::pair<double, double>>& a, const std::vector<std::pair<double, double>>& b) {
    for (const auto& [alo, ahi] : a) {
        for (const auto& [blo, bhi] : b) {
            const double start = wrap_angle(blo - alo);
            const double blen = bhi - blo;
            const double alen = ahi - alo;
            // b starts inside a, or a starts inside b
            if (start < alen || start + blen > kTwoPi) return true;
        }
    }
    return false;
}

struct MergedCopy {
    double time;
    CircleTest test;
};

std::vector<MergedCopy> merge_equal_times(const FredholmProblem& p) {
    std::vector<MergedCopy> out;
    for (std::size_t j = 0; j < p.times.size(); ++j) {
        const CircleTest& t = p.tests[j];
        if (t.is_zero()) continue;
        if (!out.empty() && out.back().time == p.times[j]) {
            MergedCopy& prev = out.back();
            auto ga = prev.test.g;
            auto gb = t.g;
            CircleTest merged;
            merged.g = [ga, gb](double x) { return (1.0 + ga(x)) * (1.0 + gb(x)) - 1.0; };
            if (!prev.test.arcs.empty() && !t.arcs.empty() && !arcs_overlap(prev.test.arcs, t.arcs)) {
                merged.arcs = prev.test.arcs;
                merged.arcs.insert(merged.arcs.end(), t.arcs.begin(), t.arcs.end());
                merged.breakpoints = prev.test.breakpoints;
                merged.breakpoints.insert(merged.breakpoints.end(), t.breakpoints.begin(), t.breakpoints.end());
            }
            prev.test = std::move(merged);
        } else {
            out.push_back({p.times[j], t});
        }
    }
    return out;
}

template <class Mapper>
FredholmResult fredholm_with(Mapper&& mapper, const FredholmProblem& p) {
    if (p.tests.size() != p.times.size()) throw std::invalid_argument("fredholm: one test per time required");
    for (std::size_t i = 1; i < p.times.size(); ++i) {
        if (p.times[i] < p.times[i - 1]) throw std::invalid_argument("fredholm: times must be sorted");
    }
    const std::vector<MergedCopy> copies = merge_equal_times(p);
    FredholmResult result;
    result.m = p.quadrature_m;
    if (copies.empty()) return result;
    std::vector<double> times;
    std::vector<QuadratureNodes> nodes;
    std::vector<std::vector<double>> gvals;
    std::vector<std::size_t> offset{0};
    for (const auto& c : copies) {
        if (c.test.arcs.empty() && p.quadrature_m < 8 * p.n) {
            throw std::invalid_argument("fredholm: trapezoid copies need quadrature_m >= 8n");
        }
        times.push_back(c.time);
        nodes.push_back(circle_test_nodes(c.test, p.quadrature_m, p.panel_order));
        std::vector<double> g(nodes.back().nodes.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            g[k] = c.test.g(nodes.back().nodes[k]);
            if (!std::isfinite(g[k])) throw std::invalid_argument("fredholm: test function is not finite");
        }
        gvals.push_back(std::move(g));
        offset.push_back(offset.back() + nodes.back().nodes.size());
    }
    const ExtendedKernel kernel(p.n, times);
    const std::size_t jcount = copies.size();
    std::vector<ExtendedKernel::Block> blocks;
    for (std::size_t i = 0; i < jcount; ++i) {
        for (std::size_t j = 0; j < jcount; ++j) blocks.push_back(kernel.block(i, j));
    }
    const std::size_t size = offset.back();
    result.size = static_cast<int>(size);
    // flat (copy, node) index
    std::vector<std::size_t> copy_of(size);
    std::vector<double> x(size), sw(size), g(size);
    for (std::size_t c = 0; c < jcount; ++c) {
        for (std::size_t k = 0; k < nodes[c].nodes.size(); ++k) {
            const std::size_t a = offset[c] + k;
            copy_of[a] = c;
            x[a] = nodes[c].nodes[k];
            sw[a] = std::sqrt(nodes[c].weights[k]);
            g[a] = gvals[c][k];
        }
    }
    ComplexMatrix m(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    mapper(size, [&](std::size_t a) {
        const std::size_t ca = copy_of[a];
        for (std::size_t b = 0; b < size; ++b) {
            const std::size_t cb = copy_of[b];
            const double k = ExtendedKernel::evaluate_block(blocks[ca * jcount + cb], x[a] - x[b]);
            const double entry = sw[a] * g[a] * k * sw[b];
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = Complex(entry + (a == b ? 1.0 : 0.0), 0.0);
        }
        return 0;
    });
    const Complex det = m.partialPivLu().determinant();
    result.value = det.real();
    result.imag_residue = std::abs(det.imag());
    if (result.imag_residue > 1e-6) {
        std::ostringstream msg;
        msg << "fredholm: imaginary residue " << result.imag_residue << " indicates a discretization failure";
        throw std::runtime_error(msg.str());
    }
    return result;
}

}  // namespace

FredholmResult fredholm_expectation(const FredholmProblem& problem) {
    return fredholm_with([](std::size_t n, auto&& f) { return parallel::map_indexed(n, f); }, problem);
}

FredholmResult fredholm_expectation_serial(const FredholmProblem& problem) {
    return fredholm_with([](std::size_t n, auto&& f) { return serial::map_indexed(n, f); }, problem);
}

double microscale_limit_kernel(double mu, double tau, MicroscaleBranch branch) {
    using boost::math::quadrature::gauss_kronrod;
    if (tau < 0.0) throw std::invalid_argument("microscale_limit_kernel: tau must be >= 0");
    if (branch == MicroscaleBranch::Forward) {
        auto f = [&](double z) { return std::exp((z * z - 0.25) * tau) * std::cos(mu * z); };
        return gauss_kronrod<double, 61>::integrate(f, 0.0, 0.5, 20, 1e-14) / kPi;
    }
    if (!(tau > 0.0)) throw std::invalid_argument("microscale_limit_kernel: backward branch needs tau > 0");
    // integrand below e^{-45} beyond z_max
    const double z_max = std::sqrt(0.25 + 45.0 / tau);
    auto f = [&](double z) { return std::exp((0.25 - z * z) * tau) * std::cos(mu * z); };
    // split into pieces no longer than a few oscillations
    const double piece = std::max(0.25, std::min(z_max - 0.5, 8.0 / std::max(std::abs(mu), 1.0)));
    double acc = 0.0;
    for (double a = 0.5; a < z_max; a += piece) {
        acc += gauss_kronrod<double, 61>::integrate(f, a, std::min(a + piece, z_max), 20, 1e-14);
    }
    return acc / kPi;
}

Complex out_of_equilibrium_kernel(const std::vector<double>& x, double t, double z, double y) {
    if (!(t > 0.0)) throw std::invalid_argument("out_of_equilibrium_kernel: t must be positive");
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("out_of_equilibrium_kernel: empty start");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(std::sin(0.5 * (x[i] - x[j]))) < 0.5e-8) {
                throw std::invalid_argument("out_of_equilibrium_kernel: start angles closer than 1e-8");
            }
        }
    }
    const double deg = static_cast<double>(n - 1);
    if (deg * deg * t / 8.0 > 30.0) throw std::domain_error("out_of_equilibrium_kernel: heat time too large for double precision");
    const int ni = static_cast<int>(n);
    const HeatKernelMode mode = t < 2.0 ? HeatKernelMode::ThetaSeries : HeatKernelMode::FourierSeries;
    const Complex half_i(0.0, 0.5);
    Complex total{};
    for (std::size_t i = 0; i < n; ++i) {
        // coefficients of q^{2l - d} in prod_{j != i} (q e^{-i x_j/2} - q^{-1} e^{i x_j/2}) / 2i
        std::vector<Complex> poly{Complex(1.0, 0.0)};
        double denom = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Complex up = std::polar(1.0, -0.5 * x[j]) * -half_i;
            const Complex down = std::polar(1.0, 0.5 * x[j]) * half_i;
            std::vector<Complex> next(poly.size() + 1);
            for (std::size_t l = 0; l < poly.size(); ++l) {
                next[l + 1] += poly[l] * up;
                next[l] += poly[l] * down;
            }
            poly = std::move(next);
            denom *= std::sin(0.5 * (x[i] - x[j]));
        }
        Complex expectation{};
        for (std::size_t l = 0; l < poly.size(); ++l) {
            const double k = 2.0 * static_cast<double>(l) - deg;
            expectation += poly[l] * std::polar(std::exp(k * k * t / 8.0), 0.5 * k * y);
        }
        total += twisted_heat_kernel(x[i], z, t, ni, mode) * expectation / denom;
    }
    return total;
}

double chi_bump(double r) {
    r = std::abs(r);
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double s = r - 1.0;
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

namespace {

struct TruncatedGeometry {
    double theta;
    double inner;  // angular radius where the chord equals theta
    double outer;  // angular radius where the chord equals 2 theta
    bool whole_circle;
};

TruncatedGeometry truncated_geometry(double lambda, int n) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("truncated singularity: lambda must be >= 1");
    if (n < 1) throw std::invalid_argument("truncated singularity: n must be >= 1");
    TruncatedGeometry g;
    g.theta = lambda / n;
    g.whole_circle = 2.0 * g.theta >= 2.0;
    g.inner = g.theta >= 2.0 ? kPi : 2.0 * std::asin(std::min(1.0, 0.5 * g.theta));
    g.outer = g.whole_circle ? kPi : 2.0 * std::asin(g.theta);
    return g;
}

double truncated_value(double phi, double e, double gamma, double theta) {
    const double d = 2.0 * std::abs(std::sin(0.5 * (phi - e)));
    const double c = chi_bump(d / theta);
    const double far = std::pow(2.0 * theta, gamma);
    if (c == 0.0) return far;
    return std::pow(d, gamma) * c + far * (1.0 - c);
}

}  // namespace

CircleSymbol truncated_singularity_symbol(double e, double gamma, double lambda, int n, int k_max) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("truncated_singularity_symbol: gamma must be >= 0");
    const TruncatedGeometry geo = truncated_geometry(lambda, n);
    if (k_max < 0) k_max = 4 * n;
    const double far = std::pow(2.0 * geo.theta, gamma);
    CircleSymbol f(k_max, "truncated-singularity");
    // f - far is supported on |phi - e| < outer
    CircleTest support;
    support.arcs.emplace_back(e - geo.outer, e + geo.outer);
    support.breakpoints = {e, e - geo.inner, e + geo.inner};
    const int panels = 16 + 2 * k_max * static_cast<int>(std::ceil(geo.outer));
    const QuadratureNodes q = circle_test_nodes(support, 16 * panels, 16);
    std::vector<double> excess(q.nodes.size());
    for (std::size_t i = 0; i < q.nodes.size(); ++i) excess[i] = truncated_value(q.nodes[i], e, gamma, geo.theta) - far;
    for (int k = -k_max; k <= k_max; ++k) {
        Complex acc{};
        for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * excess[i] * std::polar(1.0, -k * q.nodes[i]);
        f.set_coeff(k, acc / kTwoPi + (k == 0 ? far : 0.0));
    }
    const double theta = geo.theta;
    f.set_evaluator([e, gamma, theta](double phi) { return Complex(truncated_value(phi, e, gamma, theta), 0.0); });
    f.add_singularity({e, gamma});
    return f;
}

CircleTest truncated_singularity_test(double e, double gamma, double lambda, int n) {
    const TruncatedGeometry geo = truncated_geometry(lambda, n);
    const double theta = geo.theta;
    const double far = std::pow(2.0 * theta, gamma);
    CircleTest t;
    t.g = [e, gamma, theta, far](double phi) { return truncated_value(phi, e, gamma, theta) / far - 1.0; };
    if (!geo.whole_circle) {
        t.arcs.emplace_back(e - geo.outer, e + geo.outer);
        t.breakpoints = {e, e - geo.inner, e + geo.inner};
    }
    return t;
}

DecouplingResult decoupling_ratio(double e1, double e2, double t1, double t2, double gamma1, double gamma2,
                                  double lambda, int n, int quadrature_m) {
    const double sep = std::max(std::abs(wrap_signed(e1 - e2)), std::abs(t1 - t2));
    if (sep < 1.0 / n) throw std::invalid_argument("decoupling_ratio: singularities closer than 1/n");
    if (quadrature_m <= 0) quadrature_m = std::max(256, 16 * n);
    const CircleTest a = truncated_singularity_test(e1, gamma1, lambda, n);
    const CircleTest b = truncated_singularity_test(e2, gamma2, lambda, n);
    auto single = [&](const CircleTest& c, double t) {
        FredholmProblem p;
        p.n = n;
        p.times = {t};
        p.tests = {c};
        p.quadrature_m = quadrature_m;
        return fredholm_expectation(p).value;
    };
    FredholmProblem joint;
    joint.n = n;
    joint.quadrature_m = quadrature_m;
    if (t1 <= t2) {
        joint.times = {t1, t2};
        joint.tests = {a, b};
    } else {
        joint.times = {t2, t1};
        joint.tests = {b, a};
    }
    DecouplingResult r;
    r.joint = fredholm_expectation(joint).value;
    r.first = single(a, t1);
    r.second = single(b, t2);
    r.ratio = r.joint / (r.first * r.second);
    return r;
}

}  // namespace ubmlab
