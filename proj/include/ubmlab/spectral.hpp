#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ubmlab/common.hpp"
#include "ubmlab/estimate.hpp"
#include "ubmlab/unitary_dynamics.hpp"

namespace ubmlab {

struct SingularityMark {
    double angle = 0.0;
    double exponent = 0.0;
};

/// A function on the unit circle carried by its Fourier coefficients
/// f_k = (1/2pi) int f(e^{i theta}) e^{-ik theta} d theta, |k| <= k_max.
class CircleSymbol {
public:
    using Evaluator = std::function<Complex(double)>;

    CircleSymbol() : CircleSymbol(0) {}
    explicit CircleSymbol(int k_max, std::string kind = "fourier");

    [[nodiscard]] int k_max() const noexcept { return k_max_; }
    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }
    void set_kind(std::string kind) { kind_ = std::move(kind); }

    /// Zero outside the stored range.
    [[nodiscard]] Complex coeff(int k) const noexcept {
        return (k < -k_max_ || k > k_max_) ? Complex{} : coeffs_[static_cast<std::size_t>(k + k_max_)];
    }
    void set_coeff(int k, Complex value);
    [[nodiscard]] const std::vector<Complex>& coefficients() const noexcept { return coeffs_; }

    [[nodiscard]] bool has_evaluator() const noexcept { return static_cast<bool>(evaluator_); }
    void set_evaluator(Evaluator f) { evaluator_ = std::move(f); }
    [[nodiscard]] const Evaluator& evaluator() const noexcept { return evaluator_; }

    [[nodiscard]] const std::vector<SingularityMark>& singularities() const noexcept { return marks_; }
    void add_singularity(SingularityMark mark) { marks_.push_back(mark); }

    /// Closed form when present, otherwise the truncated Fourier sum.
    [[nodiscard]] Complex evaluate(double theta) const;
    [[nodiscard]] Complex evaluate_series(double theta) const;
    [[nodiscard]] double evaluate_real(double theta) const { return evaluate(theta).real(); }

    /// Tr f(U) = sum_k f(e^{i theta_k}) (real part).
    [[nodiscard]] double trace(const std::vector<double>& phases) const;

    /// f_{-k} = conj(f_k) for every stored k.
    [[nodiscard]] bool is_real(double tol = 1e-12) const;

    /// sum |k| |f_k|^2.
    [[nodiscard]] double h_half_norm_squared() const;

private:
    int k_max_;
    std::string kind_;
    std::vector<Complex> coeffs_;
    Evaluator evaluator_;
    std::vector<SingularityMark> marks_;
};

/// amplitude * cos(m theta), with evaluator.
CircleSymbol cos_symbol(int m, double amplitude = 1.0);
/// amplitude * sin(m theta), with evaluator.
CircleSymbol sin_symbol(int m, double amplitude = 1.0);
CircleSymbol constant_symbol(double c);
/// log|e^{i theta} - e^{i angle}| from its analytic coefficients -1/(2|k|) e^{-ik angle}.
CircleSymbol log_singularity_symbol(double angle, int k_max);

/// Periodic trapezoid coefficients. Refuses evaluators that carry singularity marks.
CircleSymbol fourier_coefficients(const CircleSymbol::Evaluator& f, int k_max, int quadrature_points,
                                  const std::vector<SingularityMark>& marks = {});

/// (f, P_t g)_H = sum_k |k| f_k g_{-k} e^{-|k| t}.
double h_half_inner(const CircleSymbol& f, const CircleSymbol& g, double t = 0.0);

/// Coefficientwise f_k e^{-|k| t}.
CircleSymbol poisson_smooth(const CircleSymbol& f, double t);

/// Truncated convolution of coefficients, result kept to |k| <= k_max.
CircleSymbol symbol_product(const CircleSymbol& f, const CircleSymbol& g, int k_max);
CircleSymbol symbol_sum(const CircleSymbol& f, const CircleSymbol& g);
CircleSymbol symbol_scale(const CircleSymbol& f, Complex c);

void write_symbol_csv(const CircleSymbol& f, std::ostream& out);
CircleSymbol read_symbol_csv(std::istream& in);

struct FieldSample {
    std::vector<double> times;
    std::vector<double> angles;
    std::vector<double> values;  // times.size() x angles.size(), row-major
    std::vector<char> clipped;
    std::string source;

    [[nodiscard]] double at(std::size_t ti, std::size_t ai) const { return values[ti * angles.size() + ai]; }
    [[nodiscard]] bool any_clipped() const;
};

inline constexpr double kLogClip = 1e-12;

/// h(theta) = sum_k log|e^{i theta_k} - e^{i theta}|; sets `clipped` when a
/// factor falls below 1e-12 (that factor contributes log 1e-12).
double log_char_poly(const std::vector<double>& phases, double theta, bool* clipped = nullptr);

/// sum_k log|1 - e^{-eps} e^{i(theta_k - theta)}|; eps = 0 is log_char_poly.
double mollified_log_char_poly(const std::vector<double>& phases, double theta, double eps);

FieldSample field_from_trajectory(const PhaseTrajectory& traj, const std::vector<double>& angles);
FieldSample field_from_trajectory_serial(const PhaseTrajectory& traj, const std::vector<double>& angles);

void write_field_csv(const FieldSample& field, std::ostream& out);

/// pi (#{k : theta_k mod 2pi in (0, theta]} - n theta / 2pi).
double counting_statistic(const std::vector<double>& phases, double theta);

/// sum_k Im log(1 - e^{i(theta - theta_k)}), principal branch.
double im_log_char_poly(const std::vector<double>& phases, double theta);

/// Tr(((z + U)/(z - U)) A), A = Id/n by default, via an LU solve.
Complex borel_transform(const UnitaryMatrix& u, Complex z, const std::optional<ComplexMatrix>& a = std::nullopt);

/// z e^t outside the circle, z e^{-t} inside.
Complex characteristic_flow(Complex z, double t);

struct BiasInsertion {
    double time = 0.0;
    CircleSymbol symbol;
};

struct BiasSpec {
    std::vector<BiasInsertion> insertions;

    /// Throws if some symbol has a non-finite H^{1/2} norm.
    void validate() const;
    /// log w = sum_j Tr f_j(U_{t_j}) on a trajectory recorded at the insertion times.
    [[nodiscard]] double log_weight(const PhaseTrajectory& traj) const;
};

/// Index of `t` in traj.times (tolerance 1e-9), or throws.
std::size_t time_index(const PhaseTrajectory& traj, double t);

/// E[O w] / E[w] with w = exp(sum_j Tr f_j(U_{t_j})), self-normalized.
Estimate reweighted_expectation(const std::vector<PhaseTrajectory>& samples, const BiasSpec& bias,
                                const std::function<double(const PhaseTrajectory&)>& observable,
                                double min_ess = 50.0);

/// sum_j sum_k e^{-|k||t_j - r|} |k| (f_j)_{-k} h_k.
double loop_equation_rhs(const BiasSpec& bias, const CircleSymbol& h, double r);

}  // namespace ubmlab
