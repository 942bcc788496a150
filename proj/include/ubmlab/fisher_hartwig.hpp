#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

#include "ubmlab/common.hpp"
#include "ubmlab/spectral.hpp"

namespace ubmlab {

/// e^{V(theta)} prod_j |e^{i theta} - e^{i angle_j}|^{2 alpha_j}.
struct FHSymbol {
    struct Factor {
        double angle = 0.0;
        double alpha = 0.0;
    };
    std::vector<Factor> factors;
    CircleSymbol smooth{0};  // V, real

    void validate() const;
    [[nodiscard]] double evaluate(double theta) const;
};

/// Coefficients of |e^{i theta} - 1|^{2 alpha}, m = 0..m_max (even in m).
std::vector<double> fh_factor_coefficients(double alpha, int m_max);

class TruncationLossError : public std::runtime_error {
public:
    TruncationLossError(const std::string& what, double loss) : std::runtime_error(what), loss_(loss) {}
    [[nodiscard]] double loss() const noexcept { return loss_; }

private:
    double loss_;
};

struct FHCoefficientOptions {
    int internal_range = 65536;  // convolution range for the first singular factor
    double max_loss = 1e-8;
};

/// Fourier coefficients of an FH symbol for |k| <= k_max. The estimated
/// convolution truncation loss is returned through `loss`; above
/// options.max_loss a TruncationLossError is thrown.
CircleSymbol fh_symbol_coefficients(const FHSymbol& symbol, int k_max, const FHCoefficientOptions& options = {},
                                    double* loss = nullptr);

struct ToeplitzResult {
    Complex value;
    double log_abs = 0.0;
    double condition = 0.0;
    bool unreliable = false;
};

inline constexpr double kToeplitzConditionLimit = 1e12;

/// det(f_{j-k})_{j,k<n}.
ToeplitzResult toeplitz_determinant(const CircleSymbol& coeffs, int n);
ToeplitzResult toeplitz_determinant_serial(const CircleSymbol& coeffs, int n);
ComplexMatrix toeplitz_matrix(const CircleSymbol& coeffs, int n);
ComplexMatrix toeplitz_matrix_serial(const CircleSymbol& coeffs, int n);

/// log of the Fisher-Hartwig asymptotic prediction for D_n.
double log_widom_asymptotic(const FHSymbol& symbol, int n);
double widom_asymptotic(const FHSymbol& symbol, int n);

struct InsertionConfig {
    struct Singular {
        double t = 0.0;
        double theta = 0.0;
        double gamma = 0.0;
    };
    struct Smooth {
        double s = 0.0;
        CircleSymbol f;
    };
    std::vector<Singular> singularities;
    std::vector<Smooth> smooth;
    double max_gamma = 2.0 * 1.4142135623730951;

    void validate() const;
};

/// log of the multi-time right-hand side.
double log_multitime_fh_rhs(const InsertionConfig& config, int n);
double multitime_fh_rhs(const InsertionConfig& config, int n);

/// -1/2 log|1 - e^{-tau} e^{iu}|: the Poisson-smoothed circle Green function.
double poisson_green(double u, double tau);

struct SmoothTag {
    double time = 0.0;
    CircleSymbol f;
};
struct LogTag {
    double time = 0.0;
    double angle = 0.0;
    double gamma = 0.0;
};
using CovarianceTag = std::variant<SmoothTag, LogTag>;

double covariance_functional(const CovarianceTag& a, const CovarianceTag& b);

/// Exact Cov(sum f(z_k(0)), sum g(z_k(t))) for the stationary dynamics.
double exact_linear_covariance(int n, double t, const CircleSymbol& f, const CircleSymbol& g);

}  // namespace ubmlab
