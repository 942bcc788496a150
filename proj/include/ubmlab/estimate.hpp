#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ubmlab/seed_tree.hpp"

namespace ubmlab {

enum class VerdictKind { Pass, Fail, Flag };

const char* to_string(VerdictKind kind) noexcept;

struct Verdict {
    VerdictKind kind = VerdictKind::Flag;
    std::string rule;
};

/// Monte Carlo result with optional comparison against a prediction.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_samples = 0;
    std::string seed_lineage;
    std::optional<double> prediction;
    std::optional<Verdict> verdict;
    std::optional<double> effective_sample_size;

    /// Attach a prediction and the |value - prediction| <= k * stderr verdict.
    Estimate& judge(double predicted, double k_sigma = 3.0);
    /// Attach a prediction and an explicit absolute tolerance verdict.
    Estimate& judge_tolerance(double predicted, double tolerance);
};

/// A sample whose observable was not finite, or whose simulation failed.
class SampleError : public std::runtime_error {
public:
    SampleError(const std::string& what, std::string seed_path)
        : std::runtime_error(what + " [seed " + seed_path + "]"), seed_path_(std::move(seed_path)) {}
    [[nodiscard]] const std::string& seed_path() const noexcept { return seed_path_; }

private:
    std::string seed_path_;
};

/// Self-normalized importance sampling degenerated (too few effective samples).
class WeightDegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-sample rows of observables, filled in parallel by sample index.
struct SampleTable {
    std::size_t n_samples = 0;
    std::size_t n_columns = 0;
    std::vector<double> data;  // row-major
    std::string seed_lineage;

    [[nodiscard]] double at(std::size_t row, std::size_t col) const { return data[row * n_columns + col]; }
    [[nodiscard]] std::vector<double> column(std::size_t col) const;
};

using SampleFn = std::function<std::vector<double>(const SeedTree&)>;

/// Run `sample` on seed.child("sample", i) for i < n. Parallel over samples.
SampleTable collect_samples(const SeedTree& seed, std::size_t n, std::size_t n_columns, const SampleFn& sample);
SampleTable collect_samples_serial(const SeedTree& seed, std::size_t n, std::size_t n_columns, const SampleFn& sample);

/// Mean and standard error (sample std / sqrt n), tree-summed.
Estimate mean_estimate(std::span<const double> values, std::string seed_lineage = {});

/// Cov(X, Y) with an influence-function standard error.
Estimate covariance_estimate(std::span<const double> x, std::span<const double> y, std::string seed_lineage = {});

/// E[X Y] / (E[X] E[Y]) with a delta-method standard error.
Estimate ratio_of_means_estimate(std::span<const double> xy, std::span<const double> x, std::span<const double> y,
                                 std::string seed_lineage = {});

/// Self-normalized importance sampling: sum w O / sum w with w = exp(log_w).
/// Throws WeightDegeneracyError when the effective sample size is below `min_ess`.
Estimate self_normalized_estimate(std::span<const double> log_weights, std::span<const double> values,
                                  double min_ess = 50.0, std::string seed_lineage = {});

/// Monte Carlo mean of a scalar observable on independent seeded samples.
Estimate mc_estimate(const std::function<double(const SeedTree&)>& sample, std::size_t n_samples, const SeedTree& seed);
Estimate mc_estimate_serial(const std::function<double(const SeedTree&)>& sample, std::size_t n_samples,
                            const SeedTree& seed);

/// Sampler/observable split form: observable(sampler(seed)).
template <class Sampler, class Observable>
Estimate mc_estimate(Sampler&& sampler, Observable&& observable, std::size_t n_samples, const SeedTree& seed) {
    return mc_estimate([&](const SeedTree& s) { return static_cast<double>(observable(sampler(s))); }, n_samples,
                       seed);
}

}  // namespace ubmlab
