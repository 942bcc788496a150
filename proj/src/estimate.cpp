#include "ubmlab/estimate.hpp"

#include <cmath>
#include <sstream>

#include "ubmlab/parallel.hpp"

namespace ubmlab {

const char* to_string(VerdictKind kind) noexcept {
    switch (kind) {
        case VerdictKind::Pass: return "pass";
        case VerdictKind::Fail: return "fail";
        case VerdictKind::Flag: return "flag";
    }
    return "flag";
}

Estimate& Estimate::judge(double predicted, double k_sigma) {
    prediction = predicted;
    const double dev = std::abs(value - predicted);
    const bool ok = std::isfinite(dev) && dev <= k_sigma * stderr_;
    std::ostringstream rule;
    rule << "|value-prediction|<=" << k_sigma << "*stderr";
    verdict = Verdict{ok ? VerdictKind::Pass : VerdictKind::Fail, rule.str()};
    return *this;
}

Estimate& Estimate::judge_tolerance(double predicted, double tolerance) {
    prediction = predicted;
    const double dev = std::abs(value - predicted);
    const bool ok = std::isfinite(dev) && dev <= tolerance;
    std::ostringstream rule;
    rule << "|value-prediction|<=" << tolerance;
    verdict = Verdict{ok ? VerdictKind::Pass : VerdictKind::Fail, rule.str()};
    return *this;
}

std::vector<double> SampleTable::column(std::size_t col) const {
    std::vector<double> out(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) out[i] = at(i, col);
    return out;
}

namespace {

template <class Mapper>
SampleTable collect_with(Mapper&& mapper, const SeedTree& seed, std::size_t n, std::size_t n_columns,
                         const SampleFn& sample) {
    auto rows = mapper(n, [&](std::size_t i) {
        const SeedTree s = seed.child("sample", i);
        std::vector<double> row = sample(s);
        if (row.size() != n_columns) throw SampleError("sample returned wrong column count", s.path_string());
        for (double v : row) {
            if (!std::isfinite(v)) throw SampleError("non-finite observable", s.path_string());
        }
        return row;
    });
    SampleTable table;
    table.n_samples = n;
    table.n_columns = n_columns;
    table.seed_lineage = seed.path_string();
    table.data.reserve(n * n_columns);
    for (const auto& row : rows) table.data.insert(table.data.end(), row.begin(), row.end());
    return table;
}

}  // namespace

SampleTable collect_samples(const SeedTree& seed, std::size_t n, std::size_t n_columns, const SampleFn& sample) {
    return collect_with([](std::size_t m, auto&& f) { return parallel::map_indexed(m, f); }, seed, n, n_columns,
                        sample);
}

SampleTable collect_samples_serial(const SeedTree& seed, std::size_t n, std::size_t n_columns,
                                   const SampleFn& sample) {
    return collect_with([](std::size_t m, auto&& f) { return serial::map_indexed(m, f); }, seed, n, n_columns,
                        sample);
}

Estimate mean_estimate(std::span<const double> values, std::string seed_lineage) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("mean_estimate: need at least two samples");
    const double mean = parallel::tree_sum(values) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    const double var = parallel::tree_sum(sq) / static_cast<double>(n - 1);
    Estimate e;
    e.value = mean;
    e.stderr_ = std::sqrt(var / static_cast<double>(n));
    e.n_samples = n;
    e.seed_lineage = std::move(seed_lineage);
    return e;
}

Estimate covariance_estimate(std::span<const double> x, std::span<const double> y, std::string seed_lineage) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("covariance_estimate: mismatched or short inputs");
    const double mx = parallel::tree_sum(x) / static_cast<double>(n);
    const double my = parallel::tree_sum(y) / static_cast<double>(n);
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = (x[i] - mx) * (y[i] - my);
    const double cov = parallel::tree_sum(prod) / static_cast<double>(n - 1);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (prod[i] - cov) * (prod[i] - cov);
    const double var = parallel::tree_sum(dev) / static_cast<double>(n - 1);
    Estimate e;
    e.value = cov;
    e.stderr_ = std::sqrt(var / static_cast<double>(n));
    e.n_samples = n;
    e.seed_lineage = std::move(seed_lineage);
    return e;
}

Estimate ratio_of_means_estimate(std::span<const double> xy, std::span<const double> x, std::span<const double> y,
                                 std::string seed_lineage) {
    const std::size_t n = xy.size();
    if (n != x.size() || n != y.size() || n < 2) throw std::invalid_argument("ratio_of_means_estimate: bad inputs");
    const double a = parallel::tree_sum(xy) / static_cast<double>(n);
    const double b = parallel::tree_sum(x) / static_cast<double>(n);
    const double c = parallel::tree_sum(y) / static_cast<double>(n);
    const double r = a / (b * c);
    // influence function of a/(b c)
    std::vector<double> psi(n);
    for (std::size_t i = 0; i < n; ++i) {
        psi[i] = r * ((xy[i] - a) / a - (x[i] - b) / b - (y[i] - c) / c);
    }
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = psi[i] * psi[i];
    const double var = parallel::tree_sum(sq) / static_cast<double>(n - 1);
    Estimate e;
    e.value = r;
    e.stderr_ = std::sqrt(var / static_cast<double>(n));
    e.n_samples = n;
    e.seed_lineage = std::move(seed_lineage);
    return e;
}

Estimate self_normalized_estimate(std::span<const double> log_weights, std::span<const double> values,
                                  double min_ess, std::string seed_lineage) {
    const std::size_t n = values.size();
    if (n != log_weights.size() || n < 2) throw std::invalid_argument("self_normalized_estimate: bad inputs");
    double max_lw = log_weights[0];
    for (double lw : log_weights) {
        if (!std::isfinite(lw)) throw std::invalid_argument("self_normalized_estimate: non-finite log weight");
        max_lw = std::max(max_lw, lw);
    }
    std::vector<double> w(n), wo(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i])) throw std::invalid_argument("self_normalized_estimate: non-finite observable");
        w[i] = std::exp(log_weights[i] - max_lw);
        wo[i] = w[i] * values[i];
        w2[i] = w[i] * w[i];
    }
    const double sw = parallel::tree_sum(w);
    const double est = parallel::tree_sum(wo) / sw;
    const double ess = sw * sw / parallel::tree_sum(w2);
    if (ess < min_ess) {
        throw WeightDegeneracyError("effective sample size " + std::to_string(ess) + " below " +
                                    std::to_string(min_ess));
    }
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = w[i] * (values[i] - est);
        dev[i] = d * d;
    }
    Estimate e;
    e.value = est;
    e.stderr_ = std::sqrt(parallel::tree_sum(dev)) / sw;
    e.n_samples = n;
    e.seed_lineage = std::move(seed_lineage);
    e.effective_sample_size = ess;
    return e;
}

Estimate mc_estimate(const std::function<double(const SeedTree&)>& sample, std::size_t n_samples,
                     const SeedTree& seed) {
    if (n_samples < 2) throw std::invalid_argument("mc_estimate: n_samples must be >= 2");
    const SampleTable t =
        collect_samples(seed, n_samples, 1, [&](const SeedTree& s) { return std::vector<double>{sample(s)}; });
    return mean_estimate(t.data, t.seed_lineage);
}

Estimate mc_estimate_serial(const std::function<double(const SeedTree&)>& sample, std::size_t n_samples,
                            const SeedTree& seed) {
    if (n_samples < 2) throw std::invalid_argument("mc_estimate: n_samples must be >= 2");
    const SampleTable t = collect_samples_serial(seed, n_samples, 1,
                                                 [&](const SeedTree& s) { return std::vector<double>{sample(s)}; });
    return mean_estimate(t.data, t.seed_lineage);
}

}  // namespace ubmlab
