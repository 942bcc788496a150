#include "ubmlab/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "ubmlab/chaos.hpp"
#include "ubmlab/determinantal.hpp"
#include "ubmlab/estimate.hpp"
#include "ubmlab/fisher_hartwig.hpp"
#include "ubmlab/parallel.hpp"
#include "ubmlab/special_functions.hpp"
#include "ubmlab/spectral.hpp"
#include "ubmlab/unitary_dynamics.hpp"

namespace ubmlab {

using nlohmann::json;

namespace {

enum class ParamType { Integer, Number, Array, String };

struct ParamSpec {
    std::string name;
    ParamType type;
    json fallback;
};

struct KindSpec {
    bool stochastic;
    std::vector<ParamSpec> params;
};

const std::map<std::string, KindSpec>& kind_specs() {
    static const std::map<std::string, KindSpec> specs = {
        {"cov-check",
         {true,
          {{"n", ParamType::Integer, 16},
           {"t", ParamType::Number, 0.5},
           {"mode_f", ParamType::Integer, 1},
           {"mode_g", ParamType::Integer, 1}}}},
        {"fh-static", {false, {{"n", ParamType::Integer, 32}, {"gamma", ParamType::Number, 1.0}}}},
        {"fh-multitime",
         {true,
          {{"n", ParamType::Integer, 24},
           {"singularities", ParamType::Array, json::array({{{"t", 0.4}, {"theta", 0.0}, {"gamma", 1.0}}})},
           {"smooth", ParamType::Array, json::array({{{"s", 0.0}, {"amplitude", 0.4}, {"mode", 1}}})}}}},
        {"fredholm",
         {true,
          {{"n", ParamType::Integer, 8},
           {"times", ParamType::Array, json::array({0.0, 0.2})},
           {"arcs", ParamType::Array, json::array({json::array({0.0, 1.5, -0.5}), json::array({1.0, 2.5, -0.5})})},
           {"quadrature_m", ParamType::Integer, 0}}}},
        {"loop-eqn",
         {true,
          {{"n", ParamType::Integer, 24},
           {"bias_amplitude", ParamType::Number, 0.4},
           {"bias_mode", ParamType::Integer, 1},
           {"bias_time", ParamType::Number, 0.0},
           {"observable_time", ParamType::Number, 0.3},
           {"observable_mode", ParamType::Integer, 1}}}},
        {"gmc",
         {true,
          {{"n", ParamType::Integer, 48},
           {"gamma", ParamType::Number, 1.0},
           {"epsilon", ParamType::Number, -1.0},
           {"k_max", ParamType::Integer, 0},
           {"t_extent", ParamType::Number, 0.5},
           {"theta_extent", ParamType::Number, 0.5},
           {"cells", ParamType::Integer, 4},
           {"sub", ParamType::Integer, 4},
           {"second_moment_tolerance", ParamType::Number, 0.15}}}},
        {"decoupling",
         {false,
          {{"n", ParamType::Integer, 32},
           {"lambda", ParamType::Number, 2.0},
           {"gamma", ParamType::Number, 1.0},
           {"t1", ParamType::Number, 0.0},
           {"t2", ParamType::Number, 0.0},
           {"separations", ParamType::Array, json::array()},
           {"tolerance", ParamType::Number, 0.1}}}},
        {"rigidity",
         {true,
          {{"n", ParamType::Integer, 32},
           {"t_end", ParamType::Number, 1.0},
           {"records", ParamType::Integer, 10},
           {"beta", ParamType::Number, 2.0}}}},
    };
    return specs;
}

bool type_matches(const json& v, ParamType t) {
    switch (t) {
        case ParamType::Integer: return v.is_number_integer();
        case ParamType::Number: return v.is_number();
        case ParamType::Array: return v.is_array();
        case ParamType::String: return v.is_string();
    }
    return false;
}

int get_int(const json& p, const char* k) { return p.at(k).get<int>(); }
double get_num(const json& p, const char* k) { return p.at(k).get<double>(); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

// Runs `body`; a sample or simulation failure becomes a failed row that
// carries the message (and seed path) instead of aborting the report.
void guarded_row(Report& report, const std::string& label, const std::function<void()>& body) {
    try {
        body();
    } catch (const SampleError& e) {
        auto& row = report.add_row(label);
        row.verdict = Verdict{VerdictKind::Fail, std::string("error: ") + e.what()};
    } catch (const CollisionError& e) {
        auto& row = report.add_row(label);
        row.verdict = Verdict{VerdictKind::Fail, std::string("error: ") + e.what()};
    } catch (const WeightDegeneracyError& e) {
        auto& row = report.add_row(label);
        row.verdict = Verdict{VerdictKind::Fail, std::string("error: ") + e.what()};
    }
}

std::vector<double> unique_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::size_t index_of(const std::vector<double>& times, double t) {
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
}

void run_cov_check(const ExperimentConfig& c, const SeedTree& seed, Report& report) {
    const int n = get_int(c.params, "n");
    const double t = get_num(c.params, "t");
    const CircleSymbol f = cos_symbol(get_int(c.params, "mode_f"));
    const CircleSymbol g = cos_symbol(get_int(c.params, "mode_g"));
    guarded_row(report, "covariance", [&] {
        const auto table = collect_samples(seed, c.n_samples, 2, [&](const SeedTree& s) {
            const auto traj = stationary_phase_path(n, {0.0, t}, s);
            return std::vector<double>{f.trace(traj.phases[0]), g.trace(traj.phases[1])};
        });
        const auto x = table.column(0);
        const auto y = table.column(1);
        Estimate e = covariance_estimate(x, y, table.seed_lineage);
        e.judge(exact_linear_covariance(n, t, f, g));
        report.rows.push_back(estimate_row("covariance", e));
    });
}

void run_fh_static(const ExperimentConfig& c, Report& report) {
    const int n = get_int(c.params, "n");
    const double gamma = get_num(c.params, "gamma");
    require(gamma > -1.0, "fh-static: gamma must exceed -1");
    FHSymbol symbol;
    symbol.factors = {{0.0, 0.5 * gamma}};
    const CircleSymbol coeffs = fh_symbol_coefficients(symbol, n);
    const ToeplitzResult det = toeplitz_determinant(coeffs, n);
    const double log_ks = log_keating_snaith_moment(n, gamma);
    const double rel = std::abs(std::expm1(det.log_abs - log_ks));

    auto& heine = report.add_row("heine");
    heine.values["toeplitz"] = det.value.real();
    heine.values["keating_snaith"] = std::exp(log_ks);
    heine.values["relative_error"] = rel;
    heine.values["condition"] = det.condition;
    const bool ok = rel <= 1e-8 && !det.unreliable && det.value.real() > 0.0;
    heine.verdict = Verdict{ok ? VerdictKind::Pass : VerdictKind::Fail, "relative_error<=1e-08"};

    auto& asym = report.add_row("asymptotic-ratio");
    const double log_pred = 0.25 * gamma * gamma * std::log(static_cast<double>(n)) + log_fh_constant(gamma);
    asym.values["exact"] = std::exp(log_ks);
    asym.values["asymptotic"] = std::exp(log_pred);
    asym.values["ratio"] = std::exp(log_ks - log_pred);
}

void run_fh_multitime(const ExperimentConfig& c, const SeedTree& seed, Report& report) {
    const int n = get_int(c.params, "n");
    InsertionConfig config;
    for (const auto& s : c.params.at("singularities"))
        config.singularities.push_back(
            {s.at("t").get<double>(), s.at("theta").get<double>(), s.at("gamma").get<double>()});
    for (const auto& s : c.params.at("smooth"))
        config.smooth.push_back({s.at("s").get<double>(), cos_symbol(s.at("mode").get<int>(), s.at("amplitude").get<double>())});
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("fh-multitime: ") + e.what());
    }
    std::vector<double> all;
    for (const auto& s : config.singularities) all.push_back(s.t);
    for (const auto& s : config.smooth) all.push_back(s.s);
    const auto times = unique_sorted(all);
    require(times.front() >= 0.0, "fh-multitime: times must be >= 0");

    guarded_row(report, "multitime", [&] {
        Estimate e = mc_estimate(
            [&](const SeedTree& s) {
                const auto traj = stationary_phase_path(n, times, s);
                double log_v = 0.0;
                for (const auto& z : config.singularities)
                    log_v += z.gamma * log_char_poly(traj.phases[index_of(times, z.t)], z.theta);
                for (const auto& b : config.smooth) log_v += b.f.trace(traj.phases[index_of(times, b.s)]);
                return std::exp(log_v);
            },
            c.n_samples, seed);
        e.judge(multitime_fh_rhs(config, n));
        report.rows.push_back(estimate_row("multitime", e));
    });
}

void run_fredholm(const ExperimentConfig& c, const SeedTree& seed, Report& report) {
    FredholmProblem p;
    p.n = get_int(c.params, "n");
    p.quadrature_m = get_int(c.params, "quadrature_m");
    if (p.quadrature_m <= 0) p.quadrature_m = std::max(256, 16 * p.n);
    for (const auto& t : c.params.at("times")) p.times.push_back(t.get<double>());
    const auto& arcs = c.params.at("arcs");
    require(arcs.size() == p.times.size(), "fredholm: need one arc [lo, hi, value] per time");
    std::vector<std::array<double, 3>> arc_values;
    for (const auto& a : arcs) {
        require(a.is_array() && a.size() == 3, "fredholm: arcs entries are [lo, hi, value]");
        const std::array<double, 3> v{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
        require(v[1] > v[0] && v[1] - v[0] <= kTwoPi, "fredholm: arc must satisfy lo < hi <= lo + 2pi");
        require(v[2] > -1.0, "fredholm: test value must exceed -1");
        arc_values.push_back(v);
        p.tests.push_back(arc_indicator_test(v[0], v[1], v[2]));
    }
    require(std::is_sorted(p.times.begin(), p.times.end()) && !p.times.empty() && p.times.front() >= 0.0,
            "fredholm: times must be non-decreasing and >= 0");

    const FredholmResult det = fredholm_expectation(p);
    auto& drow = report.add_row("fredholm-determinant");
    drow.values["value"] = det.value;
    drow.values["imag_residue"] = det.imag_residue;
    drow.values["m"] = det.m;

    const auto times = unique_sorted(p.times);
    guarded_row(report, "fredholm-vs-mc", [&] {
        Estimate e = mc_estimate(
            [&](const SeedTree& s) {
                const auto traj = stationary_phase_path(p.n, times, s);
                double prod = 1.0;
                for (std::size_t j = 0; j < p.times.size(); ++j) {
                    const auto& phases = traj.phases[index_of(times, p.times[j])];
                    for (double th : phases) prod *= 1.0 + p.tests[j].g(wrap_angle(th));
                }
                return prod;
            },
            c.n_samples, seed);
        e.judge(det.value);
        report.rows.push_back(estimate_row("fredholm-vs-mc", e));
    });
}

void run_loop_eqn(const ExperimentConfig& c, const SeedTree& seed, Report& report) {
    const int n = get_int(c.params, "n");
    const double bias_time = get_num(c.params, "bias_time");
    const double obs_time = get_num(c.params, "observable_time");
    require(bias_time >= 0.0 && obs_time >= 0.0, "loop-eqn: times must be >= 0");
    BiasSpec bias;
    bias.insertions.push_back({bias_time, cos_symbol(get_int(c.params, "bias_mode"), get_num(c.params, "bias_amplitude"))});
    const int obs_mode = get_int(c.params, "observable_mode");
    require(obs_mode >= 1, "loop-eqn: observable_mode must be >= 1");
    const CircleSymbol h = cos_symbol(obs_mode);
    const auto times = unique_sorted({bias_time, obs_time});

    guarded_row(report, "loop-equation", [&] {
        auto paths = parallel::map_indexed(c.n_samples, [&](std::size_t i) {
            const SeedTree s = seed.child("sample", i);
            try {
                return stationary_phase_path(n, times, s);
            } catch (const CollisionError& e) {
                throw SampleError(e.what(), s.path_string());
            }
        });
        const std::size_t oi = index_of(times, obs_time);
        Estimate e = reweighted_expectation(paths, bias, [&](const PhaseTrajectory& traj) {
            return h.trace(traj.phases[oi]);
        });
        e.seed_lineage = seed.path_string();
        // unbiased stationary mean of Tr cos(k theta) vanishes for 1 <= k
        e.judge(loop_equation_rhs(bias, h, obs_time));
        report.rows.push_back(estimate_row("loop-equation", e));
    });
}

void run_gmc(const ExperimentConfig& c, const SeedTree& seed, Report& report) {
    const int n = get_int(c.params, "n");
    const double gamma = get_num(c.params, "gamma");
    double eps = get_num(c.params, "epsilon");
    if (eps < 0.0) eps = 4.0 / n;
    int k_max = get_int(c.params, "k_max");
    if (k_max <= 0) k_max = n;
    require(gamma >= 0.0 && gamma < kGmcGammaLimit, "gmc: gamma must lie in [0, 2 sqrt 2)");

    CylinderGrid grid;
    grid.t_lo = 0.0;
    grid.t_hi = get_num(c.params, "t_extent");
    grid.theta_lo = 0.0;
    grid.theta_hi = get_num(c.params, "theta_extent");
    grid.nt = grid.ntheta = get_int(c.params, "cells");
    grid.sub = get_int(c.params, "sub");
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("gmc: ") + e.what());
    }
    const bool quantitative = gamma < 2.0;
    const double area = grid.area();
    const double tol = get_num(c.params, "second_moment_tolerance");

    GmcOptions matrix_opts;
    matrix_opts.log_normalizer = gamma == 0.0 ? 0.0 : log_matrix_normalizer(n, gamma, eps);
    const std::optional<double> predicted_m2 =
        quantitative ? std::optional<double>(gmc_second_moment_prediction({0.0, grid.t_hi, 0.0, grid.theta_hi}, gamma, eps))
                     : std::nullopt;

    auto run_kind = [&](FieldKind kind) {
        const std::string name = to_string(kind);
        guarded_row(report, name, [&] {
            const auto table = collect_samples(seed.child(name), c.n_samples, 2, [&](const SeedTree& s) {
                CylinderField field;
                ChaosMeasure mu;
                if (kind == FieldKind::MatrixBorn) {
                    try {
                        field = sample_matrix_born_field(n, grid, s, eps);
                    } catch (const CollisionError& e) {
                        throw SampleError(e.what(), s.path_string());
                    }
                    mu = gmc_measure(field, gamma, matrix_opts);
                } else {
                    mu = gmc_measure(sample_gaussian_field(k_max, grid, s, eps), gamma);
                }
                const double m = mu.total_mass();
                return std::vector<double>{m, m * m};
            });
            const auto mass = table.column(0);
            const auto sq = table.column(1);
            Estimate first = mean_estimate(mass, table.seed_lineage);
            Estimate second = mean_estimate(sq, table.seed_lineage);
            if (quantitative) {
                first.judge(area);
                second.judge_tolerance(*predicted_m2, tol * *predicted_m2);
            }
            auto r1 = estimate_row(name + "/mass", first);
            auto r2 = estimate_row(name + "/second-moment", second);
            for (auto* r : {&r1, &r2}) {
                r->values["gamma"] = gamma;
                r->values["n"] = n;
                r->values["epsilon"] = eps;
                if (!quantitative) r->verdict.reset();
            }
            report.rows.push_back(std::move(r1));
            report.rows.push_back(std::move(r2));
        });
    };
    run_kind(FieldKind::MatrixBorn);
    run_kind(FieldKind::GaussianReference);
    if (!quantitative) report.inputs["tag"] = "no-quantitative-acceptance";
}

void run_decoupling(const ExperimentConfig& c, Report& report) {
    const int n = get_int(c.params, "n");
    const double lambda = get_num(c.params, "lambda");
    const double gamma = get_num(c.params, "gamma");
    const double t1 = get_num(c.params, "t1");
    const double t2 = get_num(c.params, "t2");
    const double tol = get_num(c.params, "tolerance");
    std::vector<double> seps;
    for (const auto& s : c.params.at("separations")) seps.push_back(s.get<double>());
    if (seps.empty()) {
        const double lo = std::log(8.0 * lambda / n);
        const double hi = std::log(kPi);
        for (int i = 0; i < 5; ++i) seps.push_back(std::exp(lo + (hi - lo) * i / 4.0));
    }
    std::sort(seps.begin(), seps.end());
    std::vector<double> devs;
    for (double sep : seps) {
        require(sep >= 1.0 / n && sep <= kPi, "decoupling: separations must lie in [1/n, pi]");
        const DecouplingResult r = decoupling_ratio(0.0, sep, t1, t2, gamma, gamma, lambda, n);
        auto& row = report.add_row("separation=" + format_double(sep));
        row.values["separation"] = sep;
        row.values["joint"] = r.joint;
        row.values["first"] = r.first;
        row.values["second"] = r.second;
        row.values["ratio"] = r.ratio;
        devs.push_back(std::abs(r.ratio - 1.0));
    }
    auto& last = report.rows.back();
    last.verdict = Verdict{devs.back() <= tol ? VerdictKind::Pass : VerdictKind::Fail,
                           "|ratio-1|<=" + format_double(tol) + " at the largest separation"};
    bool monotone = true;
    for (std::size_t i = 1; i < devs.size(); ++i) monotone = monotone && devs[i] <= devs[i - 1];
    auto& trend = report.add_row("trend");
    trend.values["deviation_first"] = devs.front();
    trend.values["deviation_last"] = devs.back();
    trend.verdict = Verdict{monotone ? VerdictKind::Pass : VerdictKind::Fail, "|ratio-1| non-increasing in separation"};
}

void run_rigidity(const ExperimentConfig& c, const SeedTree& seed, Report& report) {
    const int n = get_int(c.params, "n");
    const double t_end = get_num(c.params, "t_end");
    const int records = get_int(c.params, "records");
    const double beta = get_num(c.params, "beta");
    require(n >= 2 && t_end > 0.0 && records >= 1 && beta > 0.0, "rigidity: need n >= 2, t_end > 0, records >= 1, beta > 0");
    const double dt = default_dt(n);
    const int every = std::max(1, static_cast<int>(std::ceil(t_end / dt / records)));
    const int steps = every * records;

    guarded_row(report, "rigidity", [&] {
        const auto table = collect_samples(seed, c.n_samples, static_cast<std::size_t>(records), [&](const SeedTree& s) {
            const auto start = cue_eigenphases(n, s.child("start"));
            PhaseTrajectory traj;
            try {
                traj = evolve_eigenphases(start, t_end / steps, steps, beta, s.child("path"), every);
            } catch (const CollisionError& e) {
                throw SampleError(e.what(), s.path_string());
            }
            const auto rows = rigidity_report(traj);
            std::vector<double> out(static_cast<std::size_t>(records));
            for (int r = 0; r < records; ++r) out[static_cast<std::size_t>(r)] = rows[static_cast<std::size_t>(r + 1)].statistic;
            return out;
        });
        const double bound = std::log(static_cast<double>(n));  // n dev / log n > log n flags
        for (int r = 0; r < records; ++r) {
            const auto col = table.column(static_cast<std::size_t>(r));
            const Estimate e = mean_estimate(col, table.seed_lineage);
            auto row = estimate_row("record=" + std::to_string(r + 1), e);
            row.values["time"] = t_end * (r + 1) / records;
            const double worst = *std::max_element(col.begin(), col.end());
            row.values["max_statistic"] = worst;
            row.verdict = Verdict{worst <= bound ? VerdictKind::Pass : VerdictKind::Flag, "n*deviation<=(log n)^2"};
            report.rows.push_back(std::move(row));
        }
    });
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : kind_specs()) out.push_back(k);
        return out;
    }();
    return kinds;
}

void validate_config(ExperimentConfig& config) {
    const auto& specs = kind_specs();
    const auto it = specs.find(config.kind);
    if (it == specs.end()) throw ConfigError("unknown experiment kind '" + config.kind + "'");
    const KindSpec& spec = it->second;
    if (!config.params.is_object()) throw ConfigError(config.kind + ": params must be an object");
    std::set<std::string> known;
    for (const auto& p : spec.params) {
        known.insert(p.name);
        if (!config.params.contains(p.name)) {
            config.params[p.name] = p.fallback;
        } else if (!type_matches(config.params[p.name], p.type)) {
            throw ConfigError(config.kind + ": parameter '" + p.name + "' has the wrong type");
        }
    }
    for (const auto& [k, v] : config.params.items()) {
        if (!known.count(k)) throw ConfigError(config.kind + ": unknown parameter '" + k + "'");
    }
    if (config.n_samples == 0) throw ConfigError(config.kind + ": n_samples must be positive");
    if (spec.stochastic && config.n_samples < 2) throw ConfigError(config.kind + ": n_samples must be >= 2");
    if (config.params.contains("n") && config.params["n"].get<int>() < 1)
        throw ConfigError(config.kind + ": n must be >= 1");
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (k != "kind" && k != "params" && k != "n_samples" && k != "seed" && k != "output")
            throw ConfigError("unknown config field '" + k + "'");
    }
    ExperimentConfig c;
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("config: 'kind' (string) is required");
    c.kind = j["kind"].get<std::string>();
    if (j.contains("params")) c.params = j["params"];
    if (!j.contains("n_samples") || !j["n_samples"].is_number_integer() || j["n_samples"].get<long long>() < 0)
        throw ConfigError("config: 'n_samples' (non-negative integer) is required");
    c.n_samples = j["n_samples"].get<std::size_t>();
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            throw ConfigError("config: 'seed' must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) throw ConfigError("config: 'output' must be a string");
        c.output = j["output"].get<std::string>();
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

Report run_experiment(ExperimentConfig config) {
    validate_config(config);
    Report report;
    report.kind = config.kind;
    report.inputs = {{"kind", config.kind},
                     {"params", config.params},
                     {"n_samples", config.n_samples},
                     {"seed", config.seed},
                     {"output", config.output.string()}};
    const SeedTree seed = SeedTree(config.seed).child(config.kind);
    const std::string& k = config.kind;
    try {
        if (k == "cov-check") run_cov_check(config, seed, report);
        else if (k == "fh-static") run_fh_static(config, report);
        else if (k == "fh-multitime") run_fh_multitime(config, seed, report);
        else if (k == "fredholm") run_fredholm(config, seed, report);
        else if (k == "loop-eqn") run_loop_eqn(config, seed, report);
        else if (k == "gmc") run_gmc(config, seed, report);
        else if (k == "decoupling") run_decoupling(config, report);
        else if (k == "rigidity") run_rigidity(config, seed, report);
    } catch (const json::exception& e) {
        throw ConfigError(k + ": malformed parameter: " + e.what());
    }
    return report;
}

std::filesystem::path emit_report(const Report& report, const std::filesystem::path& output_dir) {
    std::filesystem::create_directories(output_dir);
    const auto json_path = output_dir / (report.kind + ".json");
    write_report_json(report, json_path);
    std::ofstream csv(output_dir / (report.kind + ".csv"));
    if (!csv) throw std::runtime_error("cannot write " + (output_dir / (report.kind + ".csv")).string());
    write_report_csv(report, csv);
    return json_path;
}

}  // namespace ubmlab
