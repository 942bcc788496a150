#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ubmlab/experiment.hpp"
#include "ubmlab/parallel.hpp"
#include "ubmlab/report.hpp"
#include "ubmlab/trajectory_io.hpp"
#include "ubmlab/unitary_dynamics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ubmlab;

namespace {

enum ExitCode { kOk = 0, kVerdictFailed = 1, kUsage = 2, kRuntime = 3 };

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

// The subcommand names the kind; a "kind" field in the file must agree.
json with_kind(json j, const std::string& kind) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("kind") && j["kind"] != kind)
        throw ConfigError("config kind '" + j["kind"].dump() + "' does not match subcommand '" + kind + "'");
    j["kind"] = kind;
    return j;
}

void apply_overrides(json& j, const CommonOptions& o) {
    if (o.seed) j["seed"] = *o.seed;
    if (o.out) j["output"] = *o.out;
}

// Settings shared by the sample and evolve subcommands, validated like an
// experiment config: {"params": {...}, "n_samples": N, "seed": S, "output": dir}.
struct PathConfig {
    json params;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    fs::path output = ".";
};

bool same_type(const json& value, const json& fallback) {
    if (fallback.is_number_integer()) return value.is_number_integer();
    if (fallback.is_number()) return value.is_number();
    return value.type() == fallback.type();
}

PathConfig parse_path_config(const json& j, const std::string& kind, const json& defaults) {
    for (const auto& [k, v] : j.items()) {
        if (k != "kind" && k != "params" && k != "n_samples" && k != "seed" && k != "output")
            throw ConfigError("unknown config field '" + k + "'");
    }
    PathConfig c;
    c.params = defaults;
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw ConfigError(kind + ": params must be an object");
        for (const auto& [k, v] : j["params"].items()) {
            if (!defaults.contains(k)) throw ConfigError(kind + ": unknown parameter '" + k + "'");
            if (!same_type(v, defaults[k]))
                throw ConfigError(kind + ": parameter '" + k + "' has the wrong type");
            c.params[k] = v;
        }
    }
    if (!j.contains("n_samples") || !j["n_samples"].is_number_integer() || j["n_samples"].get<long long>() <= 0)
        throw ConfigError(kind + ": n_samples must be a positive integer");
    c.n_samples = j["n_samples"].get<std::size_t>();
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw ConfigError(kind + ": seed must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) throw ConfigError(kind + ": output must be a string");
        c.output = j["output"].get<std::string>();
    }
    if (c.params.at("n").get<int>() < 1) throw ConfigError(kind + ": n must be >= 1");
    return c;
}

int run_sample(const CommonOptions& o) {
    json j = with_kind(read_json(o.config), "sample");
    apply_overrides(j, o);
    const PathConfig c = parse_path_config(j, "sample", json{{"n", 8}});
    const int n = c.params["n"].get<int>();
    const SeedTree seed = SeedTree(c.seed).child("sample");
    const auto rows = parallel::map_indexed(c.n_samples, [&](std::size_t i) { return cue_eigenphases(n, seed.child("sample", i)); });
    fs::create_directories(c.output);
    const fs::path path = c.output / "sample.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# n=" << n << " ensemble=cue seed=" << c.seed << "\n";
    out << "sample";
    for (int k = 1; k <= n; ++k) out << ",phase_" << k;
    out << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << i;
        for (double p : rows[i]) out << ',' << format_double(p);
        out << "\n";
    }
    std::cout << "wrote " << path.string() << " (" << rows.size() << " samples)\n";
    return kOk;
}

int run_evolve(const CommonOptions& o) {
    json j = with_kind(read_json(o.config), "evolve");
    apply_overrides(j, o);
    const PathConfig c =
        parse_path_config(j, "evolve", json{{"n", 8}, {"beta", 2.0}, {"t_end", 1.0}, {"dt", 0.0}, {"records", 10}});
    const int n = c.params["n"].get<int>();
    const double beta = c.params["beta"].get<double>();
    const double t_end = c.params["t_end"].get<double>();
    const int records = c.params["records"].get<int>();
    double dt = c.params["dt"].get<double>();
    if (!(beta > 0.0) || !(t_end > 0.0) || records < 1 || dt < 0.0)
        throw ConfigError("evolve: need beta > 0, t_end > 0, records >= 1, dt >= 0");
    if (dt == 0.0) dt = default_dt(n);
    const int every = std::max(1, static_cast<int>(std::ceil(t_end / dt / records)));
    const int steps = every * records;

    const SeedTree seed = SeedTree(c.seed).child("evolve");
    fs::create_directories(c.output);
    int failures = 0;
    for (std::size_t i = 0; i < c.n_samples; ++i) {
        const SeedTree s = seed.child("sample", i);
        const fs::path path = c.output / ("trajectory_" + std::to_string(i) + ".csv");
        try {
            const auto traj = evolve_eigenphases(cue_eigenphases(n, s.child("start")), t_end / steps, steps, beta, s.child("path"), every);
            write_trajectory_csv(traj, path.string());
            std::cout << "wrote " << path.string() << "\n";
        } catch (const CollisionError& e) {
            ++failures;
            std::cerr << "trajectory " << i << " failed: " << e.what() << " [seed " << s.path_string() << "]\n";
        }
    }
    return failures ? kVerdictFailed : kOk;
}

void print_report(const Report& r, std::ostream& out) {
    out << r.kind << " (ubmlab " << r.version << ")\n";
    for (const auto& row : r.rows) {
        out << "  " << (row.verdict ? to_string(row.verdict->kind) : "info") << "  " << row.label;
        for (const auto& [k, v] : row.values) out << "  " << k << '=' << format_double(v);
        if (row.verdict && !row.verdict->rule.empty()) out << "  [" << row.verdict->rule << ']';
        out << "\n";
    }
}

int run_kind(const std::string& kind, const CommonOptions& o) {
    json j = with_kind(read_json(o.config), kind);
    apply_overrides(j, o);
    const ExperimentConfig config = parse_config(j);
    const Report report = run_experiment(config);
    const fs::path json_path = emit_report(report, config.output);
    print_report(report, std::cout);
    std::cout << "wrote " << json_path.string() << "\n";
    return report.all_pass() ? kOk : kVerdictFailed;
}

int run_report(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& e : fs::directory_iterator(in))
                if (e.path().extension() == ".json") files.push_back(e.path());
        } else {
            files.emplace_back(in);
        }
    }
    if (files.empty()) throw ConfigError("report: no report files given");
    std::sort(files.begin(), files.end());
    bool pass = true;
    for (const auto& f : files) {
        const Report r = read_report_json(f);
        print_report(r, std::cout);
        pass = pass && r.all_pass();
    }
    return pass ? kOk : kVerdictFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unitary Brownian motion laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(UBMLAB_VERSION));

    CommonOptions opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opts.seed, "master seed (overrides the config)");
        sub->add_option("--out", opts.out, "output directory (overrides the config)");
    };

    std::string chosen;
    auto* sample = app.add_subcommand("sample", "CUE eigenphase samples to CSV");
    add_common(sample);
    auto* evolve = app.add_subcommand("evolve", "Dyson eigenphase trajectories to CSV");
    add_common(evolve);
    std::vector<CLI::App*> kinds;
    for (const auto& k : experiment_kinds()) {
        auto* sub = app.add_subcommand(k, "run the " + k + " experiment and emit JSON and CSV reports");
        add_common(sub);
        kinds.push_back(sub);
    }
    std::vector<std::string> report_inputs;
    auto* report = app.add_subcommand("report", "summarize report JSON files; exit 0 only if every verdict passes");
    report->add_option("--config", report_inputs, "report JSON files or directories")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed()) return run_sample(opts);
        if (evolve->parsed()) return run_evolve(opts);
        if (report->parsed()) return run_report(report_inputs);
        for (auto* sub : kinds)
            if (sub->parsed()) return run_kind(sub->get_name(), opts);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
