#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ubmlab/experiment.hpp"
#include "ubmlab/fisher_hartwig.hpp"

using namespace ubmlab;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ubmlab_test_lab_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const ReportRow* find_row(const Report& r, const std::string& label) {
    for (const auto& row : r.rows)
        if (row.label == label) return &row;
    return nullptr;
}

}  // namespace

TEST_CASE("config validation") {
    SUBCASE("defaults are filled in") {
        const auto c = parse_config(json{{"kind", "cov-check"}, {"n_samples", 10}});
        CHECK(c.params["n"] == 16);
        CHECK(c.params["t"] == 0.5);
        CHECK(c.seed == 0);
    }
    SUBCASE("an empty sample count is rejected before execution") {
        CHECK_THROWS_AS(parse_config(json{{"kind", "cov-check"}, {"n_samples", 0}}), ConfigError);
        ExperimentConfig c;
        c.kind = "fh-static";
        c.n_samples = 0;
        CHECK_THROWS_AS(run_experiment(c), ConfigError);
    }
    SUBCASE("stochastic kinds need two samples") {
        CHECK_THROWS_AS(parse_config(json{{"kind", "fredholm"}, {"n_samples", 1}}), ConfigError);
        CHECK_NOTHROW(parse_config(json{{"kind", "fh-static"}, {"n_samples", 1}}));
    }
    SUBCASE("schema violations") {
        CHECK_THROWS_AS(parse_config(json{{"kind", "nope"}, {"n_samples", 10}}), ConfigError);
        CHECK_THROWS_AS(parse_config(json{{"kind", "gmc"}, {"n_samples", 10}, {"params", {{"gama", 1.0}}}}), ConfigError);
        CHECK_THROWS_AS(parse_config(json{{"kind", "gmc"}, {"n_samples", 10}, {"params", {{"n", 4.5}}}}), ConfigError);
        CHECK_THROWS_AS(parse_config(json{{"kind", "gmc"}, {"n_samples", 10}, {"extra", 1}}), ConfigError);
        CHECK_THROWS_AS(parse_config(json{{"kind", "gmc"}}), ConfigError);
        CHECK_THROWS_AS(parse_config(json{{"kind", "gmc"}, {"n_samples", 10}, {"seed", -3}}), ConfigError);
        CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
    }
    SUBCASE("every kind has a schema") {
        CHECK(experiment_kinds().size() == 8);
        for (const auto& k : experiment_kinds()) CHECK_NOTHROW(parse_config(json{{"kind", k}, {"n_samples", 2}}));
    }
    SUBCASE("files") {
        const auto dir = scratch("config");
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "bad.json") << "{ not json";
        CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
        std::ofstream(dir / "ok.json") << R"({"kind": "fh-static", "n_samples": 1, "seed": 5, "output": "out"})";
        const auto c = load_config(dir / "ok.json");
        CHECK(c.seed == 5);
        CHECK(c.output == "out");
        CHECK_THROWS(load_config(dir / "missing.json"));
    }
}

TEST_CASE("cov-check run is deterministic and records its inputs") {
    const auto c = parse_config(
        json{{"kind", "cov-check"}, {"n_samples", 3000}, {"seed", 11}, {"params", {{"n", 4}, {"t", 0.3}}}});
    const Report a = run_experiment(c);
    const Report b = run_experiment(c);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(a.inputs["seed"] == 11);
    CHECK(a.inputs["params"]["n"] == 4);
    CHECK(a.version == UBMLAB_VERSION);
    const ReportRow* row = find_row(a, "covariance");
    REQUIRE(row != nullptr);
    CHECK(row->values.at("predicted") == doctest::Approx(exact_linear_covariance(4, 0.3, cos_symbol(1), cos_symbol(1))));
    CHECK(row->values.at("n_samples") == 3000);
    REQUIRE(row->verdict);
    CHECK(row->verdict->kind == VerdictKind::Pass);
    CHECK(a.all_pass());

    auto other = c;
    other.seed = 12;
    CHECK(to_json(run_experiment(other)).dump() != to_json(a).dump());
}

TEST_CASE("fh-static rows") {
    const Report r = run_experiment(parse_config(json{{"kind", "fh-static"}, {"n_samples", 1}}));
    REQUIRE(!r.rows.empty());
    const ReportRow* heine = find_row(r, "heine");
    REQUIRE(heine != nullptr);
    REQUIRE(heine->verdict);
    CHECK(heine->verdict->kind == VerdictKind::Pass);
    bool has_ratio = false;
    for (const auto& row : r.rows)
        if (row.values.count("ratio")) has_ratio = true;
    CHECK(has_ratio);
}

TEST_CASE("emitted reports round trip and agree across formats") {
    const Report r = run_experiment(
        parse_config(json{{"kind", "cov-check"}, {"n_samples", 200}, {"seed", 3}, {"params", {{"n", 3}}}}));
    const auto dir = scratch("emit");
    const auto json_path = emit_report(r, dir);
    CHECK(json_path == dir / "cov-check.json");
    const Report back = read_report_json(json_path);
    CHECK(to_json(back).dump() == to_json(r).dump());

    std::ifstream csv(dir / "cov-check.csv");
    const Report from_csv = read_report_csv(csv);
    REQUIRE(from_csv.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(from_csv.rows[i].label == r.rows[i].label);
        CHECK(from_csv.rows[i].values == r.rows[i].values);
    }
    const std::string first = slurp(dir / "cov-check.csv");
    CHECK(first.rfind("# kind=cov-check", 0) == 0);
    emit_report(r, dir);
    CHECK(slurp(dir / "cov-check.csv") == first);
}

TEST_CASE("a failing sample fails only its row") {
    // beta below 1: eigenphases collide
    const auto c = parse_config(json{{"kind", "rigidity"},
                                     {"n_samples", 8},
                                     {"seed", 2},
                                     {"params", {{"n", 6}, {"beta", 0.05}, {"t_end", 2.0}, {"records", 2}}}});
    const Report r = run_experiment(c);
    REQUIRE(r.rows.size() == 1);
    REQUIRE(r.rows[0].verdict);
    CHECK(r.rows[0].verdict->kind == VerdictKind::Fail);
    // the message names the seed path of the failing sample
    CHECK(r.rows[0].verdict->rule.find("[seed 2/rigidity") != std::string::npos);
    CHECK(r.rows[0].verdict->rule.find("/sample:") != std::string::npos);
    CHECK(!r.all_pass());

    // the same experiment at beta = 2 reports one row per record
    auto ok = c;
    ok.params["beta"] = 2.0;
    const Report good = run_experiment(ok);
    CHECK(good.rows.size() == 2);
    for (const auto& row : good.rows) {
        REQUIRE(row.verdict);
        CHECK(row.verdict->kind != VerdictKind::Fail);
    }
}

TEST_CASE("small gmc run reports both field kinds") {
    const auto c = parse_config(json{{"kind", "gmc"},
                                     {"n_samples", 400},
                                     {"seed", 9},
                                     {"params", {{"n", 8}, {"cells", 2}, {"sub", 2}, {"t_extent", 0.25}, {"theta_extent", 0.5}}}});
    const Report r = run_experiment(c);
    bool matrix = false, gauss = false;
    for (const auto& row : r.rows) {
        if (row.label.find("matrix-born") != std::string::npos) matrix = true;
        if (row.label.find("gaussian-reference") != std::string::npos) gauss = true;
    }
    CHECK(matrix);
    CHECK(gauss);
}
