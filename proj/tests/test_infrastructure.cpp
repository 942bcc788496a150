#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ubmlab/estimate.hpp"
#include "ubmlab/parallel.hpp"
#include "ubmlab/report.hpp"
#include "ubmlab/seed_tree.hpp"

using namespace ubmlab;

TEST_CASE("seed tree paths are stable and order independent") {
    const SeedTree root(42);
    const SeedTree a = root.child("exp", 1).child("sample", 7);
    const SeedTree b = root.child("exp", 1).child("sample", 7);
    CHECK(a == b);
    CHECK(a.key() == b.key());
    CHECK(a.path_string() == "42/exp:1/sample:7");

    // visiting other nodes first does not perturb a stream
    (void)root.child("exp", 2).engine()();
    auto e1 = a.engine();
    auto e2 = b.engine();
    for (int i = 0; i < 100; ++i) CHECK(e1() == e2());

    CHECK(root.child("exp", 1).key() != root.child("exp", 2).key());
    CHECK(root.child("exp", 1).key() != root.child("exq", 1).key());
    CHECK(SeedTree(1).child("x").key() != SeedTree(2).child("x").key());
}

TEST_CASE("tree_sum is exact on integers and independent of the worker count") {
    std::vector<double> v(1001);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(parallel::tree_sum(v) == 1001.0 * 1002.0 / 2.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> r(5000);
    for (auto& x : r) x = nd(rng);
    const double s = parallel::tree_sum(r);
    parallel::set_worker_count(3);
    CHECK(parallel::tree_sum(r) == s);
    parallel::set_worker_count(0);
}

TEST_CASE("parallel and serial map_indexed agree and report the lowest failing index") {
    auto f = [](std::size_t i) { return static_cast<double>(i * i); };
    CHECK(parallel::map_indexed(50, f) == serial::map_indexed(50, f));
    auto bad = [](std::size_t i) -> double {
        if (i == 13 || i == 31) throw std::runtime_error("bad " + std::to_string(i));
        return 0.0;
    };
    try {
        parallel::map_indexed(40, bad);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "bad 13");
    }
}

TEST_CASE("mc_estimate on a constant observable") {
    const Estimate e = mc_estimate([](const SeedTree&) { return 2.5; }, 100, SeedTree(1));
    CHECK(e.value == 2.5);
    CHECK(e.stderr_ == 0.0);
    CHECK(e.n_samples == 100);
}

TEST_CASE("mc_estimate on a fair coin") {
    const std::size_t n = 20000;
    auto coin = [](const SeedTree& s) {
        auto rng = s.engine();
        return (rng() & 1u) ? 1.0 : -1.0;
    };
    const Estimate e = mc_estimate(coin, n, SeedTree(9));
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(e.value) <= 3.0 * sd);
    CHECK(std::abs(e.stderr_ / sd - 1.0) <= 0.2);
}

TEST_CASE("mc_estimate is bit identical across schedules") {
    auto g = [](const SeedTree& s) {
        auto rng = s.engine();
        std::normal_distribution<double> nd;
        return nd(rng);
    };
    const Estimate a = mc_estimate(g, 3000, SeedTree(5));
    const Estimate b = mc_estimate_serial(g, 3000, SeedTree(5));
    parallel::set_worker_count(4);
    const Estimate c = mc_estimate(g, 3000, SeedTree(5));
    parallel::set_worker_count(0);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.value == c.value);
}

TEST_CASE("non-finite observables abort with the seed path") {
    auto g = [](const SeedTree& s) { return s.path().back().second == 17 ? std::nan("") : 1.0; };
    try {
        mc_estimate(g, 40, SeedTree(8).child("run"));
        FAIL("expected SampleError");
    } catch (const SampleError& e) {
        CHECK(e.seed_path() == "8/run:0/sample:17");
    }
    CHECK_THROWS_AS(mc_estimate(g, 1, SeedTree(8)), std::invalid_argument);
}

TEST_CASE("covariance estimate against a bivariate normal") {
    // X = Z1, Y = rho Z1 + sqrt(1-rho^2) Z2: Cov = rho, Var((X-mx)(Y-my)) = 1 + rho^2
    const double rho = 0.6;
    const std::size_t n = 40000;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = nd(rng), z2 = nd(rng);
        x[i] = z1;
        y[i] = rho * z1 + std::sqrt(1 - rho * rho) * z2;
    }
    Estimate e = covariance_estimate(x, y);
    CHECK(std::abs(e.stderr_ / std::sqrt((1 + rho * rho) / n) - 1.0) < 0.05);
    e.judge(rho);
    CHECK(e.verdict->kind == VerdictKind::Pass);
}

TEST_CASE("self-normalized estimate reproduces an exponential tilt") {
    // Z ~ N(0,1) tilted by e^{aZ} is N(a, 1)
    const double a = 0.5;
    const std::size_t n = 40000;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    std::vector<double> lw(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = nd(rng);
        lw[i] = a * v[i];
    }
    Estimate e = self_normalized_estimate(lw, v);
    REQUIRE(e.effective_sample_size);
    // ESS/n -> e^{-a^2}
    CHECK(std::abs(*e.effective_sample_size / n - std::exp(-a * a)) < 0.02);
    e.judge(a);
    CHECK(e.verdict->kind == VerdictKind::Pass);

    std::vector<double> spiky(n, 0.0);
    spiky[0] = 100.0;
    CHECK_THROWS_AS(self_normalized_estimate(spiky, v), WeightDegeneracyError);
}

TEST_CASE("ratio of means estimate on independent factors") {
    const std::size_t n = 30000;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    std::vector<double> x(n), y(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = u(rng);
        y[i] = u(rng);
        xy[i] = x[i] * y[i];
    }
    Estimate e = ratio_of_means_estimate(xy, x, y);
    e.judge(1.0);
    CHECK(e.verdict->kind == VerdictKind::Pass);
    CHECK(e.stderr_ > 0.0);
}

TEST_CASE("verdict rules") {
    Estimate e;
    e.value = 1.0;
    e.stderr_ = 0.1;
    e.judge(1.25);
    CHECK(e.verdict->kind == VerdictKind::Pass);
    e.judge(1.35);
    CHECK(e.verdict->kind == VerdictKind::Fail);
    e.judge_tolerance(1.35, 0.4);
    CHECK(e.verdict->kind == VerdictKind::Pass);
    CHECK(e.prediction.value() == 1.35);
}

namespace {

Report sample_report() {
    Report r;
    r.kind = "demo";
    r.inputs = {{"n", 16}, {"t", 0.5}};
    auto& a = r.add_row("alpha");
    a.values["empirical"] = 0.1 + 0.2;
    a.values["stderr"] = 1.0 / 3.0;
    a.verdict = Verdict{VerdictKind::Pass, "|value-prediction|<=3*stderr"};
    auto& b = r.add_row("beta");
    b.values["ratio"] = -1.2345678901234567e-300;
    b.values["inf"] = std::numeric_limits<double>::infinity();
    return r;
}

bool same_rows(const Report& x, const Report& y) {
    if (x.rows.size() != y.rows.size() || x.kind != y.kind || x.version != y.version) return false;
    for (std::size_t i = 0; i < x.rows.size(); ++i) {
        const auto& p = x.rows[i];
        const auto& q = y.rows[i];
        if (p.label != q.label || p.values != q.values) return false;
        if (p.verdict.has_value() != q.verdict.has_value()) return false;
        if (p.verdict && (p.verdict->kind != q.verdict->kind || p.verdict->rule != q.verdict->rule)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("report CSV round trip is exact and byte stable") {
    const Report r = sample_report();
    std::ostringstream out;
    write_report_csv(r, out);
    std::istringstream in(out.str());
    const Report back = read_report_csv(in);
    CHECK(same_rows(r, back));
    std::ostringstream again;
    write_report_csv(back, again);
    CHECK(again.str() == out.str());
    CHECK(out.str().rfind("# kind=demo", 0) == 0);
}

TEST_CASE("report JSON round trip matches the CSV values") {
    const Report r = sample_report();
    const Report from_json = report_from_json(to_json(r));
    CHECK(same_rows(r, from_json));
    CHECK(from_json.inputs == r.inputs);
    std::ostringstream out;
    write_report_csv(r, out);
    std::istringstream in(out.str());
    CHECK(same_rows(read_report_csv(in), from_json));
    CHECK(to_json(r).dump() == to_json(from_json).dump());
}

TEST_CASE("format_double keeps 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(M_PI)) == M_PI);
}
