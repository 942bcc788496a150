#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ubmlab/estimate.hpp"
#include "ubmlab/trajectory_io.hpp"
#include "ubmlab/unitary_dynamics.hpp"

using namespace ubmlab;

TEST_CASE("skew basis is orthonormal and its squares sum to minus the identity") {
    for (int n : {1, 2, 5, 64}) {
        const SkewBasis basis(n);
        CHECK(basis.size() == static_cast<std::size_t>(n * n));
        ComplexMatrix sum = ComplexMatrix::Zero(n, n);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const ComplexMatrix x = basis.element(k);
            CHECK((x + x.adjoint()).norm() < 1e-15);
            sum += x * x;
        }
        CHECK((sum + ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
    const int n = 4;
    const SkewBasis basis(n);
    for (std::size_t a = 0; a < basis.size(); ++a) {
        for (std::size_t b = 0; b < basis.size(); ++b) {
            const double ip = n * real_inner(basis.element(a), basis.element(b));
            CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-14);
        }
    }
}

TEST_CASE("combine is the linear span of the elements") {
    const SkewBasis basis(3);
    std::vector<double> c(basis.size());
    ComplexMatrix direct = ComplexMatrix::Zero(3, 3);
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = std::sin(1.0 + k);
        direct += c[k] * basis.element(k);
    }
    CHECK((basis.combine(c) - direct).norm() < 1e-14);
}

TEST_CASE("skew-Hermitian exponential is unitary and matches the series") {
    const SkewBasis basis(4);
    std::vector<double> c(basis.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = 0.3 * std::cos(2.0 * k + 1.0);
    const ComplexMatrix x = basis.combine(c);
    const ComplexMatrix e = skew_hermitian_exp(x);
    ComplexMatrix series = ComplexMatrix::Identity(4, 4);
    ComplexMatrix term = ComplexMatrix::Identity(4, 4);
    for (int k = 1; k < 30; ++k) {
        term = term * x / static_cast<double>(k);
        series += term;
    }
    CHECK((e - series).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(UnitaryMatrix(e).unitarity_error() < 1e-14);
}

TEST_CASE("Haar samples are unitary with CUE trace moments") {
    const int n = 6;
    const std::size_t m = 6000;
    const SeedTree seed(101);
    const auto table = collect_samples(seed, m, 3, [&](const SeedTree& s) {
        const UnitaryMatrix u = sample_haar_unitary(n, s);
        if (u.unitarity_error() > 1e-13) throw std::runtime_error("not unitary");
        const Complex t1 = u.trace();
        const Complex t2 = (u.entries * u.entries).trace();
        return std::vector<double>{t1.real(), std::norm(t1), std::norm(t2)};
    });
    Estimate mean = mean_estimate(table.column(0));
    mean.judge(0.0);
    CHECK(mean.verdict->kind == VerdictKind::Pass);
    Estimate m1 = mean_estimate(table.column(1));
    m1.judge(1.0);  // E|Tr U|^2 = 1
    CHECK(m1.verdict->kind == VerdictKind::Pass);
    Estimate m2 = mean_estimate(table.column(2));
    m2.judge(2.0);  // E|Tr U^2|^2 = 2 for n >= 2
    CHECK(m2.verdict->kind == VerdictKind::Pass);
}

TEST_CASE("CUE eigenphases are sorted and in range") {
    const auto p = cue_eigenphases(10, SeedTree(3));
    REQUIRE(p.size() == 10);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i] >= 0.0);
        CHECK(p[i] < kTwoPi);
        if (i) CHECK(p[i] > p[i - 1]);
    }
}

TEST_CASE("unitarity drift over 1000 steps at n = 64") {
    const UnitaryMatrix start(ComplexMatrix::Identity(64, 64));
    const auto states = evolve_unitary(start, default_dt(64), 1000, SeedTree(12), 1000);
    REQUIRE(states.size() == 2);
    CHECK(states.back().unitarity_error() <= 1e-10);
}

TEST_CASE("mean of the matrix flow decays as e^{-t}") {
    // E[U_t] = e^{-t} U_0 for dU = sqrt2 U dB - U dt
    const int n = 3;
    const double dt = 0.005;
    const int steps = 100;
    const Estimate e = mc_estimate(
        [&](const SeedTree& s) {
            auto rng = s.engine();
            ComplexMatrix u = ComplexMatrix::Identity(n, n);
            for (int i = 0; i < steps; ++i) unitary_step(u, dt, rng);
            return u.trace().real();
        },
        3000, SeedTree(4));
    Estimate judged = e;
    judged.judge(n * std::exp(-dt * steps));
    CHECK(judged.verdict->kind == VerdictKind::Pass);
}

TEST_CASE("matrix flow and eigenvalue flow give the same stationary covariance") {
    // Cov(Re Tr U_0, Re Tr U_t) = e^{-t}/2 at equilibrium
    const int n = 5;
    const double t = 0.3;
    const double expect = 0.5 * std::exp(-t);
    const std::size_t m = 6000;

    const auto matrix = collect_samples(SeedTree(21), m, 2, [&](const SeedTree& s) {
        const UnitaryMatrix u0 = sample_haar_unitary(n, s.child("start"));
        auto rng = s.child("path").engine();
        ComplexMatrix u = u0.entries;
        const double dt = 0.01;
        for (int i = 0; i < 30; ++i) unitary_step(u, dt, rng);
        return std::vector<double>{u0.trace().real(), u.trace().real()};
    });
    Estimate cm = covariance_estimate(matrix.column(0), matrix.column(1));
    cm.judge(expect);
    CHECK(cm.verdict->kind == VerdictKind::Pass);

    const auto dyson = collect_samples(SeedTree(22), m, 2, [&](const SeedTree& s) {
        const auto traj = stationary_phase_path(n, {0.0, t}, s);
        double a = 0, b = 0;
        for (double p : traj.phases[0]) a += std::cos(p);
        for (double p : traj.phases[1]) b += std::cos(p);
        return std::vector<double>{a, b};
    });
    Estimate cd = covariance_estimate(dyson.column(0), dyson.column(1));
    cd.judge(expect);
    CHECK(cd.verdict->kind == VerdictKind::Pass);
}

TEST_CASE("Dyson paths keep the cyclic order and are reproducible") {
    const auto start = cue_eigenphases(12, SeedTree(7));
    const auto a = evolve_eigenphases(start, 1e-3, 500, 2.0, SeedTree(8), 50);
    const auto b = evolve_eigenphases(start, 1e-3, 500, 2.0, SeedTree(8), 50);
    REQUIRE(a.phases.size() == 11);
    CHECK(a.phases == b.phases);
    for (const auto& ph : a.phases) {
        for (std::size_t j = 0; j + 1 < ph.size(); ++j) CHECK(ph[j + 1] > ph[j]);
        CHECK(ph.front() + kTwoPi > ph.back());
    }
    CHECK(a.times.back() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary paths hit the requested times exactly") {
    const auto traj = stationary_phase_path(6, {0.0, 0.05, 0.3, 0.31}, SeedTree(2));
    REQUIRE(traj.times.size() == 4);
    CHECK(traj.times[2] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK_THROWS_AS(stationary_phase_path(6, {0.3, 0.1}, SeedTree(2)), std::invalid_argument);
}

TEST_CASE("collisions below beta = 1 raise CollisionError") {
    std::vector<double> start{1.0, 1.0 + 1e-9};
    bool thrown = false;
    try {
        evolve_eigenphases(start, 1e-3, 2000, 0.1, SeedTree(1));
    } catch (const CollisionError& e) {
        thrown = true;
        CHECK(e.time() >= 0.0);
    }
    CHECK(thrown);
    CHECK_THROWS_AS(evolve_eigenphases({1.0, 1.0}, 1e-3, 1, 2.0, SeedTree(1)), std::invalid_argument);
}

TEST_CASE("lattice deviation and rigidity rows") {
    std::vector<double> lattice(8);
    for (int k = 0; k < 8; ++k) lattice[k] = 0.3 + kTwoPi * k / 8.0;
    CHECK(lattice_deviation(lattice) < 1e-14);
    lattice[3] += 0.1;
    CHECK(lattice_deviation(lattice) == doctest::Approx(0.05).epsilon(1e-12));

    const auto start = cue_eigenphases(32, SeedTree(9));
    const auto traj = evolve_eigenphases(start, 1e-3, 200, 2.0, SeedTree(10), 100);
    const auto rows = rigidity_report(traj);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.statistic == doctest::Approx(32 * r.deviation / std::log(32.0)));
        CHECK(r.flagged == (32 * r.deviation > std::pow(std::log(32.0), 2)));
    }
}

TEST_CASE("trajectory CSV round trip") {
    const auto traj = evolve_eigenphases(cue_eigenphases(4, SeedTree(1)), 1e-3, 30, 2.0, SeedTree(1).child("p"), 10);
    std::ostringstream out;
    write_trajectory_csv(traj, out);
    std::istringstream in(out.str());
    const auto back = read_trajectory_csv(in);
    CHECK(back.n == traj.n);
    CHECK(back.dt == traj.dt);
    CHECK(back.beta == traj.beta);
    CHECK(back.seed_path == traj.seed_path);
    CHECK(back.times == traj.times);
    CHECK(back.phases == traj.phases);
}
