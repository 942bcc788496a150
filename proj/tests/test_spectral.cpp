#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <boost/math/special_functions/bessel.hpp>

#include "ubmlab/estimate.hpp"
#include "ubmlab/spectral.hpp"
#include "ubmlab/unitary_dynamics.hpp"

using namespace ubmlab;

TEST_CASE("trigonometric symbols") {
    const CircleSymbol c = cos_symbol(3, 0.8);
    CHECK(std::abs(c.coeff(3) - Complex(0.4, 0)) < 1e-16);
    CHECK(std::abs(c.coeff(-3) - Complex(0.4, 0)) < 1e-16);
    CHECK(std::abs(c.coeff(1)) == 0.0);
    CHECK(c.evaluate_real(0.7) == doctest::Approx(0.8 * std::cos(2.1)).epsilon(1e-15));
    CHECK(std::abs(c.evaluate_series(0.7).real() - 0.8 * std::cos(2.1)) < 1e-15);
    const CircleSymbol s = sin_symbol(2, 1.5);
    CHECK(std::abs(s.evaluate_series(0.4).real() - 1.5 * std::sin(0.8)) < 1e-15);
    CHECK(s.is_real());
    CHECK(c.h_half_norm_squared() == doctest::Approx(3 * 2 * 0.16));
}

TEST_CASE("quadrature Fourier coefficients of e^{a cos}") {
    const double a = 1.3;
    const CircleSymbol f =
        fourier_coefficients([&](double th) { return Complex(std::exp(a * std::cos(th)), 0.0); }, 12, 64, {});
    for (int k = -12; k <= 12; ++k)
        CHECK(std::abs(f.coeff(k) - Complex(boost::math::cyl_bessel_i(std::abs(k), a), 0)) < 1e-14);
    CHECK_THROWS_AS(fourier_coefficients([](double) { return Complex(1, 0); }, 10, 20, {}), std::invalid_argument);
    SingularityMark mark{};
    CHECK_THROWS_AS(fourier_coefficients([](double) { return Complex(1, 0); }, 4, 64, {mark}), std::invalid_argument);
}

TEST_CASE("log singularity symbol converges to the logarithm") {
    const double phi = 1.0;
    const CircleSymbol s = log_singularity_symbol(phi, 20000);
    CHECK(!s.singularities().empty());
    for (double th : {2.0, 3.5, 5.5}) {
        const double exact = std::log(std::abs(std::polar(1.0, th) - std::polar(1.0, phi)));
        CHECK(std::abs(s.evaluate_series(th).real() - exact) < 1e-3);
    }
}

TEST_CASE("H^{1/2} pairing, smoothing and products") {
    const CircleSymbol c1 = cos_symbol(1);
    const CircleSymbol c2 = cos_symbol(2);
    CHECK(h_half_inner(c1, c1) == doctest::Approx(0.5));
    CHECK(h_half_inner(c2, c2, 0.25) == doctest::Approx(std::exp(-0.5)));
    CHECK(h_half_inner(c1, c2) == 0.0);
    CHECK(h_half_inner(c1, sin_symbol(1)) == doctest::Approx(0.0));

    const CircleSymbol p = poisson_smooth(c2, 0.3);
    CHECK(std::abs(p.coeff(2).real() - 0.5 * std::exp(-0.6)) < 1e-16);

    const CircleSymbol sq = symbol_product(c1, c1, 4);
    CHECK(std::abs(sq.coeff(0) - Complex(0.5, 0)) < 1e-15);
    CHECK(std::abs(sq.coeff(2) - Complex(0.25, 0)) < 1e-15);
    const CircleSymbol sum = symbol_sum(c1, symbol_scale(c1, Complex(-1, 0)));
    for (int k = -1; k <= 1; ++k) CHECK(std::abs(sum.coeff(k)) < 1e-16);
}

TEST_CASE("symbol CSV round trip") {
    CircleSymbol f = fourier_coefficients([](double th) { return Complex(std::exp(std::sin(th)), 0); }, 6, 64, {});
    std::ostringstream out;
    write_symbol_csv(f, out);
    std::istringstream in(out.str());
    const CircleSymbol g = read_symbol_csv(in);
    REQUIRE(g.k_max() == f.k_max());
    for (int k = -6; k <= 6; ++k) CHECK(g.coeff(k) == f.coeff(k));
}

TEST_CASE("log|det| from eigenphases matches the matrix determinant") {
    const UnitaryMatrix u = sample_haar_unitary(7, SeedTree(31));
    const auto phases = u.eigenphases();
    for (double th : {0.0, 1.1, 4.0}) {
        const ComplexMatrix m = u.entries - std::polar(1.0, th) * ComplexMatrix::Identity(7, 7);
        const double direct = std::log(std::abs(m.determinant()));
        bool clipped = true;
        CHECK(std::abs(log_char_poly(phases, th, &clipped) - direct) < 1e-11);
        CHECK(!clipped);
        // mollified: log|det(1 - r e^{-i th} U)|
        const double eps = 0.2;
        const ComplexMatrix mm =
            ComplexMatrix::Identity(7, 7) - std::exp(-eps) * std::polar(1.0, -th) * u.entries;
        CHECK(std::abs(mollified_log_char_poly(phases, th, eps) - std::log(std::abs(mm.determinant()))) < 1e-11);
    }
    bool clipped = false;
    log_char_poly(phases, phases[2], &clipped);
    CHECK(clipped);
}

TEST_CASE("field from trajectory: parallel equals serial") {
    const auto traj = stationary_phase_path(8, {0.0, 0.1, 0.2}, SeedTree(5));
    const std::vector<double> angles{0.1, 1.0, 2.0, 3.0};
    const FieldSample a = field_from_trajectory(traj, angles);
    const FieldSample b = field_from_trajectory_serial(traj, angles);
    CHECK(a.values == b.values);
    CHECK(a.at(1, 2) == doctest::Approx(log_char_poly(traj.phases[1], 2.0)));
    std::ostringstream out;
    write_field_csv(a, out);
    CHECK(out.str().find("t,theta,value,clipped") != std::string::npos);
}

TEST_CASE("counting statistic is the jump of the imaginary log") {
    const auto phases = cue_eigenphases(9, SeedTree(13));
    for (double th : {0.5, 2.0, 4.4, 6.0}) {
        const double direct = counting_statistic(phases, th);
        const double via_log = -(im_log_char_poly(phases, th) - im_log_char_poly(phases, 0.0));
        CHECK(std::abs(direct - via_log) < 1e-11);
    }
}

TEST_CASE("Borel transform against eigenvalues") {
    const UnitaryMatrix u = sample_haar_unitary(5, SeedTree(17));
    const auto ph = u.eigenphases();
    for (Complex z : {Complex(0.3, 0.2), Complex(2.0, -1.0)}) {
        Complex expect{};
        for (double p : ph) {
            const Complex e = std::polar(1.0, p);
            expect += (z + e) / (z - e);
        }
        expect /= 5.0;
        CHECK(std::abs(borel_transform(u, z) - expect) < 1e-12);
    }
    CHECK_THROWS_AS(borel_transform(u, std::polar(1.0, ph[0])), std::domain_error);
    CHECK(std::abs(characteristic_flow(Complex(2, 0), 0.5) - Complex(2 * std::exp(0.5), 0)) < 1e-15);
    CHECK(std::abs(characteristic_flow(Complex(0.5, 0), 0.5) - Complex(0.5 * std::exp(-0.5), 0)) < 1e-15);
}

TEST_CASE("reweighted CUE mean equals the linear-response prediction") {
    // E[Tr cos | weight e^{a Tr cos}] = a/2 up to O(a^{2n+1}) on CUE(n)
    const int n = 8;
    const double a = 0.4;
    BiasSpec bias;
    bias.insertions.push_back({0.0, cos_symbol(1, a)});
    std::vector<PhaseTrajectory> samples;
    for (std::size_t i = 0; i < 20000; ++i) {
        PhaseTrajectory t;
        t.n = n;
        t.times = {0.0};
        t.seed_path = SeedTree(55).child("sample", i).path_string();
        t.phases = {cue_eigenphases(n, SeedTree(55).child("sample", i))};
        samples.push_back(std::move(t));
    }
    Estimate e = reweighted_expectation(samples, bias, [](const PhaseTrajectory& t) {
        double s = 0;
        for (double p : t.phases[0]) s += std::cos(p);
        return s;
    });
    CHECK(e.seed_lineage == "55");
    const double pred = loop_equation_rhs(bias, cos_symbol(1), 0.0);
    CHECK(pred == doctest::Approx(a / 2));
    e.judge(pred);
    CHECK(e.verdict->kind == VerdictKind::Pass);
}

TEST_CASE("loop equation right-hand side decays with the time gap") {
    BiasSpec bias;
    bias.insertions.push_back({0.0, cos_symbol(2, 0.6)});
    CHECK(loop_equation_rhs(bias, cos_symbol(2), 0.25) == doctest::Approx(2 * 2 * 0.3 * 0.5 * std::exp(-0.5)));
    CHECK(loop_equation_rhs(bias, cos_symbol(1), 0.25) == 0.0);
}
