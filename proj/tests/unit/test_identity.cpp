#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cgolab/fixtures.hpp"
#include "cgolab/identity.hpp"

using namespace cgolab;

namespace {

const double pi = std::numbers::pi;

Grid cube(int nx = 9, int nt = 16) { return Grid(Domain::unit_cube(), nx, nt); }

CarlemanWeight weight(double h = 0.3) { return CarlemanWeight::for_domain(Domain::unit_cube(), h); }

ComplexField terminal_free(const Grid& g) {
    return ComplexField::sample(g, [&](double t, const Vec3& x) {
        return Complex((g.T() - t) * (1.0 + 0.3 * x[1]), 0.2 * (g.T() - t) * x[2]);
    });
}

bool has_verdict(const ScanReport& r, const std::string& name, bool pass) {
    for (const auto& v : r.verdicts) {
        if (v.name == name) return v.pass == pass;
    }
    return false;
}

}  // namespace

TEST_CASE("identity with equal coefficients") {
    const Grid g = cube();
    const auto part = classify_boundary(g, default_epsilon0(g));
    const auto c = coefficient_fixture("smooth", 3).sample(g);
    const ComplexField f = f_bank(g, 5, 1)[0];
    const auto r = integral_identity_residual(c, c, f, terminal_free(g), part);
    CHECK(r.lhs == Complex(0.0, 0.0));
    CHECK(std::abs(r.rhs_full) < 1e-12);
    CHECK(r.residual < 1e-10);
    CHECK(r.trace_energy == 0.0);
}

TEST_CASE("identity rejects a test function alive at T") {
    const Grid g = cube();
    const auto part = classify_boundary(g, default_epsilon0(g));
    const auto c = coefficient_fixture("smooth", 3).sample(g);
    const ComplexField v(g, 1, Complex(1.0, 0.0));
    CHECK_THROWS_AS(integral_identity_residual(c, c, f_bank(g, 5, 1)[0], v, part), PreconditionError);
}

TEST_CASE("Green closure converges") {
    auto closure = [](int nx) {
        const Grid g = cube(nx, 2 * (nx - 1));
        const auto part = classify_boundary(g, 0.0);
        const auto c = coefficient_fixture("smooth", 3).sample(g);
        const ComplexField u = ComplexField::sample(g, [](double t, const Vec3& x) {
            return Complex(t * std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]) * (1.0 + x[0]), 0.0);
        });
        const ComplexField v = ComplexField::sample(g, [](double t, const Vec3& x) {
            return std::exp(Complex(-t + 0.4 * x[0], 0.5 * x[1]));
        });
        return green_identity(c, u, v, part).residual;
    };
    const double coarse = closure(9);
    const double fine = closure(17);
    MESSAGE("Green closure: ", coarse, " (9^3), ", fine, " (17^3)");
    CHECK(fine < 0.02);
    CHECK(coarse / fine > 3.0);
}

TEST_CASE("probe family") {
    const Grid g = cube(17, 2);
    const auto fam = g_family(weight(), g, 8);
    CHECK(fam.size() == 8);
    for (const auto& p : fam) CHECK(p.annihilation < 1e-6);
    const double cond = gram_condition(g, fam);
    CHECK(std::isfinite(cond));
    CHECK(cond * 2.220446049250313e-16 < 1.0);
    CHECK(gram_condition(g, {fam[0], fam[0]}) > 1e12);
}

TEST_CASE("moments vanish for equal convection") {
    const Grid g = cube(9, 8);
    const auto c = coefficient_fixture("smooth", 3).sample(g);
    const auto w = weight();
    const MomentKernel k = moment_kernel(w, c.A, c.A);
    CHECK(k.transport_residual < 1e-6);
    for (const auto& p : g_family(w, g, 3)) {
        MomentOptions opt;
        opt.h_list = {0.3};
        const MomentValue m = curl_moment(c, c, k, p, profile_from_name("one"), profile_from_name("one"), opt);
        CHECK(m.slice == Complex(0.0, 0.0));
        CHECK(m.slice_normalized == 0.0);
    }
}

TEST_CASE("kernel is time independent for static convection") {
    const Grid g = cube(9, 8);
    const auto c = coefficient_fixture("smooth-static", 3).sample(g);
    const MomentKernel k = moment_kernel(weight(), c.A, c.A);
    CHECK(k.time_variation < 1e-12);
}

TEST_CASE("q recovery") {
    const Grid g = cube(9, 32);
    const auto base = coefficient_fixture("smooth", 3);
    const auto c2 = base.sample(g);
    const auto w = weight();
    const MomentKernel k = moment_kernel(w, c2.A, c2.A);
    const auto fam = g_family(w, g, 2);
    const auto one = profile_from_name("one");

    const QRecovery same = recover_q(c2, c2, k, fam, one, one);
    CHECK(same.H_max == 0.0);
    for (const auto& m : same.moments) CHECK(m == Complex(0.0, 0.0));

    CoefficientPair c3 = c2;
    for (int l = 0; l < g.levels(); ++l) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) c3.q(l, s) += bump(g.point(s), 3);
    }
    const QRecovery stat = recover_q(c2, c3, k, fam, one, one);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        CHECK(stat.H(0, s) == doctest::Approx(g.T() * bump(g.point(s), 3)).epsilon(1e-12));
    }

    // q3 - q2 = sin(pi t) bump with profiles 1 and e^t
    CoefficientPair c4 = c2;
    for (int l = 0; l < g.levels(); ++l) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) c4.q(l, s) += std::sin(pi * g.t(l)) * bump(g.point(s), 3);
    }
    const double factor = pi * (std::exp(1.0) + 1.0) / (pi * pi + 1.0);
    const QRecovery two = recover_q(c2, c4, k, fam, one, profile_from_name("exp+"));
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        CHECK(std::abs(two.H(0, s) - factor * bump(g.point(s), 3)) < 1e-5);
    }

    CoefficientPair c5 = c2;
    c5.A(1, 40, 0) += 1e-3;
    CHECK_THROWS_AS(recover_q(c2, c5, k, fam, one, one), PreconditionError);
}

TEST_CASE("gauge recovery") {
    const Grid g = cube(9, 8);
    const auto base = coefficient_fixture("smooth", 3);
    const auto c1 = base.sample(g);
    const GaugeRecovery same = recover_gauge(c1, c1);
    CHECK(same.max_psi == 0.0);
    CHECK(same.residual_a == 0.0);

    auto error = [&](int nx) {
        const Grid gg = cube(nx, 4);
        const auto psi = gauge_fixture("static", 3, 1.0);
        const auto r = recover_gauge(base.sample(gg), gauge_model(base, psi).sample(gg));
        double e = 0.0;
        for (std::size_t s = 0; s < gg.spatial_size(); ++s) e = std::max(e, std::abs(r.psi(2, s) - bump(gg.point(s), 3)));
        return e;
    };
    const double coarse = error(9);
    const double fine = error(17);
    CHECK(fine < 0.02);
    CHECK(coarse / fine > 3.0);
}

TEST_CASE("boundary term with equal coefficients") {
    const Grid g = cube(9, 16);
    const auto part = classify_boundary(g, default_epsilon0(g));
    const auto c = coefficient_fixture("smooth", 3).sample(g);
    BoundaryScanOptions opt;
    opt.h_list = {0.4, 0.3, 0.2};
    const ScanReport r = boundary_term_scan(c, c, weight(), part, opt);
    CHECK(has_verdict(r, "boundary_term_vanishes", true));
    for (const auto& m : r.per_h) CHECK(m.value == 0.0);
}

TEST_CASE("operator on boundary nodes") {
    const Grid g = cube(9, 8);
    const auto c = CoefficientPair::zero(g);
    // L (t x1^2) = x1^2 - 2t, exact for the stencils including one-sided ends
    const ComplexField u = ComplexField::sample(g, [](double t, const Vec3& x) { return Complex(t * x[0] * x[0], 0.0); });
    const ComplexField Lu = operator_everywhere(c, u, Direction::forward);
    for (int k = 1; k < g.nt(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            const double x1 = g.point(s)[0];
            CHECK(std::abs(Lu(k, s) - Complex(x1 * x1 - 2.0 * g.t(k), 0.0)) < 1e-10);
        }
    }
}
