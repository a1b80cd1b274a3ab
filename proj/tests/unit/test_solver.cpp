#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cgolab/dnmap.hpp"
#include "cgolab/fixtures.hpp"
#include "cgolab/solver.hpp"

using namespace cgolab;

namespace {

// u = e^{-t} sin(x1 + x2) cos(x3),  A = (0.3 x2, 0, 0.2),  q = 0.5
double exact(double t, const Vec3& x) { return std::exp(-t) * std::sin(x[0] + x[1]) * std::cos(x[2]); }
Vec3 exact_grad(double t, const Vec3& x) {
    const double e = std::exp(-t);
    return {e * std::cos(x[0] + x[1]) * std::cos(x[2]), e * std::cos(x[0] + x[1]) * std::cos(x[2]),
            -e * std::sin(x[0] + x[1]) * std::sin(x[2])};
}
Vec3 coef_a(const Vec3& x) { return {0.3 * x[1], 0.0, 0.2}; }
double coef_q() { return 0.5; }

CoefficientPair coefficients(const Grid& g) {
    return {RealField::sample_vector(g, [](double, const Vec3& x) { return coef_a(x); }),
            RealField::sample(g, [](double, const Vec3&) { return coef_q(); })};
}

// L u with q~ = -div A - |A|^2 + q, and L* u with div A - |A|^2 + q (div A = 0 here)
double source(double t, const Vec3& x, Direction dir) {
    const double u = exact(t, x);
    const Vec3 a = coef_a(x);
    const Vec3 du = exact_grad(t, x);
    const double pot = -dot(a, a) + coef_q();
    if (dir == Direction::forward) return -u + 3.0 * u - 2.0 * dot(a, du) + pot * u;
    return u + 3.0 * u + 2.0 * dot(a, du) + pot * u;
}

double mms_error(int nx, Direction dir, Scheme scheme = Scheme::crank_nicolson) {
    const Grid g(Domain::unit_cube(), nx, 2 * (nx - 1));
    ParabolicProblem<double> p;
    p.coeffs = coefficients(g);
    p.direction = dir;
    p.dirichlet = RealField::sample(g, exact);
    p.source = RealField::sample(g, [dir](double t, const Vec3& x) { return source(t, x, dir); });
    const int start = dir == Direction::forward ? 0 : g.nt();
    const auto& ex = p.dirichlet.slice(start);
    p.condition.assign(ex.begin(), ex.end());
    const RealField u = solve(p, scheme);
    return (u - p.dirichlet).max_abs();
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
    const Grid g(Domain::unit_cube(), 9, 8);
    ParabolicProblem<Complex> p{CoefficientPair::zero(g), {}, {}, {}, Direction::forward};
    SolveStats stats;
    const ComplexField u = solve(p, Scheme::crank_nicolson, &stats);
    CHECK(u.max_abs() == 0.0);
    CHECK(stats.steps == g.nt());
    p.direction = Direction::adjoint;
    CHECK(solve(p).max_abs() == 0.0);
}

TEST_CASE("forward manufactured solution converges at second order") {
    const double e1 = mms_error(9, Direction::forward);
    const double e2 = mms_error(17, Direction::forward);
    CHECK(e2 < 1e-3);
    CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("adjoint manufactured solution converges at second order") {
    const double e1 = mms_error(9, Direction::adjoint);
    const double e2 = mms_error(17, Direction::adjoint);
    CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("backward Euler is first order when dt ~ dx") {
    const double e1 = mms_error(9, Direction::forward, Scheme::backward_euler);
    const double e2 = mms_error(17, Direction::forward, Scheme::backward_euler);
    const double order = std::log2(e1 / e2);
    CHECK(order > 0.8);
    CHECK(order < 1.3);
}

TEST_CASE("discrete operator matches the closed form") {
    const Grid g(Domain::unit_cube(), 33, 64);
    const CoefficientPair c = coefficients(g);
    const RealField u = RealField::sample(g, exact);
    const RealField Lu = apply_operator(c, u, Direction::forward);
    double worst = 0.0;
    for (int k = 1; k < g.nt(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (!g.on_boundary(s)) worst = std::max(worst, std::abs(Lu(k, s) - source(g.t(k), g.point(s), Direction::forward)));
        }
    }
    CHECK(worst < 5e-3);
}

TEST_CASE("poisson solve is exact on quadratics") {
    const Grid g(Domain::unit_cube(), 9, 1);
    std::vector<double> rhs(g.spatial_size(), 2.0), bnd(g.spatial_size());
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        const Vec3 x = g.point(s);
        bnd[s] = x[0] * x[0] + x[1] * x[2];
    }
    const auto psi = solve_poisson(g, rhs, bnd);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) CHECK(psi[s] == doctest::Approx(bnd[s]).epsilon(1e-8));
}

TEST_CASE("difference system") {
    const Grid g(Domain::unit_cube(), 9, 8);
    const auto base = coefficient_fixture("smooth", 3);
    const CoefficientPair c1 = base.sample(g);
    const ComplexField f = f_bank(g, 2024, 1)[0];
    const auto same = solve_difference(c1, c1, f);
    CHECK(same.u.max_abs() == 0.0);
    CHECK(same.cross_check == 0.0);

    const CoefficientPair c2 = gauge_model(base, gauge_fixture("bump", 3, 1.0)).sample(g);
    const auto diff = solve_difference(c1, c2, f);
    CHECK(diff.u.max_abs() > 0.0);
    CHECK(diff.cross_check < 1e-6);

    const CoefficientPair c3 = rotation_partner(base, 3).sample(g);
    CHECK(solve_difference(c1, c3, f).cross_check < 1e-6);

    CoefficientPair bad = c1;
    bad.A(0, 0, 0) += 1.0;
    CHECK_THROWS_AS(solve_difference(c1, bad, f), PreconditionError);
}

TEST_CASE("scheme residual of a marched solution vanishes") {
    const Grid g(Domain::unit_cube(), 7, 6);
    StepSystem<double> sys;
    sys.b = RealField::sample_vector(g, [](double, const Vec3& x) { return Vec3{x[1], 0.2, 0.0}; });
    sys.c = RealField(g, 1, 0.7);
    sys.source = RealField::sample(g, [](double t, const Vec3& x) { return t * x[0]; });
    sys.boundary = RealField::sample(g, [](double t, const Vec3& x) { return t * (x[1] + 1.0); });
    const RealField u = march(g, sys);
    const RealField r = scheme_residual(g, sys, u);
    CHECK(r.max_abs() < 1e-8);
}

TEST_CASE("scheme names") {
    CHECK(scheme_from_string("crank_nicolson") == Scheme::crank_nicolson);
    CHECK(to_string(Scheme::backward_euler) == "backward_euler");
    CHECK_THROWS_AS(scheme_from_string("leapfrog"), Error);
}
