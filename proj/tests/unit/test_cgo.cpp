#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cgolab/cgo.hpp"
#include "cgolab/fixtures.hpp"

using namespace cgolab;

namespace {

const double pi = std::numbers::pi;

CarlemanWeight weight(double h = 0.2) { return CarlemanWeight::for_domain(Domain::unit_cube(), h); }

// rho'.grad f by geometry stencils, rho' = grad varphi + i grad psi
double transport_defect(const CarlemanWeight& w, const ComplexField& f) {
    const Grid& g = f.grid();
    const ComplexField gr = ops::grad(f);
    double m = 0.0;
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        const auto p = phi_eval(w, g.point(s));
        const auto q = psi_eval(w, g.point(s));
        Complex d{};
        for (int a = 0; a < 3; ++a) d += Complex(p.grad[a], q.grad[a]) * gr(0, s, a);
        m = std::max(m, std::abs(d));
    }
    return m;
}

struct Wave {
    Vec3 a, c;
    double b;
    Complex value(double t, const Vec3& x) const {
        return std::exp(Complex(dot(a, x) + b * t, dot(c, x)));
    }
    Jet jet(double t, const Vec3& x) const {
        Jet j;
        j.v = value(t, x);
        Complex k2{};
        for (int i = 0; i < 3; ++i) {
            const Complex k(a[i], c[i]);
            j.g[i] = k * j.v;
            k2 += k * k;
        }
        j.lap = k2 * j.v;
        j.dt = b * j.v;
        return j;
    }
};

}  // namespace

TEST_CASE("logarithmic weight") {
    const auto w = weight();
    CHECK(std::abs(phi_eval(w, {-1.0, 0.5, 0.5}).value) < 1e-15);
    CHECK(phi_eval(w, {0.0, 0.5, 0.5}).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // grad log|y| = y/|y|^2, Lap = (n-2)/|y|^2
    const Vec3 x{0.3, 0.9, 0.1};
    const Vec3 y{2.3, 0.4, -0.4};
    const double r2 = dot(y, y);
    const auto p = phi_eval(w, x);
    for (int a = 0; a < 3; ++a) CHECK(p.grad[a] == doctest::Approx(y[a] / r2).epsilon(1e-12));
    CHECK(p.lap == doctest::Approx(1.0 / r2).epsilon(1e-12));
    auto we = w;
    we.eps = 0.3;
    const auto pe = phi_eps_eval(we, x);
    CHECK(pe.value == doctest::Approx(p.value + 0.15 * p.value * p.value));
}

TEST_CASE("angular phase") {
    const auto w = weight();
    CHECK(psi_angle(w, {-2.0, 0.5, 1.5}) == 0.0);
    CHECK(psi_angle(w, {-2.0, 0.5, -0.5}) == doctest::Approx(pi));
    CHECK(psi_angle(w, {0.0, 0.5, 0.5}) == doctest::Approx(pi / 2));
    CHECK(psi_eval(w, {0.0, 0.5, 0.5}).value == doctest::Approx(pi / 2));
    CHECK_THROWS_AS(psi_eval(w, {-2.0, 0.5, 1.5}), PreconditionError);

    // closed-form gradient against central differences
    const Vec3 x{0.4, 0.7, 0.2};
    const auto p = psi_eval(w, x);
    const double d = 1e-6;
    for (int a = 0; a < 3; ++a) {
        Vec3 xp = x, xm = x;
        xp[a] += d;
        xm[a] -= d;
        CHECK(p.grad[a] == doctest::Approx((psi_angle(w, xp) - psi_angle(w, xm)) / (2 * d)).epsilon(1e-7));
    }
}

TEST_CASE("eikonal pair at every node") {
    const Grid g(Domain::unit_cube(), 17, 1);
    const auto w = weight();
    double worst = 0.0;
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        const auto p = phi_eval(w, g.point(s));
        const auto q = psi_eval(w, g.point(s));
        worst = std::max({worst, std::abs(dot(p.grad, p.grad) - dot(q.grad, q.grad)), std::abs(dot(p.grad, q.grad))});
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("time factor") {
    auto w = weight(0.2);
    const auto end = eta_eval(w, w.T);
    CHECK(end.value == 0.0);
    CHECK(end.dt == 0.0);
    w.h = 1.0;
    CHECK(eta_eval(w, 0.0).value == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
    w.h = 1e-4;
    const double a = std::pow(w.h, 0.4);
    for (double t : {0.0, 0.3, 0.8}) {
        const double lim = (w.T - t) * (w.T - t);
        CHECK(std::abs(eta_eval(w, t).value / a - lim) / lim < 1e-3);
    }
    w.h = 0.2;
    CHECK_FALSE(w.too_large());
    w.h = 4.0;
    CHECK(w.too_large());
}

TEST_CASE("weight validation") {
    const Grid g(Domain::unit_cube(), 5, 1);
    auto w = weight();
    CHECK_NOTHROW(w.validate(g));
    w.omega = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(w.validate(g), PreconditionError);
    w.omega = {0.0, 0.0, 2.0};
    CHECK_THROWS_AS(w.validate(g), PreconditionError);
    w = weight(-0.1);
    CHECK_THROWS_AS(w.validate(g), PreconditionError);
}

TEST_CASE("first integrals") {
    const Grid g(Domain::unit_cube(), 9, 1);
    const auto w = weight();
    const auto c = first_integral(w, g, [](Complex) { return std::pair<Complex, Complex>{Complex(2.0, 1.0), 0.0}; });
    CHECK(c.annihilation == 0.0);
    for (const auto& v : c.g.data()) CHECK(v == Complex(2.0, 1.0));
    for (double lambda : {1.0, 4.0, 8.0}) CHECK(first_integral(w, g, exp_mode(lambda)).annihilation < 1e-6);
    // g does not depend on time
    const auto e = first_integral(w, g, exp_mode(3.0));
    for (std::size_t s = 0; s < g.spatial_size(); ++s) CHECK(e.g(0, s) == e.g(1, s));
}

TEST_CASE("transport solve") {
    const Grid g(Domain::unit_cube(), 13, 1);
    const auto w = weight();
    const auto zero = CoefficientPair::zero(g);
    const auto r0 = solve_transport(w, zero.A);
    CHECK(r0.residual < 1e-6);
    CHECK(transport_residual(w, zero.A, r0.Phi) < 1e-6);
    const auto smooth = coefficient_fixture("smooth", 3).sample(g);
    const auto r1 = solve_transport(w, smooth.A);
    CHECK(r1.residual < 1e-6);
    CHECK(transport_residual(w, smooth.A, r1.Phi) == doctest::Approx(r1.residual).epsilon(0.01));
    const auto rd = solve_transport(w, smooth.A, true);
    CHECK(transport_residual(w, smooth.A, rd.Phi, true) < 1e-6);
}

TEST_CASE("gauge shift of the transport exponent") {
    // Phi(A + grad Psi) - Phi(A) + Psi is a first integral up to stencil error
    const auto w = weight();
    auto defect = [&](int nx) {
        const Grid g(Domain::unit_cube(), nx, 1);
        const auto psi = gauge_fixture("static", 3, 1.0);
        const auto a = coefficient_fixture("smooth-static", 3);
        const auto c1 = a.sample(g);
        const auto c2 = gauge_model(a, psi).sample(g);
        const auto p1 = solve_transport(w, c1.A).Phi;
        const auto p2 = solve_transport(w, c2.A).Phi;
        const ComplexField Psi = to_complex(psi.sample(g).psi);
        const ComplexField D = p2 - p1 + Psi;
        return transport_defect(w, D) / transport_defect(w, Psi);
    };
    const double coarse = defect(9);
    const double fine = defect(17);
    CHECK(fine < 0.05);
    CHECK(coarse / fine > 3.0);
}

TEST_CASE("conjugated operator parts") {
    const auto w = weight(0.3);
    const Vec3 x{0.4, 0.6, 0.3};
    const double t = 0.35;
    Jet one;
    one.v = 1.0;
    const auto p = conjugated_apply(w, {0.0, 0.0, 0.0}, one, t, x);
    const auto ph = phi_eps_eval(w, x);
    const double e = eta_eval(w, t).value;
    CHECK(p.P.real() == doctest::Approx(-e * e * dot(ph.grad, ph.grad)).epsilon(1e-12));
    CHECK(p.S == Complex(0.0, 0.0));
    const auto pa = conjugated_apply(w, {0.2, -0.1, 0.4}, one, t, x);
    CHECK(std::abs(pa.S) > 0.0);

    const Wave trials[] = {{{0.3, -0.2, 0.1}, {1.0, 0.5, -0.7}, 0.4}, {{-0.5, 0.1, 0.2}, {0.0, 2.0, 1.0}, -1.0}};
    for (double sign : {1.0, -1.0}) {
        for (const auto& u : trials) {
            const Vec3 A{0.2 * x[1], -0.3, 0.1 * x[0]};
            const auto parts = conjugated_apply(w, A, u.jet(t, x), t, x, sign);
            const Complex direct = direct_conjugation(
                w, [](double, const Vec3& y) { return Vec3{0.2 * y[1], -0.3, 0.1 * y[0]}; },
                [&](double tt, const Vec3& y) { return u.value(tt, y); }, t, x, sign);
            CHECK(std::abs(parts.sum - direct) / std::abs(direct) < 1e-6);
        }
    }
}

TEST_CASE("conjugated fields of a constant are multiplicative at interior nodes") {
    const Grid g(Domain::unit_cube(), 9, 4);
    const auto w = weight(0.3);
    const ComplexField u(g, 1, Complex(1.0, 0.0));
    const auto parts = conjugated_apply(w, RealField(g, 3), u);
    for (int k = 0; k < g.levels(); ++k) {
        const double e = eta_eval(w, g.t(k)).value;
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (g.on_boundary(s)) continue;
            const auto ph = phi_eps_eval(w, g.point(s));
            CHECK(parts.P(k, s).real() == doctest::Approx(-e * e * dot(ph.grad, ph.grad)).epsilon(1e-10));
            CHECK(parts.S(k, s) == Complex(0.0, 0.0));
        }
    }
}

TEST_CASE("CGO end conditions") {
    const Grid g(Domain::unit_cube(), 9, 8);
    const auto c = coefficient_fixture("smooth", 3).sample(g);
    const auto w = weight(0.3);
    const auto grow = build_cgo(w, c, profile_from_name("one"), CGOKind::growing);
    CHECK(grow.metrics.end_value == 0.0);
    for (const auto& v : grow.u.slice(0)) CHECK(v == Complex(0.0, 0.0));
    CHECK(grow.u.all_finite());
    const auto dec = build_cgo(w, c, profile_from_name("exp+"), CGOKind::decaying);
    CHECK(dec.metrics.end_value == 0.0);
    for (const auto& v : dec.u.slice(g.nt())) CHECK(v == Complex(0.0, 0.0));
    CHECK(grow.metrics.transport_residual < 1e-6);
}

TEST_CASE("time profiles") {
    for (const auto& p : default_profiles()) {
        for (double t : {0.0, 0.5, 1.0}) {
            CHECK(p.m(t) != 0.0);
            const double d = 1e-6;
            CHECK(p.dm(t) == doctest::Approx((p.m(t + d) - p.m(t - d)) / (2 * d)).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(profile_from_name("sin"), PreconditionError);
    CHECK(smooth_step(-0.5) == 0.0);
    CHECK(smooth_step(1.5) == 1.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5));
}
