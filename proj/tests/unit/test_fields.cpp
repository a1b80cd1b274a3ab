#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "cgolab/fixtures.hpp"
#include "cgolab/io.hpp"

using namespace cgolab;

namespace {

const double pi = std::numbers::pi;

Grid cube(int nx = 9, int nt = 4) { return Grid(Domain::unit_cube(), nx, nt); }

CoefficientPair sample(const Grid& g, std::function<Vec3(double, const Vec3&)> A,
                       std::function<double(double, const Vec3&)> q) {
    return {RealField::sample_vector(g, A), RealField::sample(g, q)};
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("cgolab_test_" + name)).string();
}

}  // namespace

TEST_CASE("identity gauge leaves coefficients unchanged") {
    const Grid g = cube();
    const auto c = sample(g, [](double t, const Vec3& x) { return Vec3{x[1] * t, 0.3, -x[0]}; },
                          [](double t, const Vec3& x) { return t + x[2]; });
    const auto out = apply_gauge(c, GaugeFunction::zero(g));
    CHECK(out.A.data() == c.A.data());
    CHECK(out.q.data() == c.q.data());
}

TEST_CASE("gauge by t times the sine bump") {
    const Grid g = cube();
    const auto c = sample(g, [](double, const Vec3& x) { return Vec3{x[1], 0.0, 0.5}; },
                          [](double, const Vec3& x) { return x[0]; });
    const auto psi = GaugeFunction::analytic(
        g, [](double t, const Vec3& x) { return t * bump(x, 3); },
        [](double t, const Vec3& x) {
            Vec3 d = bump_grad(x, 3);
            for (auto& v : d) v *= t;
            return d;
        },
        [](double, const Vec3& x) { return bump(x, 3); });
    const auto out = apply_gauge(c, psi);
    double worst = 0.0;
    for (int k = 0; k < g.levels(); ++k) {
        const double t = g.t(k);
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            const Vec3 x = g.point(s);
            const Vec3 db = bump_grad(x, 3);
            for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(out.A(k, s, a) - c.A(k, s, a) - t * db[a]));
            worst = std::max(worst, std::abs(out.q(k, s) - c.q(k, s) - bump(x, 3)));
            if (g.on_boundary(s)) {
                for (int a = 0; a < 3; ++a) CHECK(std::abs(out.A(k, s, a) - c.A(k, s, a)) < 1e-12);
                CHECK(std::abs(out.q(k, s) - c.q(k, s)) < 1e-12);
            }
        }
    }
    CHECK(worst < 1e-13);
    CHECK(out.boundary_mismatch(c) < 1e-12);
}

TEST_CASE("gauge difference is curl free") {
    const Grid g = cube(17, 2);
    const auto c = sample(g, [](double, const Vec3& x) { return Vec3{x[1], 0.0, 0.5}; },
                          [](double, const Vec3&) { return 0.0; });
    const auto model = gauge_fixture("bump", 3, 1.0);
    const auto out = apply_gauge(c, model.sample(g));
    const RealField curl_gauge = ops::curl(out.A - c.A);
    const auto partner = rotation_partner(coefficient_fixture("zero", 3), 3).sample(g);
    const RealField curl_rot = ops::curl(partner.A);
    double cg = 0.0, cr = 0.0;
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (g.on_boundary(s)) continue;
            for (int a = 0; a < 3; ++a) {
                cg = std::max(cg, std::abs(curl_gauge(k, s, a)));
                cr = std::max(cr, std::abs(curl_rot(k, s, a)));
            }
        }
    }
    CHECK(cg < 1e-12);
    CHECK(cr > 0.1);
}

TEST_CASE("gauge must vanish on the boundary") {
    const Grid g = cube();
    const auto c = CoefficientPair::zero(g);
    const auto bad = GaugeFunction::analytic(g, [](double t, const Vec3& x) { return t * x[0]; });
    CHECK_THROWS_AS(apply_gauge(c, bad), PreconditionError);
}

TEST_CASE("effective potential") {
    const Grid g = cube();
    const auto zero_a = sample(g, [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; },
                               [](double t, const Vec3& x) { return std::cos(x[0]) + t; });
    const RealField q0 = effective_potential(zero_a);
    CHECK(q0.data() == zero_a.q.data());

    const auto lin = sample(g, [](double, const Vec3& x) { return Vec3{x[0], 0.0, 0.0}; },
                            [](double, const Vec3&) { return 0.0; });
    const RealField q1 = effective_potential(lin);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            const double x1 = g.point(s)[0];
            CHECK(q1(k, s) == doctest::Approx(-1.0 - x1 * x1).epsilon(1e-12));
        }
    }
}

TEST_CASE("norms") {
    const Grid g = cube(17, 8);
    const RealField one(g, 1, 1.0);
    CHECK(norm(one, NormKind::l2) == doctest::Approx(1.0).epsilon(1e-12));
    for (double h : {1.0, 0.3, 0.01}) CHECK(norm(one, NormKind::semiclassical_h1, h) == doctest::Approx(1.0).epsilon(1e-12));
    const RealField s = RealField::sample(g, [](double, const Vec3& x) { return std::sin(pi * x[0]); });
    CHECK(norm(s, NormKind::l2) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(norm(s, NormKind::max) == doctest::Approx(1.0));
    // ||h grad sin(pi x1)||^2 = h^2 pi^2 / 2 in the continuum
    const double h = 0.1;
    const double expect = std::sqrt(0.5 + h * h * pi * pi * 0.5);
    CHECK(norm(s, NormKind::semiclassical_h1, h) == doctest::Approx(expect).epsilon(5e-3));
}

TEST_CASE("surrogate norm caps") {
    const Grid g = cube();
    auto c = sample(g, [](double, const Vec3& x) { return Vec3{x[0], 0.0, 0.0}; },
                    [](double, const Vec3&) { return 0.0; });
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(c.validate({0.5, 1e6}), PreconditionError);
    c.q(0, 0) = std::nan("");
    CHECK_THROWS_AS(c.validate(), PreconditionError);
}

TEST_CASE("CDF1 round trip") {
    const Grid g(Domain::unit_square(), 5, 3);
    const RealField a = RealField::sample_vector(g, [](double t, const Vec3& x) { return Vec3{x[0] + t, x[1] * t, 0.0}; });
    const std::string pa = temp_file("real.cdf1");
    write_cdf1(pa, a);
    const RealField b = read_cdf1_real(pa);
    CHECK(b.compatible(a));
    CHECK(b.data() == a.data());
    CHECK(read_cdf1_header(pa)["arity"] == 2);

    const ComplexField z = ComplexField::sample(g, [](double t, const Vec3& x) { return Complex(x[0], t - x[1]); });
    const std::string pz = temp_file("complex.cdf1");
    write_cdf1(pz, z);
    CHECK(read_cdf1_complex(pz).data() == z.data());
    CHECK_THROWS_AS(read_cdf1_real(pz), FormatError);

    const std::string bad = temp_file("bad.cdf1");
    std::ofstream(bad) << "not a field";
    CHECK_THROWS_AS(read_cdf1_real(bad), FormatError);
    CHECK_THROWS_AS(read_cdf1_real(temp_file("missing.cdf1")), Error);
    for (const auto& p : {pa, pz, bad}) std::filesystem::remove(p);
}
