#include "cgolab/fixtures.hpp"

#include <cmath>
#include <numbers>

namespace cgolab {

namespace {
constexpr double pi = std::numbers::pi;
}

CoefficientPair CoefficientModel::sample(const Grid& g) const {
    return {RealField::sample_vector(g, [&](double t, const Vec3& x) { return A(t, x); }), RealField::sample(g, q)};
}

GaugeFunction GaugeModel::sample(const Grid& g) const {
    return GaugeFunction::analytic(
        g, psi, [&](double t, const Vec3& x) { return grad(t, x); }, dt);
}

double bump(const Vec3& x, int n) {
    double b = 1.0;
    for (int a = 0; a < n; ++a) b *= std::sin(pi * x[a]) * std::sin(pi * x[a]);
    return b;
}

Vec3 bump_grad(const Vec3& x, int n) {
    Vec3 g{0.0, 0.0, 0.0};
    for (int a = 0; a < n; ++a) {
        double v = pi * std::sin(2.0 * pi * x[a]);
        for (int b = 0; b < n; ++b) {
            if (b != a) v *= std::sin(pi * x[b]) * std::sin(pi * x[b]);
        }
        g[a] = v;
    }
    return g;
}

double bump_lap(const Vec3& x, int n) {
    double l = 0.0;
    for (int a = 0; a < n; ++a) {
        double v = 2.0 * pi * pi * std::cos(2.0 * pi * x[a]);
        for (int b = 0; b < n; ++b) {
            if (b != a) v *= std::sin(pi * x[b]) * std::sin(pi * x[b]);
        }
        l += v;
    }
    return l;
}

CoefficientModel coefficient_fixture(const std::string& name, int n) {
    CoefficientModel m;
    m.name = name;
    if (name == "zero") {
        m.A = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
        m.q = [](double, const Vec3&) { return 0.0; };
        m.divA = [](double, const Vec3&) { return 0.0; };
    } else if (name == "smooth" || name == "smooth-static") {
        const double tw = name == "smooth" ? 0.5 : 0.0;
        m.A = [n, tw](double t, const Vec3& x) {
            const double s = 1.0 + tw * t;
            Vec3 a{0.4 * std::cos(pi * x[1]) * s, 0.3 * std::sin(pi * x[0]) * s, 0.0};
            if (n == 3) a[2] = 0.2 * x[0] * x[1] * s;
            return a;
        };
        m.q = [](double t, const Vec3& x) { return 1.0 + 0.5 * std::sin(pi * x[0]) * std::cos(0.5 * pi * t); };
        m.divA = [](double, const Vec3&) { return 0.0; };
        if (name == "smooth-static") m.q = [](double, const Vec3& x) { return 1.0 + 0.5 * std::sin(pi * x[0]); };
    } else if (name == "smooth-q") {
        m.A = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
        m.q = [](double t, const Vec3& x) { return 1.0 + 0.5 * std::sin(pi * x[0]) * std::cos(0.5 * pi * t); };
        m.divA = [](double, const Vec3&) { return 0.0; };
    } else {
        throw PreconditionError("unknown coefficient fixture '" + name + "'");
    }
    return m;
}

std::vector<std::string> coefficient_fixture_names() { return {"zero", "smooth", "smooth-static", "smooth-q"}; }

GaugeModel gauge_fixture(const std::string& name, int n, double T, double amplitude) {
    GaugeModel g;
    g.name = name;
    const double c = amplitude;
    std::function<double(double)> s, ds;
    if (name == "zero") {
        s = [](double) { return 0.0; };
        ds = [](double) { return 0.0; };
    } else if (name == "bump") {
        s = [T](double t) { return t * (T - t); };
        ds = [T](double t) { return T - 2.0 * t; };
    } else if (name == "ramp") {
        s = [](double t) { return t; };
        ds = [](double) { return 1.0; };
    } else if (name == "static") {
        s = [](double) { return 1.0; };
        ds = [](double) { return 0.0; };
    } else {
        throw PreconditionError("unknown gauge fixture '" + name + "'");
    }
    g.psi = [=](double t, const Vec3& x) { return c * s(t) * bump(x, n); };
    g.grad = [=](double t, const Vec3& x) {
        Vec3 b = bump_grad(x, n);
        for (auto& v : b) v *= c * s(t);
        return b;
    };
    g.dt = [=](double t, const Vec3& x) { return c * ds(t) * bump(x, n); };
    g.lap = [=](double t, const Vec3& x) { return c * s(t) * bump_lap(x, n); };
    return g;
}

std::vector<std::string> gauge_fixture_names() { return {"zero", "bump", "ramp", "static"}; }

CoefficientModel gauge_model(const CoefficientModel& c, const GaugeModel& psi) {
    CoefficientModel m;
    m.name = c.name + "+grad(" + psi.name + ")";
    m.A = [c, psi](double t, const Vec3& x) {
        Vec3 a = c.A(t, x);
        const Vec3 g = psi.grad(t, x);
        for (int i = 0; i < 3; ++i) a[i] += g[i];
        return a;
    };
    m.q = [c, psi](double t, const Vec3& x) { return c.q(t, x) + psi.dt(t, x); };
    m.divA = [c, psi](double t, const Vec3& x) { return c.divA(t, x) + psi.lap(t, x); };
    return m;
}

CoefficientModel curl_partner(const CoefficientModel& c, int n, double amplitude) {
    CoefficientModel m = c;
    m.name = c.name + "+curl";
    m.A = [c, n, amplitude](double t, const Vec3& x) {
        Vec3 a = c.A(t, x);
        a[0] += amplitude * bump(x, n) * (1.0 + t);
        return a;
    };
    m.divA = [c, n, amplitude](double t, const Vec3& x) {
        return c.divA(t, x) + amplitude * bump_grad(x, n)[0] * (1.0 + t);
    };
    return m;
}

CoefficientModel rotation_partner(const CoefficientModel& c, int n, double amplitude) {
    CoefficientModel m = c;
    m.name = c.name + "+rotation";
    m.A = [c, n, amplitude](double t, const Vec3& x) {
        Vec3 a = c.A(t, x);
        const double b = amplitude * bump(x, n);
        a[0] += b * (x[1] - 0.5);
        a[1] -= b * (x[0] - 0.5);
        return a;
    };
    m.divA = [c, n, amplitude](double t, const Vec3& x) {
        const Vec3 g = bump_grad(x, n);
        return c.divA(t, x) + amplitude * (g[0] * (x[1] - 0.5) - g[1] * (x[0] - 0.5));
    };
    return m;
}

CoefficientModel q_partner(const CoefficientModel& c, int n, double T, double amplitude) {
    CoefficientModel m = c;
    m.name = c.name + "+q";
    m.q = [c, n, T, amplitude](double t, const Vec3& x) {
        return c.q(t, x) + amplitude * t * (T - t) * bump(x, n);
    };
    return m;
}

}  // namespace cgolab
