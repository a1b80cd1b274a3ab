#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cgolab/fields.hpp"

namespace cgolab {

/// Closed-form coefficients (A, q) that can be sampled on any grid.
struct CoefficientModel {
    std::string name;
    std::function<Vec3(double, const Vec3&)> A;
    std::function<double(double, const Vec3&)> q;
    std::function<double(double, const Vec3&)> divA;  // closed-form divergence

    CoefficientPair sample(const Grid& g) const;
};

/// Closed-form gauge function with first derivatives.
struct GaugeModel {
    std::string name;
    std::function<double(double, const Vec3&)> psi;
    std::function<Vec3(double, const Vec3&)> grad;
    std::function<double(double, const Vec3&)> dt;
    std::function<double(double, const Vec3&)> lap;

    GaugeFunction sample(const Grid& g) const;
};

/// prod_i sin^2(pi x_i) on the unit box (first derivatives vanish on the boundary).
double bump(const Vec3& x, int n);
Vec3 bump_grad(const Vec3& x, int n);
double bump_lap(const Vec3& x, int n);

/// Builtin coefficient fixtures: zero, smooth, smooth-static, smooth-q.
CoefficientModel coefficient_fixture(const std::string& name, int n);
std::vector<std::string> coefficient_fixture_names();

/// Builtin gauge functions: zero, bump (t(T-t) bump), ramp (t bump), static (bump).
GaugeModel gauge_fixture(const std::string& name, int n, double T, double amplitude = 1.0);
std::vector<std::string> gauge_fixture_names();

/// Gauge transform of a model: (A + grad Psi, q + d_t Psi) in closed form.
CoefficientModel gauge_model(const CoefficientModel& c, const GaugeModel& psi);

/// Curl-distinct partner: A2 = A1 + (beta(x) s(t), 0, 0) with beta = amplitude * bump, s(t) = 1 + t.
CoefficientModel curl_partner(const CoefficientModel& c, int n, double amplitude = 1.0);

/// Rotational partner: A2 = A1 + amplitude * (x2 - 1/2, -(x1 - 1/2), 0) bump.
CoefficientModel rotation_partner(const CoefficientModel& c, int n, double amplitude = 1.0);

/// q-partner: q3 = q2 + amplitude * t (T - t) bump, same A.
CoefficientModel q_partner(const CoefficientModel& c, int n, double T, double amplitude = 1.0);

}  // namespace cgolab
