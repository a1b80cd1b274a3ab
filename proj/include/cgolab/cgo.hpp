#pragma once

#include <functional>
#include <string>
#include <utility>

#include "cgolab/solver.hpp"

namespace cgolab {

/// Carleman weight family (x0, omega, h, eps, T): varphi = log|x - x0|, its
/// convexification varphi + eps*varphi^2/2, the angular phase psi and the time factor eta.
struct CarlemanWeight {
    int n = 3;
    Vec3 x0{-2.0, 0.5, 0.5};
    Vec3 omega{0.0, 0.0, 1.0};
    double h = 0.2;
    double eps = 0.0;
    double T = 1.0;
    double eta_power = 0.4;

    static CarlemanWeight for_domain(const Domain& d, double h, Vec3 omega = {0.0, 0.0, 1.0}, double eps = 0.0);

    /// Checks |omega| = 1, h > 0 and that psi is smooth at every node of the grid.
    void validate(const Grid& g) const;
    /// h^{p} T^2 >= pi/2: eta is no longer monotone on [0, T].
    bool too_large() const;
};

struct PhiValue {
    double value = 0.0;
    Vec3 grad{};
    double lap = 0.0;
};
using PsiValue = PhiValue;

struct EtaValue {
    double value = 0.0;
    double dt = 0.0;
};

PhiValue phi_eval(const CarlemanWeight& w, const Vec3& x);
/// Convexified weight varphi_eps = varphi + eps*varphi^2/2.
PhiValue phi_eps_eval(const CarlemanWeight& w, const Vec3& x);
/// psi = arccos(omega . (x - x0)/|x - x0|); throws when the direction is within 1e-8 of +-omega.
PsiValue psi_eval(const CarlemanWeight& w, const Vec3& x);
/// Value of psi alone; defined everywhere off x0 (0 on the ray along omega, pi on the opposite ray).
double psi_angle(const CarlemanWeight& w, const Vec3& x);
EtaValue eta_eval(const CarlemanWeight& w, double t);

/// rho = varphi + i psi (growing) or -varphi + i psi (decaying), with gradient and Laplacian.
struct RhoValue {
    Complex value;
    std::array<Complex, 3> grad{};
    Complex lap;
};
RhoValue rho_eval(const CarlemanWeight& w, const Vec3& x, bool decaying = false);

struct TransportResult {
    ComplexField Phi;
    double residual = 0.0;  // max over levels of the relative collocation residual
    long iterations = 0;
};

/// Least-squares collocation solve of
///   growing:  2 rho'.grad Phi = -Lap rho - 2 A.rho'
///   decaying: 2 rho~'.grad Phi~ = -Lap rho~ + 2 A.rho~'
/// on each time level (levels with identical A share one solve).
TransportResult solve_transport(const CarlemanWeight& w, const RealField& A, bool decaying = false);

/// Relative collocation residual of the transport equation for a given Phi, by geometry stencils.
double transport_residual(const CarlemanWeight& w, const RealField& A, const ComplexField& Phi, bool decaying = false);

/// Entire function G with its derivative.
using Entire = std::function<std::pair<Complex, Complex>(Complex)>;
/// G(z) = exp(i*lambda*z).
Entire exp_mode(double lambda);

struct FirstIntegral {
    ComplexField g;          // G(varphi + i psi), constant in time
    double annihilation = 0.0;  // max |rho'.grad g| / max |g| with closed-form gradients
};
FirstIntegral first_integral(const CarlemanWeight& w, const Grid& grid, const Entire& G);

/// Non-vanishing time profile m(t).
struct TimeProfile {
    std::string name;
    std::function<double(double)> m;
    std::function<double(double)> dm;
};
TimeProfile profile_from_name(const std::string& name);
/// {one, exp+, exp-, ramp}: 1, e^t, e^-t, 1 + t/2.
std::vector<TimeProfile> default_profiles();

/// Smooth step vanishing to all orders at s <= 0 and equal to 1 for s >= 1.
double smooth_step(double s);

/// Pointwise jet of a scalar trial function.
struct Jet {
    Complex v;
    std::array<Complex, 3> g{};
    Complex lap;
    Complex dt;
};
using JetFn = std::function<Jet(double, const Vec3&)>;
using VectorFn = std::function<Vec3(double, const Vec3&)>;

/// Decomposition of e^{s phi/h} h^2 (d_t - Lap - 2A.grad) e^{-s phi/h} u with the space-time
/// weight phi = varphi_eps(x) eta(t), s = +-1:  sum = P u + i Q u + i R_t u + S u.
struct ConjugatedParts {
    Complex P, Q, Rt, S, sum;
};
ConjugatedParts conjugated_apply(const CarlemanWeight& w, const Vec3& A, const Jet& u, double t, const Vec3& x,
                                 double sign = 1.0);
/// The same operator applied by fourth-order central differences of the composite e^{-s phi/h} u.
Complex direct_conjugation(const CarlemanWeight& w, const VectorFn& A, const std::function<Complex(double, const Vec3&)>& u,
                           double t, const Vec3& x, double sign = 1.0, double step = 1e-3);

/// Field version with geometry stencils; fields P, Q, Rt, S, sum.
struct ConjugatedFields {
    ComplexField P, Q, Rt, S, sum;
};
ConjugatedFields conjugated_apply(const CarlemanWeight& w, const RealField& A, const ComplexField& u, double sign = 1.0);

enum class CGOKind { growing, decaying };
std::string to_string(CGOKind k);

struct CGOOptions {
    bool cutoff = true;
    double cutoff_fraction = 0.1;
};

struct CGOMetrics {
    double amplitude_residual = 0.0;         // with the time cutoff
    double amplitude_residual_nocut = 0.0;   // m e^Phi without cutoff
    double remainder_h1 = 0.0;               // h ||r||_{L2(0,T;H1_scl)}
    double remainder_l2 = 0.0;
    double full_residual = 0.0;              // conjugated residual of a + r, discrete scheme
    double transport_residual = 0.0;
    double end_value = 0.0;                  // max |u(0)| (growing) or |v(T)| (decaying)
    bool unstable_h = false;
};

struct CGOSolution {
    CGOKind kind = CGOKind::growing;
    CarlemanWeight weight;
    std::string profile;
    ComplexField Phi;
    ComplexField amplitude;  // cutoff * m * e^Phi
    ComplexField remainder;
    ComplexField u;          // e^{rho eta/h}(a + r)
    CGOMetrics metrics;
};

/// Conjugated operator as a StepSystem for the growing (forward, L) or decaying (backward, L*) kind.
StepSystem<Complex> conjugated_system(const CarlemanWeight& w, const CoefficientPair& c, CGOKind kind);

CGOSolution build_cgo(const CarlemanWeight& w, const CoefficientPair& c, const TimeProfile& m, CGOKind kind,
                      const CGOOptions& opt = {});

/// Writes <prefix>.cdf1 (assembled u) and <prefix>.json (weight and metrics).
void export_cgo(const std::string& prefix, const CGOSolution& sol);

}  // namespace cgolab
