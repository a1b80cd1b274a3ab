#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgolab/fixtures.hpp"
#include "cgolab/identity.hpp"

namespace cgolab {

struct Tolerances {
    double eikonal = 1e-10;
    double conjugation = 1e-6;
    double dn = 1e-2;                // gauge-pair relative trace difference
    double refinement_factor = 3.0;  // required decrease per doubling
    double separation = 10.0;        // curl-distinct over gauge level
    double slope_lo = 1.25;
    double slope_hi = 1.55;
    double carleman_growth = 0.1;
    double identity = 0.02;
    double front_share = 0.05;
    double boundary_slope = -0.7;
    double moment = 1e-3;
    double moment_curl = 1e-2;
    double h_recovery = 0.03;
    double psi = 1e-10;
    double gauge_recovery = 0.05;
    double mms_order = 1.9;
};

/// Fully resolved parameters shared by every experiment.
struct ExperimentConfig {
    Domain domain = Domain::unit_cube();
    int nx = 17;
    int nt = 32;
    std::string base = "smooth";
    std::string gauge = "bump";
    double gauge_amplitude = 1.0;
    std::string partner = "curl";  // curl | rotation
    double partner_amplitude = 1.0;
    Vec3 omega{0.0, 0.0, 1.0};
    double h = 0.2;
    std::vector<double> h_list{0.4, 0.3, 0.2, 0.15, 0.1};
    double eps = 0.0;         // convexification for CGO weights
    double eps_factor = 1.0;  // Carleman scans use eps = eps_factor * h
    double eta_power = 0.4;
    double epsilon0 = -1.0;   // < 0: default_epsilon0(grid)
    Scheme scheme = Scheme::crank_nicolson;
    std::uint64_t seed = 2024;
    int trials = 20;
    int bank_size = 8;
    std::string side = "interior";  // interior | boundary
    std::string sign = "plus";      // plus | minus
    CGOKind kind = CGOKind::growing;
    std::string m2 = "one";
    std::string m1 = "one";
    bool refine = true;
    bool separation = true;
    Tolerances tol;
    std::vector<std::string> warnings;

    Grid grid() const;
    CarlemanWeight weight(double hh) const;
    BoundaryPartition partition(const Grid& g) const;
    json to_json() const;
};

/// One Carleman LHS/RHS evaluation for a trial with closed-form jets.
struct CarlemanValue {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double boundary_minus = 0.0;  // h^3 <-(grad phi.nu)|e d_nu u|^2> over the incoming part
    double boundary_plus = 0.0;   // h^3 <(grad phi.nu)|e d_nu u|^2> over the outgoing part
};

enum class CarlemanSide { interior, boundary };

/// Interior: h(||e u|| + ||h grad(e u)||) / ||e h^2 L u||.  Boundary: sqrt of the two sides of the
/// boundary estimate with C0 = 1.  e = exp(sign * varphi_eps * eta / h).
CarlemanValue carleman_ratio(const CoefficientModel& c, const Grid& g, const CarlemanWeight& w, CarlemanSide side,
                             double sign, const JetFn& u);

/// Seeded trial fields: C-infinity space-time bumps with a plane-wave phase (interior) or
/// t^2 prod sin(pi x) times a Gaussian and a phase (boundary).
JetFn carleman_trial(const Grid& g, CarlemanSide side, std::uint64_t seed, int index);

ScanReport carleman_scan(const ExperimentConfig& cfg);
ScanReport cgo_scan(const ExperimentConfig& cfg);
ScanReport eikonal_check(const ExperimentConfig& cfg);
ScanReport conjugation_check(const ExperimentConfig& cfg);
ScanReport gauge_check(const ExperimentConfig& cfg);
ScanReport identity_check(const ExperimentConfig& cfg);
ScanReport boundary_scan(const ExperimentConfig& cfg);
ScanReport moment_check(const ExperimentConfig& cfg);
ScanReport recover_a(const ExperimentConfig& cfg);
ScanReport recover_q_check(const ExperimentConfig& cfg);
ScanReport solver_check(const ExperimentConfig& cfg);
/// theorem1 | corollary2 | corollary3
ScanReport scenario(const std::string& name, const ExperimentConfig& cfg);

/// Coefficient pair (c1, c2) named by the config: base and its gauge transform or its partner.
CoefficientModel base_model(const ExperimentConfig& cfg);
CoefficientModel gauge_pair_model(const ExperimentConfig& cfg);
CoefficientModel partner_model(const ExperimentConfig& cfg);

}  // namespace cgolab
