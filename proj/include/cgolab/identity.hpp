#pragma once

#include <vector>

#include "cgolab/cgo.hpp"
#include "cgolab/dnmap.hpp"
#include "cgolab/report.hpp"

namespace cgolab {

/// Both sides of  int (2(A1-A2).grad u2 + (q~2 - q~1) u2) conj(v1) = - int_{(0,T) x dOmega} d_nu u conj(v1)
/// where u solves the difference system with data f.
struct IdentityResult {
    Complex lhs;
    Complex rhs_full;   // - int over the whole lateral boundary
    Complex rhs_plus;   // - int over dOmega_{+,eps0}
    Complex rhs_front;  // - int over the front set F(x0)
    double residual = 0.0;       // |lhs - rhs_full| / (|lhs| + |rhs_full| + floor)
    double residual_plus = 0.0;  // same with rhs_plus
    double front_share = 0.0;    // front energy of d_nu u over its full energy
    double trace_energy = 0.0;   // int |d_nu u|^2 over the whole boundary
    double adjoint_defect = 0.0; // ||L1* v1|| / ||v1|| on interior nodes
    double cross_check = 0.0;    // difference system vs u1 - u2
};

/// v1 must vanish at t = T and c1, c2 must agree on the lateral boundary.
IdentityResult integral_identity_residual(const CoefficientPair& c1, const CoefficientPair& c2, const ComplexField& f,
                                          const ComplexField& v1, const BoundaryPartition& part,
                                          Scheme scheme = Scheme::crank_nicolson, double floor = 1e-14);

/// The four terms of  int Lu conj(v) - int u conj(L*v) + int d_nu u conj(v) - int u(T) conj(v(T)) = 0
/// for u vanishing on the lateral boundary and at t = 0.
struct GreenClosure {
    Complex volume, adjoint, lateral, terminal;
    double residual = 0.0;  // |sum| / sum of moduli
};
GreenClosure green_identity(const CoefficientPair& c, const ComplexField& u, const ComplexField& v,
                            const BoundaryPartition& part);

/// L u (forward) or L* u (adjoint) with one-sided stencils on boundary nodes as well.
ComplexField operator_everywhere(const CoefficientPair& c, const ComplexField& u, Direction direction);

/// Scan of B(h) = |int_{(0,T) x dOmega_{+,eps0}} d_nu u conj(v1)| with u2 a growing CGO for c2,
/// v1 a decaying CGO for c1 and u = u1 - u2 the response of c1 to the boundary values of u2.
struct BoundaryScanOptions {
    std::vector<double> h_list{0.4, 0.3, 0.2, 0.15, 0.1};
    TimeProfile m2 = profile_from_name("one");
    TimeProfile m1 = profile_from_name("one");
    Scheme scheme = Scheme::crank_nicolson;
    double min_slope = -0.7;
};
ScanReport boundary_term_scan(const CoefficientPair& c1, const CoefficientPair& c2, const CarlemanWeight& w,
                              const BoundaryPartition& part, const BoundaryScanOptions& opt = {});

/// Probe family g_lambda = exp(i lambda (varphi + i psi)), lambda = 1..count.
std::vector<FirstIntegral> g_family(const CarlemanWeight& w, const Grid& g, int count = 8);
/// Condition number of the L2(Omega) Gram matrix of a probe family after unit-diagonal scaling.
double gram_condition(const Grid& g, const std::vector<FirstIntegral>& family);

struct MomentOptions {
    int slice = -1;  // time level of the slice moment; -1 = middle level
    std::vector<double> h_list{0.4, 0.3, 0.2};
};

/// Moment of the coefficient difference against one probe.
struct MomentValue {
    Complex slice;               // M(g) at the slice level
    double slice_normalized = 0.0;  // |M| / int |integrand|
    Complex averaged;            // h -> 0 limit of int h^{-2/5} eta m1 m2 M_t dt (Richardson)
    double averaged_error = 0.0;
    double averaged_normalized = 0.0;
};

/// Transport exponents shared by all probes: Phi2 (growing, A2) and Phi1~ (decaying, A1).
struct MomentKernel {
    CarlemanWeight weight;
    ComplexField E;  // exp(conj(Phi1~) + Phi2)
    double transport_residual = 0.0;
    double time_variation = 0.0;  // max over levels of ||E_k - E_0|| / ||E_0||
};
MomentKernel moment_kernel(const CarlemanWeight& w, const RealField& A1, const RealField& A2);

/// M(g) = int_Omega g (A1 - A2).(grad varphi + i grad psi) E dx by composite Simpson quadrature.
MomentValue curl_moment(const CoefficientPair& c1, const CoefficientPair& c2, const MomentKernel& k,
                        const FirstIntegral& g, const TimeProfile& m2, const TimeProfile& m1,
                        const MomentOptions& opt = {});

/// H(x) = int_0^T (q3 - q2) m2 m3~ dt and its probe moments int H g E dx.
struct QRecovery {
    RealField H;  // single time level
    std::vector<Complex> moments;
    std::vector<double> moments_normalized;  // |moment| / int |g E| (scale of H is kept)
    double H_max = 0.0;
};
QRecovery recover_q(const CoefficientPair& c2, const CoefficientPair& c3, const MomentKernel& k,
                    const std::vector<FirstIntegral>& family, const TimeProfile& m2, const TimeProfile& m3,
                    double a_tol = 1e-10);

/// Gauge recovery: Psi solving Lap Psi = div(A2 - A1) on each slice with Psi = 0 on the boundary.
struct GaugeRecovery {
    RealField psi;
    RealField dt_psi;
    double max_psi = 0.0;
    double residual_a = 0.0;  // ||A2 - A1 - grad Psi|| / ||A2 - A1|| (zero when A1 = A2)
};
GaugeRecovery recover_gauge(const CoefficientPair& c1, const CoefficientPair& c2);

}  // namespace cgolab
