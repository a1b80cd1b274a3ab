#pragma once

#include <cstdint>

#include "cgolab/report.hpp"
#include "cgolab/solver.hpp"

namespace cgolab {

/// Conormal data Lambda f = d_nu u + 2 (nu.A) u on the facets of a boundary subset.
struct DNTrace {
    BoundaryTrace<Complex> values;
    std::vector<char> mask;  // facets in the subset
    Subset subset = Subset::full;
    std::string provenance = "strong";
};

/// Conormal trace of an existing forward solution.
DNTrace dn_trace_of(const CoefficientPair& c, const ComplexField& u, const BoundaryPartition& part,
                    Subset subset = Subset::full);

/// Solves the forward problem with Dirichlet data f and extracts the conormal trace.
DNTrace dn_strong(const CoefficientPair& c, const ComplexField& f, const BoundaryPartition& part,
                  Subset subset = Subset::full, Scheme scheme = Scheme::crank_nicolson, ComplexField* u_out = nullptr);

/// Volume form of <Lambda f, v> over Omega_T; v must vanish at t = T.
Complex dn_weak(const CoefficientPair& c, const ComplexField& f, const ComplexField& v,
                Scheme scheme = Scheme::crank_nicolson);
/// Volume form for an already computed forward solution u.
Complex dn_weak_of(const CoefficientPair& c, const ComplexField& u, const ComplexField& v);

/// Boundary quadrature of trace * conj(v) over (0,T) x subset.
Complex dn_pair(const Grid& g, const BoundaryPartition& part, const DNTrace& tr, const ComplexField& v);

/// L2 norm over (0,T) x mask of a boundary trace.
double trace_norm(const Grid& g, const BoundaryPartition& part, const BoundaryTrace<Complex>& tr,
                  const std::vector<char>& mask);

/// ||a - b|| / ||a|| on the subset of a (zero when both vanish).
double relative_trace_difference(const Grid& g, const BoundaryPartition& part, const DNTrace& a, const DNTrace& b);

/// Eight (by default) Dirichlet data t^2 (T - t) exp(-|x - c|^2 / (2 s^2)) with seeded centres c on
/// the boundary and widths s in [0.15, 0.35].
std::vector<ComplexField> f_bank(const Grid& g, std::uint64_t seed = 2024, int count = 8);

/// Max over the bank of the subset-restricted relative trace difference, judged against tol.
ScanReport compare_partial(const CoefficientPair& c1, const CoefficientPair& c2, const std::vector<ComplexField>& bank,
                           const BoundaryPartition& part, Subset subset, double tol = 1e-3,
                           Scheme scheme = Scheme::crank_nicolson);

/// CSV rows t, x1..xn, re, im for the facets in the trace's subset.
void write_trace_csv(const std::string& path, const Grid& g, const BoundaryPartition& part, const DNTrace& tr);
/// CDF1 file with shape [levels, facets] (values outside the subset are zero).
void write_trace_cdf1(const std::string& path, const Grid& g, const DNTrace& tr);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw (portable across standard libraries).
double unit_uniform(std::uint64_t bits);

}  // namespace cgolab
