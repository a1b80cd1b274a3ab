#pragma once

#include <vector>

#include "cgolab/fields.hpp"

namespace cgolab {

enum class Scheme { backward_euler, crank_nicolson };
enum class Direction { forward, adjoint };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct SolveStats {
    int steps = 0;
    long iterations = 0;
    double max_residual = 0.0;
};

/// One implicit theta-step family for  beta*d_t u + K u = s  (forward) or
/// -beta*d_t u + K u = s  (backward), with  K u = -alpha*Lap u + b.grad u + c u.
/// Boundary rows are Dirichlet identity rows taking values from `boundary`.
template <class T>
struct StepSystem {
    double beta = 1.0;
    double alpha = 1.0;
    Field<T> b;         // arity n; empty means zero
    Field<T> c;         // scalar; empty means zero
    Field<T> source;    // scalar; empty means zero
    Field<T> boundary;  // scalar; empty means zero
    std::vector<T> start;  // slice at the starting level; empty means zero
    bool backward = false;
    double theta = 0.5;
};

/// Time-marches a StepSystem with BiCGSTAB + incomplete LU at relative tolerance 1e-10.
template <class T>
Field<T> march(const Grid& g, const StepSystem<T>& sys, SolveStats* stats = nullptr);

/// Residual of the discrete scheme applied to u at every non-starting level; zero on boundary rows.
template <class T>
Field<T> scheme_residual(const Grid& g, const StepSystem<T>& sys, const Field<T>& u);

/// Forward IBVP for L_{A,q} = d_t - Lap - 2A.grad + q~, or the adjoint terminal-value
/// problem for L* = -d_t - Lap + 2A.grad + div A - |A|^2 + q.
template <class T>
struct ParabolicProblem {
    CoefficientPair coeffs;
    Field<T> dirichlet;         // lateral boundary data; empty means zero
    Field<T> source;            // empty means zero
    std::vector<T> condition;   // initial (forward) or terminal (adjoint) slice; empty means zero
    Direction direction = Direction::forward;
};

/// Zeroth-order coefficient of L*: div A - |A|^2 + q.
RealField adjoint_potential(const CoefficientPair& c);

template <class T>
Field<T> solve(const ParabolicProblem<T>& p, Scheme scheme = Scheme::crank_nicolson, SolveStats* stats = nullptr);

/// L_{A,q} u (forward) or L*_{A,q} u (adjoint) by discrete stencils, zero on boundary nodes.
template <class T>
Field<T> apply_operator(const CoefficientPair& c, const Field<T>& u, Direction direction = Direction::forward);

template <class T>
struct DifferenceSolution {
    Field<T> u;   // solution of the difference system
    Field<T> u1;  // direct solve with c1
    Field<T> u2;  // direct solve with c2
    double cross_check = 0.0;  // ||u - (u1 - u2)|| / ||u1 - u2||, zero when both vanish
};

/// Solves L_{A1,q1} u = 2(A1 - A2).grad u2 + (q~2 - q~1) u2 with zero data.
template <class T>
DifferenceSolution<T> solve_difference(const CoefficientPair& c1, const CoefficientPair& c2, const Field<T>& f,
                                    Scheme scheme = Scheme::crank_nicolson, double boundary_tol = 1e-10);

/// Dirichlet problem Lap psi = rhs on one spatial slice, psi = boundary on the boundary nodes.
std::vector<double> solve_poisson(const Grid& g, std::span<const double> rhs, std::span<const double> boundary);

}  // namespace cgolab
