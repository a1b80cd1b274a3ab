#include "cgolab/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace cgolab {

std::string to_string(Scheme s) { return s == Scheme::backward_euler ? "backward_euler" : "crank_nicolson"; }

Scheme scheme_from_string(const std::string& name) {
    if (name == "backward_euler" || name == "be") return Scheme::backward_euler;
    if (name == "crank_nicolson" || name == "cn") return Scheme::crank_nicolson;
    throw PreconditionError("unknown scheme '" + name + "'");
}

namespace {

template <class T>
using SpMat = Eigen::SparseMatrix<T, Eigen::RowMajor>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
T at_or_zero(const Field<T>& f, int level, std::size_t node, int comp = 0) {
    return f.size() ? f(level, node, comp) : T{};
}

// Interior rows of K at one level; boundary rows left empty.
template <class T>
SpMat<T> assemble_k(const Grid& g, const StepSystem<T>& sys, int level) {
    const std::size_t N = g.spatial_size();
    const int n = g.dim();
    std::vector<Eigen::Triplet<T>> trip;
    trip.reserve(N * (2 * n + 1));
    for (std::size_t s = 0; s < N; ++s) {
        if (g.on_boundary(s)) continue;
        T diag = at_or_zero(sys.c, level, s);
        for (int a = 0; a < n; ++a) {
            const double dx = g.dx(a);
            const std::size_t st = g.stride(a);
            const T ba = at_or_zero(sys.b, level, s, a);
            const T lo = -sys.alpha / (dx * dx) - ba / (2.0 * dx);
            const T hi = -sys.alpha / (dx * dx) + ba / (2.0 * dx);
            diag += 2.0 * sys.alpha / (dx * dx);
            trip.emplace_back(static_cast<int>(s), static_cast<int>(s - st), lo);
            trip.emplace_back(static_cast<int>(s), static_cast<int>(s + st), hi);
        }
        trip.emplace_back(static_cast<int>(s), static_cast<int>(s), diag);
    }
    SpMat<T> K(static_cast<int>(N), static_cast<int>(N));
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

template <class T>
Vec<T> slice_vec(const Field<T>& f, int level) {
    Vec<T> v(static_cast<int>(f.grid().spatial_size()));
    auto s = f.slice(level);
    for (int i = 0; i < v.size(); ++i) v[i] = s[i];
    return v;
}

// Jacobi-preconditioned BiCGSTAB first; incomplete LU when that stagnates.
template <class T>
Vec<T> bicgstab_solve(const SpMat<T>& lhs, const Vec<T>& rhs, const Vec<T>& guess, long& iterations) {
    Eigen::BiCGSTAB<SpMat<T>, Eigen::DiagonalPreconditioner<T>> jacobi;
    jacobi.setTolerance(1e-10);
    jacobi.setMaxIterations(1000);
    jacobi.compute(lhs);
    Vec<T> x = jacobi.solveWithGuess(rhs, guess);
    iterations += jacobi.iterations();
    if (jacobi.info() == Eigen::Success) return x;

    Eigen::BiCGSTAB<SpMat<T>, Eigen::IncompleteLUT<T>> ilu;
    ilu.setTolerance(1e-10);
    ilu.setMaxIterations(2000);
    ilu.preconditioner().setDroptol(1e-6);
    ilu.compute(lhs);
    if (ilu.info() != Eigen::Success) throw SolverError("incomplete LU setup failed", 1.0);
    x = ilu.solveWithGuess(rhs, guess);
    iterations += ilu.iterations();
    return x;
}

template <class T>
void check_system(const Grid& g, const StepSystem<T>& sys) {
    auto chk = [&](const Field<T>& f, int arity, const char* what) {
        if (f.size() && (!f.grid().same_shape(g) || f.arity() != arity)) {
            throw PreconditionError(std::string("step system: ") + what + " has the wrong shape");
        }
    };
    chk(sys.b, g.dim(), "drift");
    chk(sys.c, 1, "potential");
    chk(sys.source, 1, "source");
    chk(sys.boundary, 1, "boundary data");
    if (!sys.start.empty() && sys.start.size() != g.spatial_size()) {
        throw PreconditionError("step system: starting slice has the wrong size");
    }
    if (!(sys.theta >= 0.5 && sys.theta <= 1.0)) throw PreconditionError("theta must lie in [0.5, 1]");
}

}  // namespace

template <class T>
Field<T> march(const Grid& g, const StepSystem<T>& sys, SolveStats* stats) {
    check_system(g, sys);
    const int nt = g.nt();
    const int N = static_cast<int>(g.spatial_size());
    const double th = sys.theta;
    const double m = sys.beta / g.dt();
    Field<T> u(g, 1);

    const int first = sys.backward ? nt : 0;
    const int step = sys.backward ? -1 : 1;
    if (!sys.start.empty()) std::copy(sys.start.begin(), sys.start.end(), u.slice(first).begin());

    SolveStats local;
    SpMat<T> k_from = assemble_k(g, sys, first);
    for (int i = 1; i <= nt; ++i) {
        const int from = first + step * (i - 1);
        const int to = first + step * i;
        SpMat<T> k_to = assemble_k(g, sys, to);

        Vec<T> uf = slice_vec(u, from);
        Vec<T> rhs = m * uf;
        if (th < 1.0) rhs -= (1.0 - th) * (k_from * uf);
        if (sys.source.size()) rhs += th * slice_vec(sys.source, to) + (1.0 - th) * slice_vec(sys.source, from);

        SpMat<T> lhs = th * k_to;
        std::vector<Eigen::Triplet<T>> diag;
        diag.reserve(N);
        for (int s = 0; s < N; ++s) {
            if (g.on_boundary(s)) {
                diag.emplace_back(s, s, T(1.0));
                rhs[s] = at_or_zero(sys.boundary, to, s);
            } else {
                diag.emplace_back(s, s, T(m));
            }
        }
        SpMat<T> id(N, N);
        id.setFromTriplets(diag.begin(), diag.end());
        lhs += id;
        lhs.makeCompressed();

        long its = 0;
        Vec<T> x = bicgstab_solve(lhs, rhs, uf, its);
        const double res = rhs.norm() > 0 ? (rhs - lhs * x).norm() / rhs.norm() : 0.0;
        if (!(res <= 1e-8)) throw SolverError("time step " + std::to_string(i) + " did not converge", res);
        local.iterations += its;
        local.max_residual = std::max(local.max_residual, res);
        std::copy(x.data(), x.data() + N, u.slice(to).begin());
        k_from = std::move(k_to);
    }
    local.steps = nt;
    if (stats) *stats = local;
    if (!u.all_finite()) throw SolverError("non-finite values in the solution", 0.0);
    return u;
}

template <class T>
Field<T> scheme_residual(const Grid& g, const StepSystem<T>& sys, const Field<T>& u) {
    check_system(g, sys);
    const int nt = g.nt();
    const double th = sys.theta;
    const double m = sys.beta / g.dt();
    const int first = sys.backward ? nt : 0;
    const int step = sys.backward ? -1 : 1;
    Field<T> out(g, 1);
    SpMat<T> k_from = assemble_k(g, sys, first);
    for (int i = 1; i <= nt; ++i) {
        const int from = first + step * (i - 1);
        const int to = first + step * i;
        SpMat<T> k_to = assemble_k(g, sys, to);
        Vec<T> uf = slice_vec(u, from), ut = slice_vec(u, to);
        Vec<T> r = m * (ut - uf) + th * (k_to * ut) + (1.0 - th) * (k_from * uf);
        if (sys.source.size()) r -= th * slice_vec(sys.source, to) + (1.0 - th) * slice_vec(sys.source, from);
        auto o = out.slice(to);
        for (std::size_t s = 0; s < g.spatial_size(); ++s) o[s] = g.on_boundary(s) ? T{} : r[static_cast<int>(s)];
        k_from = std::move(k_to);
    }
    return out;
}

RealField adjoint_potential(const CoefficientPair& c) {
    const Grid& g = c.grid();
    RealField out = c.q + ops::divergence(c.A);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            double a2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) a2 += c.A(k, s, d) * c.A(k, s, d);
            out(k, s) -= a2;
        }
    }
    return out;
}

namespace {

template <class T>
Field<T> cast_field(const RealField& f) {
    if constexpr (std::is_same_v<T, double>) {
        return f;
    } else {
        return to_complex(f);
    }
}

template <class T>
StepSystem<T> problem_system(const ParabolicProblem<T>& p, Scheme scheme) {
    const Grid& g = p.coeffs.grid();
    StepSystem<T> sys;
    const bool fwd = p.direction == Direction::forward;
    sys.b = cast_field<T>(p.coeffs.A);
    sys.b *= T(fwd ? -2.0 : 2.0);
    sys.c = cast_field<T>(fwd ? effective_potential(p.coeffs) : adjoint_potential(p.coeffs));
    sys.source = p.source;
    sys.boundary = p.dirichlet;
    sys.start = p.condition;
    sys.backward = !fwd;
    sys.theta = scheme == Scheme::crank_nicolson ? 0.5 : 1.0;
    (void)g;
    return sys;
}

}  // namespace

template <class T>
Field<T> solve(const ParabolicProblem<T>& p, Scheme scheme, SolveStats* stats) {
    const Grid& g = p.coeffs.grid();
    if (g.nt() < 8) throw PreconditionError("dt must not exceed T/8 (nt >= 8)");
    const int lvl = p.direction == Direction::forward ? 0 : g.nt();
    if (p.dirichlet.size()) {
        if (!p.dirichlet.grid().same_shape(g) || p.dirichlet.arity() != 1) {
            throw PreconditionError("boundary data has the wrong shape");
        }
        const double scale = std::max(1.0, p.dirichlet.max_abs());
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (!g.on_boundary(s)) continue;
            const T want = p.condition.empty() ? T{} : p.condition[s];
            if (std::abs(p.dirichlet(lvl, s) - want) > 1e-12 * scale) {
                throw PreconditionError(p.direction == Direction::forward
                                            ? "boundary data must vanish at t = 0"
                                            : "boundary data must match the terminal condition at t = T");
            }
        }
    }
    return march(g, problem_system(p, scheme), stats);
}

template <class T>
Field<T> apply_operator(const CoefficientPair& c, const Field<T>& u, Direction direction) {
    const Grid& g = c.grid();
    const bool fwd = direction == Direction::forward;
    const RealField pot = fwd ? effective_potential(c) : adjoint_potential(c);
    Field<T> ut = ops::time_derivative(u);
    Field<T> lap = ops::laplacian(u);
    Field<T> gr = ops::grad(u);
    Field<T> out(g, 1);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (g.on_boundary(s)) continue;
            T drift{};
            for (int a = 0; a < g.dim(); ++a) drift += c.A(k, s, a) * gr(k, s, a);
            out(k, s) = (fwd ? ut(k, s) : -ut(k, s)) - lap(k, s) + (fwd ? -2.0 : 2.0) * drift + pot(k, s) * u(k, s);
        }
    }
    return out;
}

template <class T>
DifferenceSolution<T> solve_difference(const CoefficientPair& c1, const CoefficientPair& c2, const Field<T>& f,
                                       Scheme scheme, double boundary_tol) {
    const double mis = c1.boundary_mismatch(c2);
    if (mis > boundary_tol) {
        throw PreconditionError("coefficient pairs differ on the lateral boundary by " + std::to_string(mis));
    }
    const Grid& g = c1.grid();
    DifferenceSolution<T> out;
    ParabolicProblem<T> p2{c2, f, {}, {}, Direction::forward};
    out.u2 = solve(p2, scheme);
    ParabolicProblem<T> p1{c1, f, {}, {}, Direction::forward};
    out.u1 = solve(p1, scheme);

    const RealField dq = effective_potential(c2) - effective_potential(c1);
    const Field<T> gu2 = ops::grad(out.u2);
    Field<T> src(g, 1);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            T v = dq(k, s) * out.u2(k, s);
            for (int a = 0; a < g.dim(); ++a) v += 2.0 * (c1.A(k, s, a) - c2.A(k, s, a)) * gu2(k, s, a);
            src(k, s) = v;
        }
    }
    ParabolicProblem<T> pd{c1, {}, src, {}, Direction::forward};
    out.u = solve(pd, scheme);
    const Field<T> direct = out.u1 - out.u2;
    const double den = norm(direct, NormKind::l2);
    const double num = norm(out.u - direct, NormKind::l2);
    out.cross_check = den > 0 ? num / den : num;
    return out;
}

std::vector<double> solve_poisson(const Grid& g, std::span<const double> rhs, std::span<const double> boundary) {
    const std::size_t N = g.spatial_size();
    if (rhs.size() != N || boundary.size() != N) throw PreconditionError("poisson: slice size mismatch");
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b(static_cast<int>(N));
    for (std::size_t s = 0; s < N; ++s) {
        const int i = static_cast<int>(s);
        if (g.on_boundary(s)) {
            trip.emplace_back(i, i, 1.0);
            b[i] = boundary[s];
            continue;
        }
        double diag = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double w = 1.0 / (g.dx(a) * g.dx(a));
            trip.emplace_back(i, static_cast<int>(s - g.stride(a)), w);
            trip.emplace_back(i, static_cast<int>(s + g.stride(a)), w);
            diag -= 2.0 * w;
        }
        trip.emplace_back(i, i, diag);
        b[i] = rhs[s];
    }
    Eigen::SparseMatrix<double> L(static_cast<int>(N), static_cast<int>(N));
    L.setFromTriplets(trip.begin(), trip.end());
    L.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(L);
    if (lu.info() != Eigen::Success) throw SolverError("poisson factorization failed", 1.0);
    Eigen::VectorXd x = lu.solve(b);
    const double res = b.norm() > 0 ? (L * x - b).norm() / b.norm() : (L * x).norm();
    if (!(res <= 1e-8)) throw SolverError("poisson solve inaccurate", res);
    return {x.data(), x.data() + N};
}

template Field<double> march<double>(const Grid&, const StepSystem<double>&, SolveStats*);
template Field<Complex> march<Complex>(const Grid&, const StepSystem<Complex>&, SolveStats*);
template Field<double> scheme_residual<double>(const Grid&, const StepSystem<double>&, const Field<double>&);
template Field<Complex> scheme_residual<Complex>(const Grid&, const StepSystem<Complex>&, const Field<Complex>&);
template Field<double> solve<double>(const ParabolicProblem<double>&, Scheme, SolveStats*);
template Field<Complex> solve<Complex>(const ParabolicProblem<Complex>&, Scheme, SolveStats*);
template DifferenceSolution<double> solve_difference<double>(const CoefficientPair&, const CoefficientPair&,
                                                             const Field<double>&, Scheme, double);
template DifferenceSolution<Complex> solve_difference<Complex>(const CoefficientPair&, const CoefficientPair&,
                                                               const Field<Complex>&, Scheme, double);
template Field<double> apply_operator<double>(const CoefficientPair&, const Field<double>&, Direction);
template Field<Complex> apply_operator<Complex>(const CoefficientPair&, const Field<Complex>&, Direction);

}  // namespace cgolab
