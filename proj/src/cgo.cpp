#include "cgolab/cgo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "cgolab/io.hpp"

namespace cgolab {

namespace {

constexpr Complex I{0.0, 1.0};

Vec3 minus(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

}  // namespace

CarlemanWeight CarlemanWeight::for_domain(const Domain& d, double h, Vec3 omega, double eps) {
    CarlemanWeight w;
    w.n = d.n;
    w.x0 = d.x0;
    w.T = d.T;
    w.h = h;
    w.eps = eps;
    if (d.n == 2 && omega[2] != 0.0) omega = {0.0, 1.0, 0.0};
    w.omega = omega;
    return w;
}

void CarlemanWeight::validate(const Grid& g) const {
    if (g.dim() != n) throw PreconditionError("weight dimension does not match the grid");
    if (!(h > 0.0)) throw PreconditionError("h must be positive");
    if (!(eps >= 0.0)) throw PreconditionError("eps must be non-negative");
    if (!(T > 0.0)) throw PreconditionError("T must be positive");
    if (std::abs(std::sqrt(dot(omega, omega)) - 1.0) > 1e-12) throw PreconditionError("omega must be a unit vector");
    for (int a = n; a < 3; ++a) {
        if (omega[a] != 0.0) throw PreconditionError("omega has components beyond the spatial dimension");
    }
    for (std::size_t s = 0; s < g.spatial_size(); ++s) psi_eval(*this, g.point(s));
}

bool CarlemanWeight::too_large() const { return std::pow(h, eta_power) * T * T >= std::numbers::pi / 2; }

PhiValue phi_eval(const CarlemanWeight& w, const Vec3& x) {
    const Vec3 y = minus(x, w.x0);
    const double r2 = dot(y, y);
    return {0.5 * std::log(r2), {y[0] / r2, y[1] / r2, y[2] / r2}, (w.n - 2) / r2};
}

PhiValue phi_eps_eval(const CarlemanWeight& w, const Vec3& x) {
    PhiValue p = phi_eval(w, x);
    if (w.eps == 0.0) return p;
    const double f = 1.0 + w.eps * p.value;
    PhiValue out;
    out.value = p.value + 0.5 * w.eps * p.value * p.value;
    for (int a = 0; a < 3; ++a) out.grad[a] = f * p.grad[a];
    out.lap = f * p.lap + w.eps * dot(p.grad, p.grad);
    return out;
}

PsiValue psi_eval(const CarlemanWeight& w, const Vec3& x) {
    const Vec3 y = minus(x, w.x0);
    const double r2 = dot(y, y);
    const double r = std::sqrt(r2);
    const double c = dot(w.omega, y) / r;
    if (1.0 - std::abs(c) < 1e-8) throw PreconditionError("psi is singular: (x - x0)/|x - x0| is aligned with +-omega");
    const double s = std::sqrt(1.0 - c * c);
    PsiValue p;
    p.value = std::acos(c);
    for (int a = 0; a < 3; ++a) p.grad[a] = -(w.omega[a] - c * y[a] / r) / (r * s);
    p.lap = (w.n - 2) * c / (r2 * s);
    return p;
}

double psi_angle(const CarlemanWeight& w, const Vec3& x) {
    const Vec3 y = minus(x, w.x0);
    const double r = std::sqrt(dot(y, y));
    if (r == 0.0) throw PreconditionError("psi is undefined at x0");
    return std::acos(std::clamp(dot(w.omega, y) / r, -1.0, 1.0));
}

EtaValue eta_eval(const CarlemanWeight& w, double t) {
    const double a = std::pow(w.h, w.eta_power);
    const double tau = w.T - t;
    return {std::sin(a * tau * tau), -2.0 * a * tau * std::cos(a * tau * tau)};
}

RhoValue rho_eval(const CarlemanWeight& w, const Vec3& x, bool decaying) {
    const PhiValue p = phi_eval(w, x);
    const PsiValue q = psi_eval(w, x);
    const double s = decaying ? -1.0 : 1.0;
    RhoValue r;
    r.value = Complex(s * p.value, q.value);
    for (int a = 0; a < 3; ++a) r.grad[a] = Complex(s * p.grad[a], q.grad[a]);
    r.lap = Complex(s * p.lap, q.lap);
    return r;
}

namespace {

using CSpMat = Eigen::SparseMatrix<Complex>;
using CVec = Eigen::VectorXcd;

// 2 rho'.grad_h with the geometry first-derivative stencils.
CSpMat transport_matrix(const Grid& g, const std::vector<RhoValue>& rho) {
    const std::size_t N = g.spatial_size();
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(N * g.dim() * 3);
    for (std::size_t s = 0; s < N; ++s) {
        const auto idx = g.multi_index(s);
        const int row = static_cast<int>(s);
        for (int a = 0; a < g.dim(); ++a) {
            const Complex k = 2.0 * rho[s].grad[a] / (2.0 * g.dx(a));
            const int st = static_cast<int>(g.stride(a));
            if (idx[a] == 0) {
                trip.emplace_back(row, row, -3.0 * k);
                trip.emplace_back(row, row + st, 4.0 * k);
                trip.emplace_back(row, row + 2 * st, -k);
            } else if (idx[a] == g.nx(a) - 1) {
                trip.emplace_back(row, row, 3.0 * k);
                trip.emplace_back(row, row - st, -4.0 * k);
                trip.emplace_back(row, row - 2 * st, k);
            } else {
                trip.emplace_back(row, row + st, k);
                trip.emplace_back(row, row - st, -k);
            }
        }
    }
    CSpMat D(static_cast<int>(N), static_cast<int>(N));
    D.setFromTriplets(trip.begin(), trip.end());
    D.makeCompressed();
    return D;
}

CVec transport_rhs(const Grid& g, const std::vector<RhoValue>& rho, const RealField& A, int level, bool decaying) {
    CVec b(static_cast<int>(g.spatial_size()));
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        Complex adot{};
        for (int a = 0; a < g.dim(); ++a) adot += A(level, s, a) * rho[s].grad[a];
        b[static_cast<int>(s)] = -rho[s].lap + (decaying ? 2.0 : -2.0) * adot;
    }
    return b;
}

std::vector<RhoValue> sample_rho(const CarlemanWeight& w, const Grid& g, bool decaying) {
    std::vector<RhoValue> rho(g.spatial_size());
    for (std::size_t s = 0; s < rho.size(); ++s) rho[s] = rho_eval(w, g.point(s), decaying);
    return rho;
}

bool same_slice(const RealField& A, int k1, int k2) {
    for (int c = 0; c < A.arity(); ++c) {
        auto a = A.slice(k1, c);
        auto b = A.slice(k2, c);
        if (!std::equal(a.begin(), a.end(), b.begin())) return false;
    }
    return true;
}

// Normal equations (D^H D + delta I) x = D^H b with delta = 1e-12 * mean diagonal.
// The factorization depends only on the grid, x0, omega and the kind, so a few are cached.
struct TransportFactor {
    std::vector<RhoValue> rho;
    CSpMat D, DH;
    double delta = 0.0;
    Eigen::SimplicialLDLT<CSpMat> ldlt;
};

std::shared_ptr<const TransportFactor> transport_factor(const CarlemanWeight& w, const Grid& g, bool decaying) {
    static std::mutex mu;
    static std::vector<std::pair<std::string, std::shared_ptr<const TransportFactor>>> cache;
    json key = grid_to_json(g);
    key["x0"] = std::vector<double>(w.x0.begin(), w.x0.end());
    key["omega"] = std::vector<double>(w.omega.begin(), w.omega.end());
    key["decaying"] = decaying;
    const std::string k = key.dump();
    {
        std::lock_guard<std::mutex> lock(mu);
        for (const auto& [kk, f] : cache) {
            if (kk == k) return f;
        }
    }
    auto f = std::make_shared<TransportFactor>();
    f->rho = sample_rho(w, g, decaying);
    f->D = transport_matrix(g, f->rho);
    f->DH = f->D.adjoint();
    CSpMat M = f->DH * f->D;
    f->delta = 1e-12 * M.diagonal().real().mean();
    for (int i = 0; i < M.rows(); ++i) M.coeffRef(i, i) += f->delta;
    f->ldlt.compute(M);
    if (f->ldlt.info() != Eigen::Success) throw SolverError("transport normal equations are not factorizable", 1.0);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace_back(k, f);
    if (cache.size() > 4) cache.erase(cache.begin());
    return f;
}

}  // namespace

TransportResult solve_transport(const CarlemanWeight& w, const RealField& A, bool decaying) {
    const Grid& g = A.grid();
    w.validate(g);
    if (A.arity() != g.dim()) throw PreconditionError("transport: A must be a vector field");
    const auto fac = transport_factor(w, g, decaying);
    const CSpMat& D = fac->D;
    const CSpMat& DH = fac->DH;
    const double delta = fac->delta;
    const auto& ldlt = fac->ldlt;
    const auto& rho = fac->rho;

    TransportResult out;
    out.Phi = ComplexField(g, 1);
    for (int k = 0; k < g.levels(); ++k) {
        if (k > 0 && same_slice(A, k, k - 1)) {
            auto prev = out.Phi.slice(k - 1);
            std::copy(prev.begin(), prev.end(), out.Phi.slice(k).begin());
            continue;
        }
        const CVec b = transport_rhs(g, rho, A, k, decaying);
        CVec x = ldlt.solve(DH * b);
        // one step of iterative refinement on the normal equations
        x += ldlt.solve(DH * (b - D * x) - delta * x);
        out.iterations += 2;
        const double bn = b.norm();
        const double res = bn > 0 ? (D * x - b).norm() / bn : (D * x).norm();
        if (!std::isfinite(res) || res > 1e-3) throw SolverError("transport solve failed", res);
        out.residual = std::max(out.residual, res);
        std::copy(x.data(), x.data() + x.size(), out.Phi.slice(k).begin());
    }
    return out;
}

double transport_residual(const CarlemanWeight& w, const RealField& A, const ComplexField& Phi, bool decaying) {
    const Grid& g = A.grid();
    const auto rho = sample_rho(w, g, decaying);
    const ComplexField gp = ops::grad(Phi);
    double worst = 0.0;
    for (int k = 0; k < g.levels(); ++k) {
        double num = 0.0, den = 0.0;
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            Complex lhs{}, adot{};
            for (int a = 0; a < g.dim(); ++a) {
                lhs += 2.0 * rho[s].grad[a] * gp(k, s, a);
                adot += A(k, s, a) * rho[s].grad[a];
            }
            const Complex rhs = -rho[s].lap + (decaying ? 2.0 : -2.0) * adot;
            num += std::norm(lhs - rhs);
            den += std::norm(rhs);
        }
        worst = std::max(worst, den > 0 ? std::sqrt(num / den) : std::sqrt(num));
    }
    return worst;
}

Entire exp_mode(double lambda) {
    return [lambda](Complex z) {
        const Complex e = std::exp(I * lambda * z);
        return std::make_pair(e, I * lambda * e);
    };
}

FirstIntegral first_integral(const CarlemanWeight& w, const Grid& grid, const Entire& G) {
    w.validate(grid);
    FirstIntegral out;
    out.g = ComplexField(grid, 1);
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < grid.spatial_size(); ++s) {
        const RhoValue r = rho_eval(w, grid.point(s));
        const auto [v, dv] = G(r.value);
        Complex ann{};
        for (int a = 0; a < grid.dim(); ++a) ann += r.grad[a] * (dv * r.grad[a]);
        num = std::max(num, std::abs(ann));
        den = std::max(den, std::abs(v));
        for (int k = 0; k < grid.levels(); ++k) out.g(k, s) = v;
    }
    out.annihilation = den > 0 ? num / den : num;
    return out;
}

TimeProfile profile_from_name(const std::string& name) {
    if (name == "one") return {name, [](double) { return 1.0; }, [](double) { return 0.0; }};
    if (name == "exp+") return {name, [](double t) { return std::exp(t); }, [](double t) { return std::exp(t); }};
    if (name == "exp-") return {name, [](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); }};
    if (name == "ramp") return {name, [](double t) { return 1.0 + 0.5 * t; }, [](double) { return 0.5; }};
    throw PreconditionError("unknown time profile '" + name + "' (one, exp+, exp-, ramp)");
}

std::vector<TimeProfile> default_profiles() {
    return {profile_from_name("one"), profile_from_name("exp+"), profile_from_name("exp-"), profile_from_name("ramp")};
}

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

namespace {

struct SpaceTimeWeight {
    Vec3 grad;
    double lap, dt;
};

SpaceTimeWeight space_time_weight(const CarlemanWeight& w, double t, const Vec3& x, double sign) {
    const PhiValue p = phi_eps_eval(w, x);
    const EtaValue e = eta_eval(w, t);
    SpaceTimeWeight out;
    for (int a = 0; a < 3; ++a) out.grad[a] = sign * e.value * p.grad[a];
    out.lap = sign * e.value * p.lap;
    out.dt = sign * p.value * e.dt;
    return out;
}

}  // namespace

ConjugatedParts conjugated_apply(const CarlemanWeight& w, const Vec3& A, const Jet& u, double t, const Vec3& x,
                                 double sign) {
    const double h = w.h;
    const SpaceTimeWeight p = space_time_weight(w, t, x, sign);
    Complex gdot{}, adu{};
    double g2 = 0.0, ag = 0.0;
    for (int a = 0; a < w.n; ++a) {
        gdot += p.grad[a] * u.g[a];
        adu += A[a] * u.g[a];
        g2 += p.grad[a] * p.grad[a];
        ag += A[a] * p.grad[a];
    }
    ConjugatedParts out;
    out.P = -h * h * u.lap - g2 * u.v;
    out.Q = 2.0 * h * (-I) * gdot - I * h * p.lap * u.v;
    out.Rt = -I * h * h * u.dt + I * h * p.dt * u.v;
    out.S = 2.0 * h * ag * u.v - 2.0 * h * h * adu;
    out.sum = out.P + I * out.Q + I * out.Rt + out.S;
    return out;
}

Complex direct_conjugation(const CarlemanWeight& w, const VectorFn& A, const std::function<Complex(double, const Vec3&)>& u,
                           double t, const Vec3& x, double sign, double step) {
    const double h = w.h;
    auto weight = [&](double tt, const Vec3& xx) { return sign * phi_eps_eval(w, xx).value * eta_eval(w, tt).value; };
    auto W = [&](double tt, const Vec3& xx) { return std::exp(-weight(tt, xx) / h) * u(tt, xx); };
    const double d = step;
    const Complex w0 = W(t, x);
    auto d1 = [&](auto f) { return (-f(2.0) + 8.0 * f(1.0) - 8.0 * f(-1.0) + f(-2.0)) / (12.0 * d); };
    const Complex wt = d1([&](double k) { return W(t + k * d, x); });
    Complex lap{}, adw{};
    const Vec3 a = A(t, x);
    for (int ax = 0; ax < w.n; ++ax) {
        auto f = [&](double k) {
            Vec3 y = x;
            y[ax] += k * d;
            return W(t, y);
        };
        lap += (-f(2.0) + 16.0 * f(1.0) - 30.0 * w0 + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * d * d);
        adw += a[ax] * d1(f);
    }
    return std::exp(weight(t, x) / h) * h * h * (wt - lap - 2.0 * adw);
}

ConjugatedFields conjugated_apply(const CarlemanWeight& w, const RealField& A, const ComplexField& u, double sign) {
    const Grid& g = u.grid();
    const ComplexField ut = ops::time_derivative(u);
    const ComplexField lap = ops::laplacian(u);
    const ComplexField gr = ops::grad(u);
    ConjugatedFields out{ComplexField(g), ComplexField(g), ComplexField(g), ComplexField(g), ComplexField(g)};
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            Jet j{u(k, s), {}, lap(k, s), ut(k, s)};
            Vec3 a{0.0, 0.0, 0.0};
            for (int d = 0; d < g.dim(); ++d) {
                j.g[d] = gr(k, s, d);
                a[d] = A(k, s, d);
            }
            const ConjugatedParts p = conjugated_apply(w, a, j, g.t(k), g.point(s), sign);
            out.P(k, s) = p.P;
            out.Q(k, s) = p.Q;
            out.Rt(k, s) = p.Rt;
            out.S(k, s) = p.S;
            out.sum(k, s) = p.sum;
        }
    }
    return out;
}

std::string to_string(CGOKind k) { return k == CGOKind::growing ? "growing" : "decaying"; }

StepSystem<Complex> conjugated_system(const CarlemanWeight& w, const CoefficientPair& c, CGOKind kind) {
    const Grid& g = c.grid();
    const bool dec = kind == CGOKind::decaying;
    const double h = w.h;
    const auto rho = sample_rho(w, g, dec);
    const RealField pot = dec ? adjoint_potential(c) : effective_potential(c);

    StepSystem<Complex> sys;
    sys.beta = h * h;
    sys.alpha = h * h;
    sys.b = ComplexField(g, g.dim());
    sys.c = ComplexField(g, 1);
    sys.backward = dec;
    sys.theta = 1.0;
    const double sa = dec ? 1.0 : -1.0;  // sign of the A terms
    for (int k = 0; k < g.levels(); ++k) {
        const EtaValue e = eta_eval(w, g.t(k));
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            Complex adot{};
            for (int a = 0; a < g.dim(); ++a) {
                sys.b(k, s, a) = 2.0 * sa * h * h * c.A(k, s, a) - 2.0 * h * e.value * rho[s].grad[a];
                adot += c.A(k, s, a) * rho[s].grad[a];
            }
            const Complex time_term = (dec ? -1.0 : 1.0) * h * rho[s].value * e.dt;
            sys.c(k, s) = h * h * pot(k, s) + time_term - h * e.value * (rho[s].lap - 2.0 * sa * adot);
        }
    }
    return sys;
}

namespace {

// beta*(+-d_t f) - alpha*Lap f + b.grad f + c f at interior nodes, by geometry stencils.
ComplexField apply_system(const Grid& g, const StepSystem<Complex>& sys, const ComplexField& f) {
    const ComplexField ft = ops::time_derivative(f);
    const ComplexField lap = ops::laplacian(f);
    const ComplexField gr = ops::grad(f);
    ComplexField out(g, 1);
    const double st = sys.backward ? -1.0 : 1.0;
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (g.on_boundary(s)) continue;
            Complex v = st * sys.beta * ft(k, s) - sys.alpha * lap(k, s) + sys.c(k, s) * f(k, s);
            for (int a = 0; a < g.dim(); ++a) v += sys.b(k, s, a) * gr(k, s, a);
            out(k, s) = v;
        }
    }
    return out;
}

}  // namespace

CGOSolution build_cgo(const CarlemanWeight& w, const CoefficientPair& c, const TimeProfile& m, CGOKind kind,
                      const CGOOptions& opt) {
    const Grid& g = c.grid();
    w.validate(g);
    c.validate();
    const bool dec = kind == CGOKind::decaying;

    CGOSolution sol;
    sol.kind = kind;
    sol.weight = w;
    sol.profile = m.name;
    sol.metrics.unstable_h = w.too_large();

    TransportResult tr = solve_transport(w, c.A, dec);
    sol.Phi = std::move(tr.Phi);
    sol.metrics.transport_residual = tr.residual;

    ComplexField bare(g, 1);
    sol.amplitude = ComplexField(g, 1);
    const double tau = opt.cutoff_fraction * w.T;
    for (int k = 0; k < g.levels(); ++k) {
        const double t = g.t(k);
        const double chi = opt.cutoff ? smooth_step((dec ? w.T - t : t) / tau) : 1.0;
        const double mt = m.m(t);
        if (mt == 0.0) throw PreconditionError("time profile vanishes at t = " + std::to_string(t));
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            bare(k, s) = mt * std::exp(sol.Phi(k, s));
            sol.amplitude(k, s) = chi * bare(k, s);
        }
    }

    StepSystem<Complex> sys = conjugated_system(w, c, kind);
    sol.metrics.amplitude_residual = norm(apply_system(g, sys, sol.amplitude), NormKind::l2);
    sol.metrics.amplitude_residual_nocut = norm(apply_system(g, sys, bare), NormKind::l2);

    ComplexField forcing = scheme_residual(g, sys, sol.amplitude);
    forcing *= Complex(-1.0);
    sys.source = forcing;
    sol.remainder = march(g, sys);
    sys.source = ComplexField();
    sol.metrics.full_residual = norm(scheme_residual(g, sys, sol.amplitude + sol.remainder), NormKind::l2);
    sol.metrics.remainder_l2 = norm(sol.remainder, NormKind::l2);
    sol.metrics.remainder_h1 = w.h * norm(sol.remainder, NormKind::semiclassical_h1, w.h);

    sol.u = ComplexField(g, 1);
    const auto rho = sample_rho(w, g, dec);
    for (int k = 0; k < g.levels(); ++k) {
        const double eta = eta_eval(w, g.t(k)).value;
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            sol.u(k, s) = std::exp(rho[s].value * eta / w.h) * (sol.amplitude(k, s) + sol.remainder(k, s));
        }
    }
    const int end = dec ? g.nt() : 0;
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        sol.metrics.end_value = std::max(sol.metrics.end_value, std::abs(sol.u(end, s)));
    }
    return sol;
}

void export_cgo(const std::string& prefix, const CGOSolution& sol) {
    write_cdf1(prefix + ".cdf1", sol.u);
    const auto& w = sol.weight;
    const auto& m = sol.metrics;
    json side = {{"kind", to_string(sol.kind)},
                 {"profile", sol.profile},
                 {"x0", std::vector<double>(w.x0.begin(), w.x0.begin() + w.n)},
                 {"omega", std::vector<double>(w.omega.begin(), w.omega.begin() + w.n)},
                 {"h", w.h},
                 {"eps", w.eps},
                 {"T", w.T},
                 {"eta_power", w.eta_power},
                 {"metrics",
                  {{"amplitude_residual", m.amplitude_residual},
                   {"amplitude_residual_nocut", m.amplitude_residual_nocut},
                   {"remainder_h1", m.remainder_h1},
                   {"remainder_l2", m.remainder_l2},
                   {"full_residual", m.full_residual},
                   {"transport_residual", m.transport_residual},
                   {"end_value", m.end_value},
                   {"unstable_h", m.unstable_h}}}};
    std::ofstream out(prefix + ".json");
    if (!out) throw Error("cannot write '" + prefix + ".json'");
    out << side.dump(2) << "\n";
}

}  // namespace cgolab
