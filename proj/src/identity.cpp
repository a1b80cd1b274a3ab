#include "cgolab/identity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "cgolab/parallel.hpp"

namespace cgolab {

namespace {



// 2(A1 - A2).grad u2 + (q~2 - q~1) u2, with one-sided stencils on the boundary.
ComplexField difference_source(const CoefficientPair& c1, const CoefficientPair& c2, const ComplexField& u2) {
    const Grid& g = c1.grid();
    const RealField dq = effective_potential(c2) - effective_potential(c1);
    const ComplexField gu = ops::grad(u2);
    ComplexField out(g, 1);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            Complex v = dq(k, s) * u2(k, s);
            for (int a = 0; a < g.dim(); ++a) v += 2.0 * (c1.A(k, s, a) - c2.A(k, s, a)) * gu(k, s, a);
            out(k, s) = v;
        }
    }
    return out;
}

double boundary_energy(const Grid& g, const BoundaryPartition& part, const BoundaryTrace<Complex>& tr,
                       const std::vector<char>& mask) {
    return std::abs(quad::boundary_inner(g, part, tr, &tr, mask));
}

}  // namespace

ComplexField operator_everywhere(const CoefficientPair& c, const ComplexField& u, Direction direction) {
    const Grid& g = c.grid();
    const bool fwd = direction == Direction::forward;
    const RealField pot = fwd ? effective_potential(c) : adjoint_potential(c);
    const ComplexField ut = ops::time_derivative(u);
    const ComplexField lap = ops::laplacian(u);
    const ComplexField gr = ops::grad(u);
    ComplexField out(g, 1);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            Complex drift{};
            for (int a = 0; a < g.dim(); ++a) drift += c.A(k, s, a) * gr(k, s, a);
            out(k, s) = (fwd ? ut(k, s) : -ut(k, s)) - lap(k, s) + (fwd ? -2.0 : 2.0) * drift + pot(k, s) * u(k, s);
        }
    }
    return out;
}

IdentityResult integral_identity_residual(const CoefficientPair& c1, const CoefficientPair& c2, const ComplexField& f,
                                          const ComplexField& v1, const BoundaryPartition& part, Scheme scheme,
                                          double floor) {
    const Grid& g = c1.grid();
    if (!v1.grid().same_shape(g) || v1.arity() != 1) throw PreconditionError("v1 has the wrong shape");
    const double vscale = std::max(v1.max_abs(), 1e-300);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        if (std::abs(v1(g.nt(), s)) > 1e-12 * vscale) throw PreconditionError("v1 must vanish at t = T");
    }
    const DifferenceSolution<Complex> d = solve_difference<Complex>(c1, c2, f, scheme);

    IdentityResult r;
    r.cross_check = d.cross_check;
    r.lhs = quad::inner(difference_source(c1, c2, d.u2), v1);
    const BoundaryTrace<Complex> dn = ops::normal_derivative(d.u, part);
    const BoundaryTrace<Complex> vt = ops::trace(v1, part);
    r.rhs_full = -quad::boundary_inner(g, part, dn, &vt, part.mask(Subset::full));
    r.rhs_plus = -quad::boundary_inner(g, part, dn, &vt, part.mask(Subset::plus));
    r.rhs_front = -quad::boundary_inner(g, part, dn, &vt, part.mask(Subset::front));
    r.residual = std::abs(r.lhs - r.rhs_full) / (std::abs(r.lhs) + std::abs(r.rhs_full) + floor);
    r.residual_plus = std::abs(r.lhs - r.rhs_plus) / (std::abs(r.lhs) + std::abs(r.rhs_plus) + floor);
    r.trace_energy = boundary_energy(g, part, dn, part.mask(Subset::full));
    r.front_share = r.trace_energy > 0 ? boundary_energy(g, part, dn, part.mask(Subset::front)) / r.trace_energy : 0.0;

    const ComplexField adj = apply_operator(c1, v1, Direction::adjoint);
    const double nv = norm(v1, NormKind::l2);
    r.adjoint_defect = nv > 0 ? norm(adj, NormKind::l2) / nv : 0.0;
    return r;
}

GreenClosure green_identity(const CoefficientPair& c, const ComplexField& u, const ComplexField& v,
                            const BoundaryPartition& part) {
    const Grid& g = c.grid();
    if (!u.grid().same_shape(g) || !v.grid().same_shape(g)) throw PreconditionError("green_identity: shape mismatch");
    const double scale = std::max(u.max_abs(), 1e-300);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        if (std::abs(u(0, s)) > 1e-12 * scale) throw PreconditionError("u must vanish at t = 0");
    }
    for (std::size_t s : part.boundary_nodes) {
        for (int k = 0; k < g.levels(); ++k) {
            if (std::abs(u(k, s)) > 1e-12 * scale) throw PreconditionError("u must vanish on the lateral boundary");
        }
    }
    GreenClosure out;
    out.volume = quad::inner(operator_everywhere(c, u, Direction::forward), v);
    const ComplexField lv = operator_everywhere(c, v, Direction::adjoint);
    out.adjoint = quad::inner(u, lv);
    const BoundaryTrace<Complex> dn = ops::normal_derivative(u, part);
    const BoundaryTrace<Complex> vt = ops::trace(v, part);
    out.lateral = quad::boundary_inner(g, part, dn, &vt, part.mask(Subset::full));
    Complex term{};
    for (std::size_t s = 0; s < g.spatial_size(); ++s) term += g.volume_weight(s) * u(g.nt(), s) * std::conj(v(g.nt(), s));
    out.terminal = term;
    const Complex sum = out.volume - out.adjoint + out.lateral - out.terminal;
    const double den = std::abs(out.volume) + std::abs(out.adjoint) + std::abs(out.lateral) + std::abs(out.terminal);
    out.residual = den > 0 ? std::abs(sum) / den : 0.0;
    return out;
}

ScanReport boundary_term_scan(const CoefficientPair& c1, const CoefficientPair& c2, const CarlemanWeight& w,
                              const BoundaryPartition& part, const BoundaryScanOptions& opt) {
    const Grid& g = c1.grid();
    if (opt.h_list.size() < 3) throw PreconditionError("boundary_term_scan needs at least three h values");
    ScanReport rep;
    rep.experiment = "boundary-scan";
    rep.params = {{"h_list", opt.h_list},     {"m2", opt.m2.name},        {"m1", opt.m1.name},
                  {"scheme", to_string(opt.scheme)}, {"epsilon0", part.epsilon0}, {"nx", g.nx(0)},
                  {"nt", g.nt()}};
    std::vector<Measurement> rows(opt.h_list.size());
    parallel_for(opt.h_list.size(), [&](std::size_t i) {
        CarlemanWeight wh = w;
        wh.h = opt.h_list[i];
        const CGOSolution s2 = build_cgo(wh, c2, opt.m2, CGOKind::growing);
        const CGOSolution s1 = build_cgo(wh, c1, opt.m1, CGOKind::decaying);
        const DifferenceSolution<Complex> d = solve_difference<Complex>(c1, c2, s2.u, opt.scheme);
        const BoundaryTrace<Complex> dn = ops::normal_derivative(d.u, part);
        const BoundaryTrace<Complex> vt = ops::trace(s1.u, part);
        const Complex bplus = quad::boundary_inner(g, part, dn, &vt, part.mask(Subset::plus));
        const Complex bfull = quad::boundary_inner(g, part, dn, &vt, part.mask(Subset::full));
        const Complex lhs = quad::inner(difference_source(c1, c2, d.u2), s1.u);
        Measurement m;
        m.h = wh.h;
        m.value = std::abs(bplus);
        m.extra = {{"h35_value", std::pow(wh.h, 0.6) * m.value},
                   {"full_boundary", std::abs(bfull)},
                   {"volume_side", std::abs(lhs)},
                   {"identity_residual", std::abs(lhs + bfull) / (std::abs(lhs) + std::abs(bfull) + 1e-300)},
                   {"unstable_h", s2.metrics.unstable_h}};
        rows[i] = m;
    });
    rep.per_h = rows;
    std::vector<double> hs, vs;
    double vmax = 0.0;
    for (const auto& m : rows) {
        hs.push_back(m.h);
        vs.push_back(m.value);
        vmax = std::max(vmax, m.value);
    }
    if (vmax == 0.0) {
        // identical coefficients
        rep.add("boundary_term_vanishes", true, 0.0, 0.0, "==");
        return rep;
    }
    for (auto& v : vs) v = std::max(v, 1e-300);
    rep.fit = fit_loglog_windowed(hs, vs);
    rep.add("growth_exponent", rep.fit->slope >= opt.min_slope, rep.fit->slope, opt.min_slope, ">=");

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].h > rows[b].h; });
    bool mono = true;
    double worst = 0.0;
    for (std::size_t j = order.size() - 2; j + 1 < order.size(); ++j) {
        const double prev = rows[order[j - 1]].extra["h35_value"].get<double>();
        const double cur = rows[order[j]].extra["h35_value"].get<double>();
        const double next = rows[order[j + 1]].extra["h35_value"].get<double>();
        if (j == order.size() - 2) worst = std::max(worst, cur / prev);
        worst = std::max(worst, next / cur);
        mono = mono && cur < prev && next < cur;
    }
    rep.add("h35_decreasing_last3", mono, worst, 1.0, "<");
    return rep;
}

std::vector<FirstIntegral> g_family(const CarlemanWeight& w, const Grid& g, int count) {
    std::vector<FirstIntegral> out;
    for (int l = 1; l <= count; ++l) out.push_back(first_integral(w, g, exp_mode(static_cast<double>(l))));
    return out;
}

double gram_condition(const Grid& g, const std::vector<FirstIntegral>& family) {
    const int n = static_cast<int>(family.size());
    if (n == 0) throw PreconditionError("empty probe family");
    Eigen::MatrixXcd G(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Complex acc{};
            auto a = family[i].g.slice(0);
            auto b = family[j].g.slice(0);
            for (std::size_t s = 0; s < a.size(); ++s) acc += g.volume_weight(s) * a[s] * std::conj(b[s]);
            G(i, j) = acc;
        }
    }
    const Eigen::VectorXd d = G.diagonal().real().cwiseSqrt();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) G(i, j) /= d(i) * d(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    const auto& ev = es.eigenvalues();
    return ev.maxCoeff() / std::max(ev.minCoeff(), 1e-300);
}

MomentKernel moment_kernel(const CarlemanWeight& w, const RealField& A1, const RealField& A2) {
    const Grid& g = A1.grid();
    MomentKernel k;
    k.weight = w;
    const TransportResult t2 = solve_transport(w, A2, false);
    const TransportResult t1 = solve_transport(w, A1, true);
    k.transport_residual = std::max(t2.residual, t1.residual);
    k.E = ComplexField(g, 1);
    for (std::size_t i = 0; i < k.E.size(); ++i) k.E.data()[i] = std::exp(std::conj(t1.Phi.data()[i]) + t2.Phi.data()[i]);
    const double n0 = slice_l2<Complex>(g, k.E.slice(0));
    for (int l = 1; l < g.levels(); ++l) {
        double d = 0.0;
        auto a = k.E.slice(l);
        auto b = k.E.slice(0);
        for (std::size_t s = 0; s < a.size(); ++s) d += g.volume_weight(s) * std::norm(a[s] - b[s]);
        k.time_variation = std::max(k.time_variation, std::sqrt(d) / std::max(n0, 1e-300));
    }
    return k;
}

MomentValue curl_moment(const CoefficientPair& c1, const CoefficientPair& c2, const MomentKernel& k,
                        const FirstIntegral& probe, const TimeProfile& m2, const TimeProfile& m1,
                        const MomentOptions& opt) {
    const Grid& g = c1.grid();
    if (!c2.grid().same_shape(g) || !k.E.grid().same_shape(g)) throw PreconditionError("curl_moment: grid mismatch");
    std::vector<std::array<Complex, 3>> rp(g.spatial_size());
    for (std::size_t s = 0; s < g.spatial_size(); ++s) rp[s] = rho_eval(k.weight, g.point(s)).grad;

    std::vector<Complex> mt(g.levels());
    std::vector<double> at(g.levels());
    for (int l = 0; l < g.levels(); ++l) {
        Complex acc{};
        double mag = 0.0;
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            Complex dot{};
            for (int a = 0; a < g.dim(); ++a) dot += (c1.A(l, s, a) - c2.A(l, s, a)) * rp[s][a];
            const Complex v = probe.g(l, s) * dot * k.E(l, s);
            acc += quad::simpson_volume_weight(g, s) * v;
            mag += quad::simpson_volume_weight(g, s) * std::abs(v);
        }
        mt[l] = acc;
        at[l] = mag;
    }
    MomentValue out;
    const int sl = opt.slice < 0 ? g.nt() / 2 : std::min(opt.slice, g.nt());
    out.slice = mt[sl];
    out.slice_normalized = at[sl] > 0 ? std::abs(mt[sl]) / at[sl] : 0.0;

    std::vector<Complex> vals;
    std::vector<double> mags;
    for (double h : opt.h_list) {
        CarlemanWeight wh = k.weight;
        wh.h = h;
        const double scale = std::pow(h, -wh.eta_power);
        Complex acc{};
        double mag = 0.0;
        for (int l = 0; l < g.levels(); ++l) {
            const double t = g.t(l);
            const double wt = quad::simpson_time_weight(g, l) * scale * eta_eval(wh, t).value * m1.m(t) * m2.m(t);
            acc += wt * mt[l];
            mag += std::abs(wt) * at[l];
        }
        vals.push_back(acc);
        mags.push_back(mag);
    }
    if (vals.size() >= 2) {
        const auto r = richardson<Complex>(opt.h_list, vals, 2.0 * k.weight.eta_power);
        const auto rm = richardson<double>(opt.h_list, mags, 2.0 * k.weight.eta_power);
        out.averaged = r.value;
        out.averaged_error = r.error;
        out.averaged_normalized = rm.value > 0 ? std::abs(r.value) / rm.value : 0.0;
    } else if (vals.size() == 1) {
        out.averaged = vals[0];
        out.averaged_normalized = mags[0] > 0 ? std::abs(vals[0]) / mags[0] : 0.0;
    }
    return out;
}

QRecovery recover_q(const CoefficientPair& c2, const CoefficientPair& c3, const MomentKernel& k,
                    const std::vector<FirstIntegral>& family, const TimeProfile& m2, const TimeProfile& m3,
                    double a_tol) {
    const Grid& g = c2.grid();
    const double mis = c2.a_mismatch(c3);
    if (mis > a_tol) {
        throw PreconditionError("recover_q needs equal convection terms; max |A2 - A3| = " + std::to_string(mis));
    }
    QRecovery out;
    Grid g1(g.domain(), g.nx(), 1);
    out.H = RealField(g1, 1);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        double acc = 0.0;
        for (int l = 0; l < g.levels(); ++l) {
            const double t = g.t(l);
            acc += quad::simpson_time_weight(g, l) * (c3.q(l, s) - c2.q(l, s)) * m2.m(t) * m3.m(t);
        }
        out.H(0, s) = acc;
        out.H(1, s) = acc;
        out.H_max = std::max(out.H_max, std::abs(acc));
    }
    const int mid = g.nt() / 2;
    for (const auto& p : family) {
        Complex acc{};
        double mag = 0.0;
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            const Complex ge = p.g(mid, s) * k.E(mid, s);
            acc += quad::simpson_volume_weight(g, s) * out.H(0, s) * ge;
            mag += quad::simpson_volume_weight(g, s) * std::abs(ge);
        }
        out.moments.push_back(acc);
        out.moments_normalized.push_back(mag > 0 ? std::abs(acc) / mag : 0.0);
    }
    return out;
}

GaugeRecovery recover_gauge(const CoefficientPair& c1, const CoefficientPair& c2) {
    const Grid& g = c1.grid();
    if (!c2.grid().same_shape(g)) throw PreconditionError("recover_gauge: grid mismatch");
    const RealField dA = c2.A - c1.A;
    const RealField div = ops::divergence(dA);
    GaugeRecovery out;
    out.psi = RealField(g, 1);
    const std::vector<double> zero(g.spatial_size(), 0.0);
    for (int l = 0; l < g.levels(); ++l) {
        const auto p = solve_poisson(g, div.slice(l), zero);
        std::copy(p.begin(), p.end(), out.psi.slice(l).begin());
    }
    out.max_psi = out.psi.max_abs();
    out.dt_psi = ops::time_derivative(out.psi);
    const RealField gp = ops::grad(out.psi);
    const double den = norm(dA, NormKind::l2);
    out.residual_a = den > 0 ? norm(dA - gp, NormKind::l2) / den : 0.0;
    return out;
}

}  // namespace cgolab
