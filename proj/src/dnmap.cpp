#include "cgolab/dnmap.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "cgolab/parallel.hpp"

namespace cgolab {

DNTrace dn_trace_of(const CoefficientPair& c, const ComplexField& u, const BoundaryPartition& part, Subset subset) {
    const Grid& g = c.grid();
    if (!u.grid().same_shape(g) || u.arity() != 1) throw PreconditionError("dn trace: solution shape mismatch");
    DNTrace tr;
    tr.values = ops::normal_derivative(u, part);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t i = 0; i < part.facets.size(); ++i) {
            const Facet& f = part.facets[i];
            tr.values.at(k, i) += 2.0 * f.side * c.A(k, f.node, f.axis) * u(k, f.node);
        }
    }
    tr.mask = part.mask(subset);
    tr.values.mask = tr.mask;
    tr.values.subset = subset;
    tr.subset = subset;
    return tr;
}

DNTrace dn_strong(const CoefficientPair& c, const ComplexField& f, const BoundaryPartition& part, Subset subset,
                  Scheme scheme, ComplexField* u_out) {
    ParabolicProblem<Complex> p{c, f, {}, {}, Direction::forward};
    ComplexField u = solve(p, scheme);
    DNTrace tr = dn_trace_of(c, u, part, subset);
    if (u_out) *u_out = std::move(u);
    return tr;
}

Complex dn_weak_of(const CoefficientPair& c, const ComplexField& u, const ComplexField& v) {
    const Grid& g = c.grid();
    if (!v.grid().same_shape(g) || !u.grid().same_shape(g)) throw PreconditionError("dn_weak: shape mismatch");
    const double vmax = v.max_abs();
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
        if (std::abs(v(g.nt(), s)) > 1e-12 * std::max(1.0, vmax)) {
            throw PreconditionError("test function must vanish at t = T");
        }
    }
    const ComplexField vt = ops::time_derivative(v);
    const ComplexField gv = ops::grad(v);
    const ComplexField gu = ops::grad(u);
    const RealField divA = ops::divergence(c.A);
    ComplexField integrand(g, 1);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            const Complex uu = u(k, s), vb = std::conj(v(k, s));
            Complex val = -uu * std::conj(vt(k, s));
            double a2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                const Complex dvb = std::conj(gv(k, s, a));
                val += gu(k, s, a) * dvb + 2.0 * uu * c.A(k, s, a) * dvb;
                a2 += c.A(k, s, a) * c.A(k, s, a);
            }
            val += (divA(k, s) - a2 + c.q(k, s)) * uu * vb;
            integrand(k, s) = val;
        }
    }
    return quad::integrate(integrand);
}

Complex dn_weak(const CoefficientPair& c, const ComplexField& f, const ComplexField& v, Scheme scheme) {
    ParabolicProblem<Complex> p{c, f, {}, {}, Direction::forward};
    return dn_weak_of(c, solve(p, scheme), v);
}

Complex dn_pair(const Grid& g, const BoundaryPartition& part, const DNTrace& tr, const ComplexField& v) {
    const BoundaryTrace<Complex> vt = ops::trace(v, part);
    return quad::boundary_inner(g, part, tr.values, &vt, tr.mask);
}

double trace_norm(const Grid& g, const BoundaryPartition& part, const BoundaryTrace<Complex>& tr,
                  const std::vector<char>& mask) {
    double acc = 0.0;
    for (int k = 0; k < tr.levels; ++k) {
        double sk = 0.0;
        for (std::size_t i = 0; i < tr.facets; ++i) {
            if (mask[i]) sk += part.facets[i].weight * std::norm(tr.at(k, i));
        }
        acc += g.time_weight(k) * sk;
    }
    return std::sqrt(acc);
}

double relative_trace_difference(const Grid& g, const BoundaryPartition& part, const DNTrace& a, const DNTrace& b) {
    if (a.values.values.size() != b.values.values.size()) throw PreconditionError("trace shape mismatch");
    BoundaryTrace<Complex> d = a.values;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values.values[i];
    const double num = trace_norm(g, part, d, a.mask);
    const double den = trace_norm(g, part, a.values, a.mask);
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<ComplexField> f_bank(const Grid& g, std::uint64_t seed, int count) {
    if (count < 1) throw PreconditionError("f_bank needs at least one element");
    std::mt19937_64 rng(seed);
    const Domain& d = g.domain();
    std::vector<ComplexField> bank;
    for (int j = 0; j < count; ++j) {
        const int axis = static_cast<int>(rng() % static_cast<std::uint64_t>(d.n));
        const bool hi = (rng() & 1u) != 0;
        Vec3 centre{0.0, 0.0, 0.0};
        for (int a = 0; a < d.n; ++a) centre[a] = d.lo[a] + unit_uniform(rng()) * (d.hi[a] - d.lo[a]);
        centre[axis] = hi ? d.hi[axis] : d.lo[axis];
        const double width = 0.15 + 0.2 * unit_uniform(rng());
        const double T = d.T;
        bank.push_back(ComplexField::sample(g, [=](double t, const Vec3& x) {
            double r2 = 0.0;
            for (int a = 0; a < d.n; ++a) r2 += (x[a] - centre[a]) * (x[a] - centre[a]);
            return Complex(t * t * (T - t) * std::exp(-r2 / (2.0 * width * width)));
        }));
    }
    return bank;
}

ScanReport compare_partial(const CoefficientPair& c1, const CoefficientPair& c2, const std::vector<ComplexField>& bank,
                           const BoundaryPartition& part, Subset subset, double tol, Scheme scheme) {
    if (bank.empty()) throw PreconditionError("f_bank must not be empty");
    const Grid& g = c1.grid();
    std::vector<double> diff(bank.size(), 0.0);
    const bool same = c1.A.data() == c2.A.data() && c1.q.data() == c2.q.data();
    // identical coefficients
    if (!same) parallel_for(bank.size(), [&](std::size_t i) {
        const DNTrace t1 = dn_strong(c1, bank[i], part, subset, scheme);
        const DNTrace t2 = dn_strong(c2, bank[i], part, subset, scheme);
        diff[i] = relative_trace_difference(g, part, t1, t2);
    });
    ScanReport rep;
    rep.experiment = "compare_partial";
    rep.params = {{"subset", to_string(subset)}, {"bank_size", bank.size()}, {"tolerance", tol},
                  {"scheme", to_string(scheme)}, {"grid", grid_to_json(g)}};
    double worst = 0.0;
    for (double v : diff) worst = std::max(worst, v);
    rep.extra["per_f"] = diff;
    rep.extra["max_relative_difference"] = worst;
    rep.add("maps_coincide", worst <= tol, worst, tol, "<=");
    return rep;
}

void write_trace_csv(const std::string& path, const Grid& g, const BoundaryPartition& part, const DNTrace& tr) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "t";
    for (int a = 0; a < g.dim(); ++a) out << ",x" << a + 1;
    out << ",re,im\n";
    char buf[64];
    for (int k = 0; k < tr.values.levels; ++k) {
        for (std::size_t i = 0; i < tr.values.facets; ++i) {
            if (!tr.mask[i]) continue;
            const Vec3 x = g.point(part.facets[i].node);
            std::snprintf(buf, sizeof buf, "%.10g", g.t(k));
            out << buf;
            for (int a = 0; a < g.dim(); ++a) {
                std::snprintf(buf, sizeof buf, ",%.10g", x[a]);
                out << buf;
            }
            const Complex v = tr.values.at(k, i);
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", v.real(), v.imag());
            out << buf;
        }
    }
}

void write_trace_cdf1(const std::string& path, const Grid& g, const DNTrace& tr) {
    json header = {{"shape", {tr.values.levels, tr.values.facets}},
                   {"arity", 1},
                   {"dtype", "c128"},
                   {"order", "row-major"},
                   {"layout", "boundary-trace"},
                   {"subset", to_string(tr.subset)},
                   {"provenance", tr.provenance},
                   {"grid", grid_to_json(g)}};
    const std::string text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out.write("CDF1", 4);
    const std::uint32_t len = static_cast<std::uint32_t>(text.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (int k = 0; k < tr.values.levels; ++k) {
        for (std::size_t i = 0; i < tr.values.facets; ++i) {
            const Complex v = tr.mask[i] ? tr.values.at(k, i) : Complex{};
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    }
}

}  // namespace cgolab
