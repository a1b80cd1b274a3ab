#include "cgolab/fields.hpp"

namespace cgolab {

CoefficientPair::CoefficientPair(RealField a, RealField qq) : A(std::move(a)), q(std::move(qq)) {
    if (q.arity() != 1) throw PreconditionError("q must be a scalar field");
    if (A.arity() != q.grid().dim()) throw PreconditionError("A must have one component per spatial axis");
    if (!A.grid().same_shape(q.grid())) throw PreconditionError("A and q live on different grids");
}

CoefficientPair CoefficientPair::zero(const Grid& g) { return {RealField(g, g.dim()), RealField(g, 1)}; }

double CoefficientPair::a_surrogate_norm() const {
    double m = A.max_abs();
    double d = 0.0;
    for (int c = 0; c < A.arity(); ++c) {
        RealField comp(A.grid(), 1);
        for (int k = 0; k < A.grid().levels(); ++k) {
            auto src = A.slice(k, c);
            std::copy(src.begin(), src.end(), comp.slice(k).begin());
        }
        d = std::max(d, ops::grad(comp).max_abs());
        d = std::max(d, ops::time_derivative(comp).max_abs());
    }
    return m + d;
}

void CoefficientPair::validate(const RegularityCaps& caps) const {
    if (!A.all_finite() || !q.all_finite()) throw PreconditionError("coefficients contain non-finite values");
    const double na = a_surrogate_norm();
    if (!(na <= caps.a_w1inf)) {
        throw PreconditionError("A exceeds its W1,inf surrogate cap: " + std::to_string(na));
    }
    if (!(q.max_abs() <= caps.q_linf)) throw PreconditionError("q exceeds its L-inf cap");
}

double CoefficientPair::boundary_mismatch(const CoefficientPair& other) const {
    if (!A.compatible(other.A)) throw PreconditionError("coefficient pairs live on different grids");
    const Grid& g = grid();
    double m = 0.0;
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (!g.on_boundary(s)) continue;
            for (int c = 0; c < A.arity(); ++c) m = std::max(m, std::abs(A(k, s, c) - other.A(k, s, c)));
        }
    }
    return m;
}

double CoefficientPair::a_mismatch(const CoefficientPair& other) const {
    if (!A.compatible(other.A)) throw PreconditionError("coefficient pairs live on different grids");
    return (A - other.A).max_abs();
}

GaugeFunction GaugeFunction::zero(const Grid& g) {
    GaugeFunction p;
    p.psi = RealField(g, 1);
    p.grad = RealField(g, g.dim());
    p.dt = RealField(g, 1);
    return p;
}

GaugeFunction GaugeFunction::analytic(const Grid& g, const Scalar& psi, const Vector& grad, const Scalar& dt) {
    GaugeFunction p;
    p.psi = RealField::sample(g, psi);
    if (grad) p.grad = RealField::sample_vector(g, grad);
    if (dt) p.dt = RealField::sample(g, dt);
    return p;
}

GaugeFunction GaugeFunction::sampled(RealField psi) {
    if (psi.arity() != 1) throw PreconditionError("gauge function must be scalar");
    GaugeFunction p;
    p.psi = std::move(psi);
    return p;
}

RealField GaugeFunction::gradient() const { return grad ? *grad : ops::grad(psi); }
RealField GaugeFunction::time_derivative() const { return dt ? *dt : ops::time_derivative(psi); }

double GaugeFunction::boundary_defect() const {
    const Grid& g = psi.grid();
    const RealField gr = gradient();
    const RealField tt = time_derivative();
    double m = 0.0;
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            if (!g.on_boundary(s)) continue;
            m = std::max({m, std::abs(psi(k, s)), std::abs(tt(k, s))});
            for (int c = 0; c < g.dim(); ++c) m = std::max(m, std::abs(gr(k, s, c)));
        }
    }
    return m;
}

CoefficientPair apply_gauge(const CoefficientPair& c, const GaugeFunction& psi, double tol) {
    if (!psi.psi.grid().same_shape(c.grid())) throw PreconditionError("gauge function lives on a different grid");
    const double defect = psi.boundary_defect();
    if (!(defect <= tol)) {
        throw PreconditionError("gauge function does not vanish on the lateral boundary (defect " +
                                std::to_string(defect) + ")");
    }
    return {c.A + psi.gradient(), c.q + psi.time_derivative()};
}

RealField effective_potential(const CoefficientPair& c) {
    const Grid& g = c.grid();
    RealField out = c.q - ops::divergence(c.A);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            double a2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) a2 += c.A(k, s, d) * c.A(k, s, d);
            out(k, s) -= a2;
        }
    }
    return out;
}

template <class T>
double slice_l2(const Grid& g, std::span<const T> slice) {
    double acc = 0.0;
    for (std::size_t s = 0; s < slice.size(); ++s) acc += g.volume_weight(s) * std::norm(slice[s]);
    return std::sqrt(acc);
}

template <class T>
double norm(const Field<T>& f, NormKind kind, double h) {
    if (kind == NormKind::max) return f.max_abs();
    if (kind == NormKind::semiclassical_h1 && !(h > 0.0)) throw PreconditionError("semiclassical norm needs h > 0");
    const Grid& g = f.grid();
    auto sq = [&](const Field<T>& x) {
        double acc = 0.0;
        for (int k = 0; k < g.levels(); ++k) {
            for (int c = 0; c < x.arity(); ++c) {
                const double s = slice_l2<T>(g, x.slice(k, c));
                acc += g.time_weight(k) * s * s;
            }
        }
        return acc;
    };
    double total = sq(f);
    if (kind == NormKind::semiclassical_h1) {
        if (f.arity() != 1) throw PreconditionError("semiclassical norm expects a scalar field");
        total += h * h * sq(ops::grad(f));
    }
    return std::sqrt(total);
}

template double norm<double>(const Field<double>&, NormKind, double);
template double norm<Complex>(const Field<Complex>&, NormKind, double);
template double slice_l2<double>(const Grid&, std::span<const double>);
template double slice_l2<Complex>(const Grid&, std::span<const Complex>);

}  // namespace cgolab
