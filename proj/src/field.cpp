#include "cgolab/field.hpp"

namespace cgolab {

ComplexField to_complex(const RealField& f) {
    ComplexField out(f.grid(), f.arity());
    for (std::size_t i = 0; i < f.size(); ++i) out.data()[i] = f.data()[i];
    return out;
}

RealField real_part(const ComplexField& f) {
    RealField out(f.grid(), f.arity());
    for (std::size_t i = 0; i < f.size(); ++i) out.data()[i] = f.data()[i].real();
    return out;
}

namespace ops {

template <class T>
Field<T> grad(const Field<T>& f) {
    if (f.arity() != 1) throw PreconditionError("grad expects a scalar field");
    const Grid& g = f.grid();
    Field<T> out(g, g.dim());
    for (int k = 0; k < g.levels(); ++k) {
        for (int a = 0; a < g.dim(); ++a) stencil::d_axis<T>(g, f.slice(k), a, out.slice(k, a));
    }
    return out;
}

template <class T>
Field<T> laplacian(const Field<T>& f) {
    if (f.arity() != 1) throw PreconditionError("laplacian expects a scalar field");
    const Grid& g = f.grid();
    Field<T> out(g, 1);
    for (int k = 0; k < g.levels(); ++k) stencil::laplacian<T>(g, f.slice(k), out.slice(k));
    return out;
}

template <class T>
Field<T> divergence(const Field<T>& v) {
    const Grid& g = v.grid();
    if (v.arity() != g.dim()) throw PreconditionError("divergence expects a vector field of arity n");
    Field<T> out(g, 1);
    std::vector<T> tmp(g.spatial_size());
    for (int k = 0; k < g.levels(); ++k) {
        auto o = out.slice(k);
        for (int a = 0; a < g.dim(); ++a) {
            stencil::d_axis<T>(g, v.slice(k, a), a, tmp);
            for (std::size_t s = 0; s < tmp.size(); ++s) o[s] += tmp[s];
        }
    }
    return out;
}

template <class T>
Field<T> time_derivative(const Field<T>& f) {
    const Grid& g = f.grid();
    const int L = g.levels();
    if (L < 3) throw PreconditionError("time_derivative needs at least two time steps");
    Field<T> out(g, f.arity());
    const double inv = 1.0 / g.dt();
    for (int c = 0; c < f.arity(); ++c) {
        for (int k = 0; k < L; ++k) {
            auto o = out.slice(k, c);
            for (std::size_t s = 0; s < g.spatial_size(); ++s) {
                if (k == 0) {
                    o[s] = (-3.0 * f(0, s, c) + 4.0 * f(1, s, c) - f(2, s, c)) * (0.5 * inv);
                } else if (k == L - 1) {
                    o[s] = (3.0 * f(k, s, c) - 4.0 * f(k - 1, s, c) + f(k - 2, s, c)) * (0.5 * inv);
                } else {
                    o[s] = (f(k + 1, s, c) - f(k - 1, s, c)) * (0.5 * inv);
                }
            }
        }
    }
    return out;
}

template <class T>
Field<T> curl(const Field<T>& v) {
    const Grid& g = v.grid();
    if (v.arity() != g.dim()) throw PreconditionError("curl expects a vector field of arity n");
    const int n = g.dim();
    Field<T> out(g, n == 3 ? 3 : 1);
    std::vector<T> d1(g.spatial_size()), d2(g.spatial_size());
    for (int k = 0; k < g.levels(); ++k) {
        if (n == 2) {
            stencil::d_axis<T>(g, v.slice(k, 1), 0, d1);
            stencil::d_axis<T>(g, v.slice(k, 0), 1, d2);
            auto o = out.slice(k);
            for (std::size_t s = 0; s < d1.size(); ++s) o[s] = d1[s] - d2[s];
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            const int a = (c + 1) % 3, b = (c + 2) % 3;
            stencil::d_axis<T>(g, v.slice(k, b), a, d1);
            stencil::d_axis<T>(g, v.slice(k, a), b, d2);
            auto o = out.slice(k, c);
            for (std::size_t s = 0; s < d1.size(); ++s) o[s] = d1[s] - d2[s];
        }
    }
    return out;
}

template <class T>
BoundaryTrace<T> normal_derivative(const Field<T>& f, const BoundaryPartition& part) {
    if (f.arity() != 1) throw PreconditionError("normal_derivative expects a scalar field");
    const Grid& g = f.grid();
    BoundaryTrace<T> tr;
    tr.levels = g.levels();
    tr.facets = part.facets.size();
    tr.values.resize(static_cast<std::size_t>(tr.levels) * tr.facets);
    tr.mask.assign(tr.facets, 1);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t i = 0; i < tr.facets; ++i) {
            tr.at(k, i) = stencil::normal_derivative<T>(g, f.slice(k), part.facets[i]);
        }
    }
    return tr;
}

template <class T>
BoundaryTrace<T> trace(const Field<T>& f, const BoundaryPartition& part) {
    const Grid& g = f.grid();
    BoundaryTrace<T> tr;
    tr.levels = g.levels();
    tr.facets = part.facets.size();
    tr.values.resize(static_cast<std::size_t>(tr.levels) * tr.facets);
    tr.mask.assign(tr.facets, 1);
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t i = 0; i < tr.facets; ++i) tr.at(k, i) = f(k, part.facets[i].node);
    }
    return tr;
}

}  // namespace ops

namespace quad {

namespace {

double simpson_1d(int i, int n, double h) {
    if (n % 2 == 0) return (i == 0 || i == n - 1) ? 0.5 * h : h;
    if (i == 0 || i == n - 1) return h / 3.0;
    return (i % 2 ? 4.0 : 2.0) * h / 3.0;
}

}  // namespace

double simpson_volume_weight(const Grid& g, std::size_t node) {
    const auto idx = g.multi_index(node);
    double w = 1.0;
    for (int a = 0; a < g.dim(); ++a) w *= simpson_1d(idx[a], g.nx(a), g.dx(a));
    return w;
}

double simpson_time_weight(const Grid& g, int level) { return simpson_1d(level, g.levels(), g.dt()); }

template <class T>
T space_integral(const Grid& g, std::span<const T> slice) {
    T acc{};
    for (std::size_t s = 0; s < slice.size(); ++s) acc += g.volume_weight(s) * slice[s];
    return acc;
}

template <class T>
T integrate(const Field<T>& f) {
    if (f.arity() != 1) throw PreconditionError("integrate expects a scalar field");
    const Grid& g = f.grid();
    T acc{};
    for (int k = 0; k < g.levels(); ++k) acc += g.time_weight(k) * space_integral<T>(g, f.slice(k));
    return acc;
}

template <class T>
Complex inner(const Field<T>& a, const Field<T>& b) {
    if (!a.compatible(b) || a.arity() != 1) throw PreconditionError("inner: scalar fields of equal shape required");
    const Grid& g = a.grid();
    Complex acc{};
    for (int k = 0; k < g.levels(); ++k) {
        Complex sk{};
        auto x = a.slice(k);
        auto y = b.slice(k);
        for (std::size_t s = 0; s < x.size(); ++s) sk += g.volume_weight(s) * Complex(x[s]) * conj_of(y[s]);
        acc += g.time_weight(k) * sk;
    }
    return acc;
}

template <class T>
Complex boundary_inner(const Grid& g, const BoundaryPartition& part, const BoundaryTrace<T>& a,
                       const BoundaryTrace<T>* b, const std::vector<char>& mask) {
    Complex acc{};
    for (int k = 0; k < a.levels; ++k) {
        Complex sk{};
        for (std::size_t i = 0; i < a.facets; ++i) {
            if (!mask[i] || !a.mask[i]) continue;
            Complex w = b ? Complex(conj_of(b->at(k, i))) : Complex(1.0);
            sk += part.facets[i].weight * Complex(a.at(k, i)) * w;
        }
        acc += g.time_weight(k) * sk;
    }
    return acc;
}

}  // namespace quad

#define CGOLAB_INSTANTIATE(T)                                                                                   \
    template Field<T> ops::grad<T>(const Field<T>&);                                                            \
    template Field<T> ops::laplacian<T>(const Field<T>&);                                                       \
    template Field<T> ops::divergence<T>(const Field<T>&);                                                      \
    template Field<T> ops::time_derivative<T>(const Field<T>&);                                                 \
    template Field<T> ops::curl<T>(const Field<T>&);                                                            \
    template BoundaryTrace<T> ops::normal_derivative<T>(const Field<T>&, const BoundaryPartition&);             \
    template BoundaryTrace<T> ops::trace<T>(const Field<T>&, const BoundaryPartition&);                         \
    template T quad::integrate<T>(const Field<T>&);                                                             \
    template Complex quad::inner<T>(const Field<T>&, const Field<T>&);                                          \
    template T quad::space_integral<T>(const Grid&, std::span<const T>);                                        \
    template Complex quad::boundary_inner<T>(const Grid&, const BoundaryPartition&, const BoundaryTrace<T>&,    \
                                             const BoundaryTrace<T>*, const std::vector<char>&);

CGOLAB_INSTANTIATE(double)
CGOLAB_INSTANTIATE(Complex)

#undef CGOLAB_INSTANTIATE

}  // namespace cgolab
