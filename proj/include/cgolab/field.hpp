#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cgolab/geometry.hpp"

namespace cgolab {

using Complex = std::complex<double>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double conj_of(double x) { return x; }
inline Complex conj_of(Complex z) { return std::conj(z); }

/// Scalar or vector field sampled on every node of a space-time grid.
///
/// Storage is level-major, then component, then spatial node, so each
/// (level, component) slice is contiguous.
template <class T>
class Field {
public:
    using value_type = T;

    Field() = default;
    explicit Field(const Grid& grid, int arity = 1, T fill = T{})
        : grid_(grid), arity_(arity), data_(static_cast<std::size_t>(grid.levels()) * arity * grid.spatial_size(), fill) {
        if (arity < 1) throw PreconditionError("field arity must be positive");
    }

    const Grid& grid() const { return grid_; }
    int arity() const { return arity_; }
    std::size_t size() const { return data_.size(); }
    std::size_t slice_size() const { return grid_.spatial_size(); }

    T& operator()(int level, std::size_t node, int comp = 0) { return data_[offset(level, comp) + node]; }
    const T& operator()(int level, std::size_t node, int comp = 0) const { return data_[offset(level, comp) + node]; }

    std::span<T> slice(int level, int comp = 0) { return {data_.data() + offset(level, comp), grid_.spatial_size()}; }
    std::span<const T> slice(int level, int comp = 0) const {
        return {data_.data() + offset(level, comp), grid_.spatial_size()};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool compatible(const Field& other) const { return grid_.same_shape(other.grid_) && arity_ == other.arity_; }

    Field& operator+=(const Field& o) {
        require(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        require(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Field& operator*=(T s) {
        for (auto& v : data_) v *= s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(T s, Field a) { return a *= s; }

    bool all_finite() const {
        for (const auto& v : data_) {
            if (!std::isfinite(std::abs(v))) return false;
        }
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Samples f(t, x) for a scalar field.
    static Field sample(const Grid& g, const std::function<T(double, const Vec3&)>& f) {
        Field out(g, 1);
        for (int k = 0; k < g.levels(); ++k) {
            const double t = g.t(k);
            for (std::size_t s = 0; s < g.spatial_size(); ++s) out(k, s) = f(t, g.point(s));
        }
        return out;
    }

    /// Samples a vector field of arity grid.dim(); f returns components in a Vec-like array.
    static Field sample_vector(const Grid& g, const std::function<std::array<T, 3>(double, const Vec3&)>& f) {
        Field out(g, g.dim());
        for (int k = 0; k < g.levels(); ++k) {
            const double t = g.t(k);
            for (std::size_t s = 0; s < g.spatial_size(); ++s) {
                auto v = f(t, g.point(s));
                for (int c = 0; c < g.dim(); ++c) out(k, s, c) = v[c];
            }
        }
        return out;
    }

private:
    std::size_t offset(int level, int comp) const {
        return (static_cast<std::size_t>(level) * arity_ + comp) * grid_.spatial_size();
    }
    void require(const Field& o) const {
        if (!compatible(o)) throw PreconditionError("field shape mismatch");
    }

    Grid grid_{};
    int arity_ = 1;
    std::vector<T> data_;
};

using RealField = Field<double>;
using ComplexField = Field<Complex>;

ComplexField to_complex(const RealField& f);
RealField real_part(const ComplexField& f);

/// Values on boundary facets at every time level, optionally restricted to a subset.
template <class T>
struct BoundaryTrace {
    int levels = 0;
    std::size_t facets = 0;
    std::vector<T> values;   // level-major: values[level * facets + facet]
    std::vector<char> mask;  // 1 where the trace is defined
    Subset subset = Subset::full;

    T& at(int level, std::size_t facet) { return values[static_cast<std::size_t>(level) * facets + facet]; }
    const T& at(int level, std::size_t facet) const {
        return values[static_cast<std::size_t>(level) * facets + facet];
    }
};

// Discrete space-time operators. All are linear and apply the geometry
// stencils slice by slice.
namespace ops {

template <class T>
Field<T> grad(const Field<T>& f);
template <class T>
Field<T> laplacian(const Field<T>& f);
template <class T>
Field<T> divergence(const Field<T>& v);
template <class T>
Field<T> time_derivative(const Field<T>& f);
/// Curl of a vector field: arity 3 for n = 3, scalar (arity 1) for n = 2.
template <class T>
Field<T> curl(const Field<T>& v);
template <class T>
BoundaryTrace<T> normal_derivative(const Field<T>& f, const BoundaryPartition& part);
/// Restriction of a scalar field to boundary facets.
template <class T>
BoundaryTrace<T> trace(const Field<T>& f, const BoundaryPartition& part);

}  // namespace ops

// Trapezoid quadrature over Omega_T, Omega and the lateral boundary.
namespace quad {

template <class T>
T integrate(const Field<T>& f);
/// Integral over Omega_T of a * conj(b) for scalar fields.
template <class T>
Complex inner(const Field<T>& a, const Field<T>& b);
template <class T>
T space_integral(const Grid& g, std::span<const T> slice);
/// Composite Simpson weights per node and per level (trapezoid along axes with an even node count).
double simpson_volume_weight(const Grid& g, std::size_t node);
double simpson_time_weight(const Grid& g, int level);

/// Integral over (0,T) x facets(mask) of trace * conj(weight_trace); weight may be null.
template <class T>
Complex boundary_inner(const Grid& g, const BoundaryPartition& part, const BoundaryTrace<T>& a,
                       const BoundaryTrace<T>* b, const std::vector<char>& mask);

}  // namespace quad

}  // namespace cgolab
