#include "cgolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace cgolab {

void Domain::validate() const {
    if (n != 2 && n != 3) {
        throw PreconditionError("domain dimension must be 2 or 3, got " + std::to_string(n));
    }
    for (int a = 0; a < n; ++a) {
        if (!(hi[a] > lo[a])) {
            throw PreconditionError("empty box along axis " + std::to_string(a + 1));
        }
    }
    if (!(T > 0.0)) {
        throw PreconditionError("final time T must be positive");
    }
    bool inside = true;
    for (int a = 0; a < n; ++a) {
        inside = inside && x0[a] >= lo[a] && x0[a] <= hi[a];
    }
    if (inside) {
        throw PreconditionError("x0 must lie outside the closed box");
    }
}

Domain Domain::unit_cube() { return Domain{}; }

Domain Domain::unit_square() {
    Domain d;
    d.n = 2;
    d.x0 = {-2.0, 0.5, 0.0};
    return d;
}

Grid::Grid(Domain domain, int nx, int nt) : Grid(domain, {nx, nx, domain.n == 3 ? nx : 1}, nt) {}

Grid::Grid(Domain domain, std::array<int, 3> nx, int nt) : domain_(domain), nx_(nx), nt_(nt) {
    domain_.validate();
    if (domain_.n == 2) nx_[2] = 1;
    for (int a = 0; a < domain_.n; ++a) {
        if (nx_[a] < 5) {
            throw PreconditionError("need at least 5 nodes per axis, axis " + std::to_string(a + 1) + " has " +
                                    std::to_string(nx_[a]));
        }
        dx_[a] = (domain_.hi[a] - domain_.lo[a]) / (nx_[a] - 1);
    }
    if (nt_ < 1) throw PreconditionError("need at least one time step");
    dt_ = domain_.T / nt_;
    stride_[2] = 1;
    stride_[1] = static_cast<std::size_t>(nx_[2]);
    stride_[0] = stride_[1] * static_cast<std::size_t>(nx_[1]);
    spatial_size_ = stride_[0] * static_cast<std::size_t>(nx_[0]);
}

std::array<int, 3> Grid::multi_index(std::size_t node) const {
    return {static_cast<int>(node / stride_[0]), static_cast<int>((node / stride_[1]) % nx_[1]),
            static_cast<int>(node % nx_[2])};
}

std::size_t Grid::flat(const std::array<int, 3>& idx) const {
    return idx[0] * stride_[0] + idx[1] * stride_[1] + idx[2] * stride_[2];
}

Vec3 Grid::point(std::size_t node) const {
    auto idx = multi_index(node);
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < domain_.n; ++a) x[a] = domain_.lo[a] + idx[a] * dx_[a];
    return x;
}

bool Grid::on_boundary(std::size_t node) const {
    auto idx = multi_index(node);
    for (int a = 0; a < domain_.n; ++a) {
        if (idx[a] == 0 || idx[a] == nx_[a] - 1) return true;
    }
    return false;
}

double Grid::volume_weight(std::size_t node) const {
    auto idx = multi_index(node);
    double w = 1.0;
    for (int a = 0; a < domain_.n; ++a) {
        w *= dx_[a] * ((idx[a] == 0 || idx[a] == nx_[a] - 1) ? 0.5 : 1.0);
    }
    return w;
}

double Grid::time_weight(int level) const { return dt_ * ((level == 0 || level == nt_) ? 0.5 : 1.0); }

bool Grid::same_shape(const Grid& other) const {
    if (domain_.n != other.domain_.n || nx_ != other.nx_ || nt_ != other.nt_ || domain_.T != other.domain_.T) return false;
    for (int a = 0; a < domain_.n; ++a) {
        if (domain_.lo[a] != other.domain_.lo[a] || domain_.hi[a] != other.domain_.hi[a]) return false;
    }
    return true;
}

Grid Grid::refined() const {
    std::array<int, 3> nx = nx_;
    for (int a = 0; a < domain_.n; ++a) nx[a] = 2 * (nx_[a] - 1) + 1;
    return Grid(domain_, nx, 2 * nt_);
}

std::string to_string(Subset s) {
    switch (s) {
        case Subset::full: return "full";
        case Subset::front: return "front";
        case Subset::back: return "back";
        case Subset::plus: return "plus";
        case Subset::minus: return "minus";
    }
    return "full";
}

Subset subset_from_string(const std::string& name) {
    if (name == "full") return Subset::full;
    if (name == "front") return Subset::front;
    if (name == "back") return Subset::back;
    if (name == "plus") return Subset::plus;
    if (name == "minus") return Subset::minus;
    throw PreconditionError("unknown boundary subset '" + name + "'");
}

bool BoundaryPartition::contains(const Facet& f, Subset s) const {
    switch (s) {
        case Subset::full: return true;
        case Subset::front: return f.front;
        case Subset::back: return !f.front;
        case Subset::plus: return f.plus;
        case Subset::minus: return !f.plus;
    }
    return false;
}

std::vector<char> BoundaryPartition::mask(Subset s) const {
    std::vector<char> m(facets.size());
    for (std::size_t i = 0; i < facets.size(); ++i) m[i] = contains(facets[i], s) ? 1 : 0;
    return m;
}

double BoundaryPartition::area(Subset s) const {
    double a = 0.0;
    for (const auto& f : facets) {
        if (contains(f, s)) a += f.weight;
    }
    return a;
}

Vec3 log_weight_gradient(const Vec3& x, const Vec3& x0) {
    Vec3 d{x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]};
    double r2 = dot(d, d);
    return {d[0] / r2, d[1] / r2, d[2] / r2};
}

BoundaryPartition classify_boundary(const Grid& grid, double epsilon0) {
    if (!(epsilon0 >= 0.0)) throw PreconditionError("epsilon0 must be non-negative");
    grid.domain().validate();
    const Domain& dom = grid.domain();
    const int n = dom.n;

    BoundaryPartition part;
    part.epsilon0 = epsilon0;
    std::vector<std::size_t> first_facet(grid.spatial_size(), std::numeric_limits<std::size_t>::max());

    for (int axis = 0; axis < n; ++axis) {
        for (int side : {-1, 1}) {
            const int fixed = side < 0 ? 0 : grid.nx(axis) - 1;
            for (std::size_t s = 0; s < grid.spatial_size(); ++s) {
                auto idx = grid.multi_index(s);
                if (idx[axis] != fixed) continue;
                Facet f;
                f.node = s;
                f.axis = axis;
                f.side = side;
                f.normal = {0.0, 0.0, 0.0};
                f.normal[axis] = side;
                double w = 1.0;
                for (int b = 0; b < n; ++b) {
                    if (b == axis) continue;
                    w *= grid.dx(b) * ((idx[b] == 0 || idx[b] == grid.nx(b) - 1) ? 0.5 : 1.0);
                }
                f.weight = w;
                const Vec3 x = grid.point(s);
                const Vec3 rel{x[0] - dom.x0[0], x[1] - dom.x0[1], x[2] - dom.x0[2]};
                f.front = dot(rel, f.normal) <= 0.0;
                f.flux = dot(log_weight_gradient(x, dom.x0), f.normal);
                f.plus = f.flux >= epsilon0 && f.flux > 0.0;
                if (first_facet[s] == std::numeric_limits<std::size_t>::max()) first_facet[s] = part.facets.size();
                part.facets.push_back(f);
            }
        }
    }
    for (std::size_t s = 0; s < grid.spatial_size(); ++s) {
        if (first_facet[s] != std::numeric_limits<std::size_t>::max()) {
            part.boundary_nodes.push_back(s);
            part.owner.push_back(first_facet[s]);
        }
    }
    return part;
}

double default_epsilon0(const Grid& grid) {
    auto part = classify_boundary(grid, 0.0);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& f : part.facets) {
        if (f.flux > 0.0) m = std::min(m, f.flux);
    }
    return std::isfinite(m) ? 0.05 * m : 0.0;
}

namespace stencil {

namespace {
void check(const Grid& g, std::size_t a, std::size_t b) {
    if (a != g.spatial_size() || b != g.spatial_size()) {
        throw PreconditionError("stencil: slice size does not match grid");
    }
}
}  // namespace

template <class T>
void d_axis(const Grid& g, std::span<const T> u, int axis, std::span<T> out) {
    check(g, u.size(), out.size());
    const std::size_t st = g.stride(axis);
    const int N = g.nx(axis);
    const double inv = 1.0 / g.dx(axis);
    for (std::size_t s = 0; s < u.size(); ++s) {
        const int i = static_cast<int>((s / st) % N);
        if (i == 0) {
            out[s] = (-3.0 * u[s] + 4.0 * u[s + st] - u[s + 2 * st]) * (0.5 * inv);
        } else if (i == N - 1) {
            out[s] = (3.0 * u[s] - 4.0 * u[s - st] + u[s - 2 * st]) * (0.5 * inv);
        } else {
            out[s] = (u[s + st] - u[s - st]) * (0.5 * inv);
        }
    }
}

template <class T>
void d2_axis(const Grid& g, std::span<const T> u, int axis, std::span<T> out) {
    check(g, u.size(), out.size());
    const std::size_t st = g.stride(axis);
    const int N = g.nx(axis);
    const double inv2 = 1.0 / (g.dx(axis) * g.dx(axis));
    for (std::size_t s = 0; s < u.size(); ++s) {
        const int i = static_cast<int>((s / st) % N);
        if (i == 0) {
            out[s] = (2.0 * u[s] - 5.0 * u[s + st] + 4.0 * u[s + 2 * st] - u[s + 3 * st]) * inv2;
        } else if (i == N - 1) {
            out[s] = (2.0 * u[s] - 5.0 * u[s - st] + 4.0 * u[s - 2 * st] - u[s - 3 * st]) * inv2;
        } else {
            out[s] = (u[s + st] - 2.0 * u[s] + u[s - st]) * inv2;
        }
    }
}

template <class T>
void laplacian(const Grid& g, std::span<const T> u, std::span<T> out) {
    check(g, u.size(), out.size());
    std::vector<T> tmp(u.size());
    std::fill(out.begin(), out.end(), T{});
    for (int a = 0; a < g.dim(); ++a) {
        d2_axis<T>(g, u, a, tmp);
        for (std::size_t s = 0; s < u.size(); ++s) out[s] += tmp[s];
    }
}

template <class T>
T normal_derivative(const Grid& g, std::span<const T> u, const Facet& f) {
    const std::size_t st = g.stride(f.axis);
    const double inv = 1.0 / g.dx(f.axis);
    const std::size_t s = f.node;
    if (f.side < 0) {
        // -d/dx_axis with the forward one-sided stencil
        return (3.0 * u[s] - 4.0 * u[s + st] + u[s + 2 * st]) * (0.5 * inv);
    }
    return (3.0 * u[s] - 4.0 * u[s - st] + u[s - 2 * st]) * (0.5 * inv);
}

template void d_axis<double>(const Grid&, std::span<const double>, int, std::span<double>);
template void d_axis<std::complex<double>>(const Grid&, std::span<const std::complex<double>>, int,
                                           std::span<std::complex<double>>);
template void d2_axis<double>(const Grid&, std::span<const double>, int, std::span<double>);
template void d2_axis<std::complex<double>>(const Grid&, std::span<const std::complex<double>>, int,
                                            std::span<std::complex<double>>);
template void laplacian<double>(const Grid&, std::span<const double>, std::span<double>);
template void laplacian<std::complex<double>>(const Grid&, std::span<const std::complex<double>>,
                                              std::span<std::complex<double>>);
template double normal_derivative<double>(const Grid&, std::span<const double>, const Facet&);
template std::complex<double> normal_derivative<std::complex<double>>(const Grid&,
                                                                      std::span<const std::complex<double>>,
                                                                      const Facet&);

}  // namespace stencil

}  // namespace cgolab
