#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cgolab/error.hpp"

namespace cgolab {

/// Point or vector in R^n, n <= 3. Unused trailing components are zero.
using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Axis-aligned box Omega in R^n with an exterior observation point x0 and final time T.
struct Domain {
    int n = 3;
    Vec3 lo{0.0, 0.0, 0.0};
    Vec3 hi{1.0, 1.0, 1.0};
    Vec3 x0{-2.0, 0.5, 0.5};
    double T = 1.0;

    /// Throws PreconditionError when n is not 2 or 3, the box is empty, T <= 0,
    /// or x0 lies in the closed box (the box is its own convex hull).
    void validate() const;

    static Domain unit_cube();
    static Domain unit_square();
};

/// Tensor space-time grid: nx nodes per spatial axis, nt time steps (nt + 1 levels).
///
/// Spatial nodes are flattened row-major with the last axis fastest.
class Grid {
public:
    Grid() = default;
    Grid(Domain domain, std::array<int, 3> nx, int nt);
    Grid(Domain domain, int nx, int nt);

    const Domain& domain() const { return domain_; }
    int dim() const { return domain_.n; }
    int nx(int axis) const { return nx_[axis]; }
    const std::array<int, 3>& nx() const { return nx_; }
    double dx(int axis) const { return dx_[axis]; }
    int nt() const { return nt_; }
    int levels() const { return nt_ + 1; }
    double dt() const { return dt_; }
    double T() const { return domain_.T; }
    double t(int level) const { return level * dt_; }

    std::size_t spatial_size() const { return spatial_size_; }
    std::size_t stride(int axis) const { return stride_[axis]; }

    std::array<int, 3> multi_index(std::size_t node) const;
    std::size_t flat(const std::array<int, 3>& idx) const;
    Vec3 point(std::size_t node) const;
    bool on_boundary(std::size_t node) const;

    /// Trapezoid weight of a node for integration over Omega.
    double volume_weight(std::size_t node) const;
    /// Trapezoid weight of a time level for integration over (0, T).
    double time_weight(int level) const;

    bool same_shape(const Grid& other) const;
    /// Same domain, every spatial axis refined to 2*(nx-1)+1 nodes and nt doubled.
    Grid refined() const;

private:
    Domain domain_{};
    std::array<int, 3> nx_{1, 1, 1};
    Vec3 dx_{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> stride_{0, 0, 0};
    std::size_t spatial_size_ = 0;
    int nt_ = 0;
    double dt_ = 0.0;
};

/// One boundary node seen from one face. Edge and corner nodes appear once per face they lie on.
struct Facet {
    std::size_t node = 0;
    int axis = 0;
    int side = -1;  // -1: face x_axis = lo, +1: face x_axis = hi
    Vec3 normal{};
    double weight = 0.0;  // trapezoid surface weight on the face
    bool front = false;   // (x - x0) . nu <= 0
    bool plus = false;    // grad(varphi) . nu >= epsilon0 (and > 0)
    double flux = 0.0;    // grad(varphi) . nu
};

enum class Subset { full, front, back, plus, minus };

std::string to_string(Subset s);
Subset subset_from_string(const std::string& name);

/// Boundary facets of a box grid tagged relative to x0.
///
/// Node-level tags follow the owning face: the first axis (x1, then x2, then x3)
/// on whose boundary the node lies.
struct BoundaryPartition {
    std::vector<Facet> facets;
    std::vector<std::size_t> boundary_nodes;
    std::vector<std::size_t> owner;  // per boundary node, index into facets
    double epsilon0 = 0.0;

    bool contains(const Facet& f, Subset s) const;
    /// Facet mask for a subset; front/minus and back/plus pairs are complementary.
    std::vector<char> mask(Subset s) const;
    bool node_is_front(std::size_t boundary_index) const { return facets[owner[boundary_index]].front; }
    double area(Subset s = Subset::full) const;
};

BoundaryPartition classify_boundary(const Grid& grid, double epsilon0);

/// 0.05 times the smallest positive grad(varphi).nu over boundary facets.
double default_epsilon0(const Grid& grid);

/// grad(varphi) for varphi = log|x - x0|.
Vec3 log_weight_gradient(const Vec3& x, const Vec3& x0);

namespace stencil {

// Spatial stencils on one time slice of nodes. Second-order central in the
// interior, second-order one-sided at the two ends of each axis line.

template <class T>
void d_axis(const Grid& g, std::span<const T> u, int axis, std::span<T> out);

template <class T>
void d2_axis(const Grid& g, std::span<const T> u, int axis, std::span<T> out);

template <class T>
void laplacian(const Grid& g, std::span<const T> u, std::span<T> out);

/// One-sided second-order outward normal derivative at a facet.
template <class T>
T normal_derivative(const Grid& g, std::span<const T> u, const Facet& f);

}  // namespace stencil

}  // namespace cgolab
