#pragma once

#include <functional>
#include <optional>

#include "cgolab/field.hpp"

namespace cgolab {

/// Surrogate caps for the regularity hypotheses on A (W^{1,inf}) and q (L^inf).
struct RegularityCaps {
    double a_w1inf = 1e6;
    double q_linf = 1e6;
};

/// Convection A (vector, arity n) and density q (scalar) on one grid.
struct CoefficientPair {
    RealField A;
    RealField q;

    CoefficientPair() = default;
    CoefficientPair(RealField a, RealField qq);

    /// A = 0, q = 0 on the grid.
    static CoefficientPair zero(const Grid& g);

    const Grid& grid() const { return q.grid(); }

    /// Discrete W^{1,inf} surrogate: max|A| + max|grad A| + max|d_t A|.
    double a_surrogate_norm() const;
    /// Throws PreconditionError when a surrogate norm is non-finite or above its cap.
    void validate(const RegularityCaps& caps = {}) const;

    /// Max over lateral boundary nodes and levels of |A1 - A2|.
    double boundary_mismatch(const CoefficientPair& other) const;
    /// Max over all nodes and levels of |A1 - A2|.
    double a_mismatch(const CoefficientPair& other) const;
};

/// Scalar gauge function Psi with optional closed-form first derivatives.
struct GaugeFunction {
    RealField psi;
    std::optional<RealField> grad;  // arity n
    std::optional<RealField> dt;

    using Scalar = std::function<double(double, const Vec3&)>;
    using Vector = std::function<std::array<double, 3>(double, const Vec3&)>;

    static GaugeFunction zero(const Grid& g);
    /// Samples Psi and, when given, its closed-form gradient and time derivative.
    static GaugeFunction analytic(const Grid& g, const Scalar& psi, const Vector& grad = {}, const Scalar& dt = {});
    /// Uses discrete stencils for the derivatives.
    static GaugeFunction sampled(RealField psi);

    RealField gradient() const;
    RealField time_derivative() const;
    /// Max over lateral boundary nodes of |Psi|, |grad Psi|, |d_t Psi|.
    double boundary_defect() const;
};

/// (A + grad Psi, q + d_t Psi). Rejects Psi whose boundary defect exceeds tol.
CoefficientPair apply_gauge(const CoefficientPair& c, const GaugeFunction& psi, double tol = 1e-8);

/// q~ = -div A - |A|^2 + q.
RealField effective_potential(const CoefficientPair& c);

enum class NormKind { l2, semiclassical_h1, max };

/// Space-time norm; the semiclassical kind is sqrt(||u||^2 + ||h grad u||^2).
template <class T>
double norm(const Field<T>& f, NormKind kind, double h = 1.0);

/// Spatial L2 norm of one time level of a scalar field.
template <class T>
double slice_l2(const Grid& g, std::span<const T> slice);

}  // namespace cgolab
