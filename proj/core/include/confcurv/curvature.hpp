#pragma once

// Curvature of conformally flat metrics gbar = delta / u^2, computed two
// independent ways:
//
//  * closed conformal formulas in the total factor u (Ricci, scalar,
//    Schouten) and the decomposition R = A ⊙ gbar;
//  * a Christoffel-symbol oracle that only sees the metric components and
//    their first and second derivatives.
//
// Sign convention. For R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z the (0,4)
// tensor is R_ijkl = gbar(R(∂i,∂j)∂l, ∂k), so that R_ijij is the sectional
// curvature times the Gram determinant and the round sphere is positive.
// With this choice R = A ⊙ gbar holds verbatim for the ⊙ of tensors.hpp.

#include <span>
#include <vector>

#include "confcurv/field.hpp"
#include "confcurv/jet.hpp"
#include "confcurv/tensors.hpp"

namespace confcurv {

/// gbar = g / phi_rel^2 with background g = delta / F^2, i.e.
/// gbar = delta / u^2 with total factor u = phi_rel * F.
class ConformalMetric {
 public:
  /// Throws DimensionMismatch unless both fields share the same n >= 3.
  ConformalMetric(Field background, Field phi_rel);

  /// Euclidean background (F = 1).
  static ConformalMetric euclidean(Field u);

  int dim() const noexcept { return n_; }
  const Field& background() const noexcept { return background_; }
  const Field& phi_rel() const noexcept { return phi_rel_; }

  /// Jet of u = phi_rel * F; throws SingularMetric when u(p) = 0.
  Jet2 total_factor(std::span<const double> p) const;

  /// gbar at p.
  SymBilinear metric(std::span<const double> p) const;

 private:
  int n_;
  Field background_;
  Field phi_rel_;
};

// Closed-form quantities from the jet of the total factor u (u != 0).
SymBilinear metric_from_factor(const Jet2& u);
SymBilinear ricci_from_factor(const Jet2& u);
double scalar_from_factor(const Jet2& u);
SymBilinear schouten_from_factor(const Jet2& u);
/// A = (Ric - K/(2(n-1)) gbar) / (n-2), the defining combination.
SymBilinear schouten_definitional_from_factor(const Jet2& u);
CurvTensor riemann_decomp_from_factor(const Jet2& u);
CurvTensor riemann_oracle_from_factor(const Jet2& u);

SymBilinear ricci(const ConformalMetric& m, std::span<const double> p);
double scalar_curv(const ConformalMetric& m, std::span<const double> p);
SymBilinear schouten(const ConformalMetric& m, std::span<const double> p);
SymBilinear schouten_definitional(const ConformalMetric& m, std::span<const double> p);
/// A_gbar ⊙ gbar.
CurvTensor riemann_decomp(const ConformalMetric& m, std::span<const double> p);
/// Christoffel route, fully analytic (no finite differences).
CurvTensor riemann_oracle(const ConformalMetric& m, std::span<const double> p);

/// Riemann tensor of an arbitrary metric given the jets of its components
/// (row-major n x n, symmetric). Independent of any conformal structure.
CurvTensor riemann_from_metric_jets(std::span<const Jet2> metric);

/// K(∂i, ∂j) from a curvature tensor and the metric at the same point.
double sectional_from(const CurvTensor& r, const SymBilinear& g, int i, int j);
/// Sectional curvature of the coordinate plane (i, j), i != j, from the
/// oracle tensor.
double sectional(const ConformalMetric& m, std::span<const double> p, int i, int j);

/// Max-norm distance between oracle and decomposition: the numerical
/// counterpart of a vanishing Weyl tensor.
double weyl_residual(const ConformalMetric& m, std::span<const double> p);

/// Ricci contraction R_jl = gbar^{ik} R_ijkl of a (0,4) tensor.
SymBilinear ricci_contraction(const CurvTensor& r, const SymBilinear& g);

}  // namespace confcurv
