#pragma once

// Second-order forward-mode differentiation: a Jet2 carries the value,
// gradient and (dense, exactly symmetric) Hessian of a scalar field at one
// point. Arithmetic on jets applies the second-order chain rule.

#include <span>
#include <vector>

#include "confcurv/expr.hpp"

namespace confcurv {

class Jet2 {
 public:
  Jet2() = default;

  static Jet2 constant(double v, int n);
  /// Seed for coordinate `index` (0-based) with value `x`.
  static Jet2 variable(int index, double x, int n);
  /// Jet of a field depending only on coordinate `axis`: value v, first
  /// derivative d1 and second derivative d2 along that axis.
  static Jet2 along_axis(int axis, double v, double d1, double d2, int n);
  /// Explicit value, gradient and row-major Hessian; the Hessian is
  /// symmetrized by averaging.
  static Jet2 from_parts(double v, std::span<const double> gradient, std::span<const double> hessian);

  int dim() const noexcept { return n_; }
  double value() const noexcept { return value_; }
  double grad(int i) const { return grad_[static_cast<std::size_t>(i)]; }
  double hess(int i, int j) const { return hess_[static_cast<std::size_t>(i * n_ + j)]; }
  std::span<const double> gradient() const noexcept { return grad_; }
  /// Row-major n x n.
  std::span<const double> hessian() const noexcept { return hess_; }

  double laplacian() const;
  double grad_norm2() const;
  bool all_finite() const;

  /// g(this) for a scalar function g with g(v) = g0, g'(v) = g1, g''(v) = g2.
  Jet2 compose(double g0, double g1, double g2) const;

  Jet2& operator+=(const Jet2& o);
  Jet2& operator-=(const Jet2& o);
  Jet2& operator*=(double s);

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(Jet2 a, double s) { return a *= s; }
  friend Jet2 operator*(double s, Jet2 a) { return a *= s; }
  friend Jet2 operator+(Jet2 a, double s) {
    a.value_ += s;
    return a;
  }
  friend Jet2 operator-(const Jet2& a);
  friend Jet2 operator*(const Jet2& a, const Jet2& b);
  /// Throws DomainError when b.value() == 0.
  friend Jet2 operator/(const Jet2& a, const Jet2& b);

 private:
  explicit Jet2(int n);
  void mirror_upper();

  int n_ = 0;
  double value_ = 0.0;
  std::vector<double> grad_;
  std::vector<double> hess_;
};

Jet2 reciprocal(const Jet2& a);
Jet2 exp(const Jet2& a);
Jet2 log(const Jet2& a);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);
Jet2 sinh(const Jet2& a);
Jet2 cosh(const Jet2& a);
Jet2 tanh(const Jet2& a);
Jet2 sqrt(const Jet2& a);
Jet2 abs(const Jet2& a);
/// a^c for a constant exponent, closed-form power rule.
Jet2 pow(const Jet2& a, double c);
/// a^b with a varying exponent; requires a > 0.
Jet2 pow(const Jet2& a, const Jet2& b);
Jet2 apply(Func f, const Jet2& a);

/// Value, gradient and Hessian of `expr` at `p`.
Jet2 eval_jet2(const ScalarExpr& expr, std::span<const double> p);

/// Cross-check of eval_jet2 against Richardson-extrapolated central
/// differences (steps `step` and `step`/2): returns the max over all
/// gradient and Hessian components of |jet - fd| / (1 + |jet|).
double finite_diff_check(const ScalarExpr& expr, std::span<const double> p, double step = 2e-3);

}  // namespace confcurv
