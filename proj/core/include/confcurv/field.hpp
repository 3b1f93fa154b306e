#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confcurv/expr.hpp"
#include "confcurv/jet.hpp"

namespace confcurv {

/// A smooth scalar field on R^n that can report its second-order jet.
///
/// Most fields are parsed expressions. Some are not expressible in the
/// expression language (an antiderivative computed by quadrature, a factor
/// reconstructed from a line integral) and are given by a jet procedure
/// plus the set of coordinates they may depend on.
class Field {
 public:
  using JetFn = std::function<Jet2(std::span<const double>)>;

  Field(ScalarExpr expr);  // NOLINT(google-explicit-constructor)
  Field(int dim, JetFn jet, std::vector<bool> depends_on, std::string description);

  static Field constant(double v, int dim);

  int dim() const noexcept { return dim_; }
  Jet2 jet(std::span<const double> p) const;
  double value(std::span<const double> p) const;

  /// Coordinates this field may depend on. Exact for expressions (the
  /// variables occurring in the tree), declared otherwise.
  const std::vector<bool>& depends_on() const noexcept { return depends_; }
  bool depends_on(int index) const { return depends_[static_cast<std::size_t>(index)]; }

  /// Present when the field is a plain expression.
  const std::optional<ScalarExpr>& expr() const noexcept { return expr_; }
  /// Canonical expression text, or the description for procedural fields.
  std::string describe() const;

 private:
  int dim_ = 0;
  std::optional<ScalarExpr> expr_;
  JetFn jet_;
  std::vector<bool> depends_;
  std::string description_;
};

/// s * a; stays an expression when `a` is one.
Field scaled(const Field& a, double s);
/// a * b.
Field product(const Field& a, const Field& b);
/// a / b.
Field quotient(const Field& a, const Field& b);

}  // namespace confcurv
