#include "confcurv/field.hpp"

#include "confcurv/errors.hpp"

namespace confcurv {

Field::Field(ScalarExpr expr)
    : dim_(expr.dim()), expr_(expr), depends_(expr.free_variables()) {}

Field::Field(int dim, JetFn jet, std::vector<bool> depends_on, std::string description)
    : dim_(dim), jet_(std::move(jet)), depends_(std::move(depends_on)), description_(std::move(description)) {
  if (depends_.size() != static_cast<std::size_t>(dim)) {
    throw DimensionMismatch("dependency mask size does not match field dimension");
  }
}

Field Field::constant(double v, int dim) { return Field(ScalarExpr::constant(v, dim)); }

Jet2 Field::jet(std::span<const double> p) const {
  if (expr_) return eval_jet2(*expr_, p);
  return jet_(p);
}

double Field::value(std::span<const double> p) const {
  if (expr_) return expr_->eval(p);
  return jet_(p).value();
}

std::string Field::describe() const {
  if (expr_) return expr_->to_canonical_text();
  return description_;
}

namespace {

std::vector<bool> union_mask(const Field& a, const Field& b) {
  std::vector<bool> m(static_cast<std::size_t>(a.dim()));
  for (int i = 0; i < a.dim(); ++i) m[static_cast<std::size_t>(i)] = a.depends_on(i) || b.depends_on(i);
  return m;
}

void require_same_dim(const Field& a, const Field& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("fields over different dimensions");
}

}  // namespace

Field scaled(const Field& a, double s) {
  if (a.expr()) return Field(ScalarExpr::constant(s, a.dim()) * *a.expr());
  return Field(
      a.dim(), [a, s](std::span<const double> p) { return a.jet(p) * s; }, a.depends_on(),
      std::to_string(s) + " * [" + a.describe() + "]");
}

Field product(const Field& a, const Field& b) {
  require_same_dim(a, b);
  if (a.expr() && b.expr()) return Field(*a.expr() * *b.expr());
  return Field(
      a.dim(), [a, b](std::span<const double> p) { return a.jet(p) * b.jet(p); }, union_mask(a, b),
      "[" + a.describe() + "] * [" + b.describe() + "]");
}

Field quotient(const Field& a, const Field& b) {
  require_same_dim(a, b);
  if (a.expr() && b.expr()) return Field(*a.expr() / *b.expr());
  return Field(
      a.dim(), [a, b](std::span<const double> p) { return a.jet(p) / b.jet(p); }, union_mask(a, b),
      "[" + a.describe() + "] / [" + b.describe() + "]");
}

}  // namespace confcurv
