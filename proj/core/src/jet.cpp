#include "confcurv/jet.hpp"

#include <algorithm>
#include <cmath>

#include "confcurv/errors.hpp"

namespace confcurv {

Jet2::Jet2(int n)
    : n_(n),
      grad_(static_cast<std::size_t>(n), 0.0),
      hess_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0) {}

Jet2 Jet2::constant(double v, int n) {
  Jet2 j(n);
  j.value_ = v;
  return j;
}

Jet2 Jet2::variable(int index, double x, int n) {
  if (index < 0 || index >= n) throw DimensionMismatch("jet seed index out of range");
  Jet2 j(n);
  j.value_ = x;
  j.grad_[static_cast<std::size_t>(index)] = 1.0;
  return j;
}

Jet2 Jet2::along_axis(int axis, double v, double d1, double d2, int n) {
  if (axis < 0 || axis >= n) throw DimensionMismatch("jet axis out of range");
  Jet2 j(n);
  j.value_ = v;
  j.grad_[static_cast<std::size_t>(axis)] = d1;
  j.hess_[static_cast<std::size_t>(axis * n + axis)] = d2;
  return j;
}

Jet2 Jet2::from_parts(double v, std::span<const double> gradient, std::span<const double> hessian) {
  const int n = static_cast<int>(gradient.size());
  if (hessian.size() != gradient.size() * gradient.size()) throw DimensionMismatch("hessian size does not match gradient");
  Jet2 j(n);
  j.value_ = v;
  std::copy(gradient.begin(), gradient.end(), j.grad_.begin());
  for (int i = 0; i < n; ++i) {
    for (int k = i; k < n; ++k) {
      j.hess_[static_cast<std::size_t>(i * n + k)] =
          0.5 * (hessian[static_cast<std::size_t>(i * n + k)] + hessian[static_cast<std::size_t>(k * n + i)]);
    }
  }
  j.mirror_upper();
  return j;
}

void Jet2::mirror_upper() {
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) hess_[static_cast<std::size_t>(j * n_ + i)] = hess_[static_cast<std::size_t>(i * n_ + j)];
  }
}

double Jet2::laplacian() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += hess(i, i);
  return s;
}

double Jet2::grad_norm2() const {
  double s = 0.0;
  for (double g : grad_) s += g * g;
  return s;
}

bool Jet2::all_finite() const {
  if (!std::isfinite(value_)) return false;
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(grad_.begin(), grad_.end(), finite) && std::all_of(hess_.begin(), hess_.end(), finite);
}

Jet2 Jet2::compose(double g0, double g1, double g2) const {
  Jet2 r(n_);
  r.value_ = g0;
  for (int i = 0; i < n_; ++i) r.grad_[static_cast<std::size_t>(i)] = g1 * grad(i);
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      r.hess_[static_cast<std::size_t>(i * n_ + j)] = g1 * hess(i, j) + g2 * grad(i) * grad(j);
    }
  }
  r.mirror_upper();
  return r;
}

Jet2& Jet2::operator+=(const Jet2& o) {
  if (o.n_ != n_) throw DimensionMismatch("jet dimension mismatch");
  value_ += o.value_;
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += o.grad_[i];
  for (std::size_t i = 0; i < hess_.size(); ++i) hess_[i] += o.hess_[i];
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
  if (o.n_ != n_) throw DimensionMismatch("jet dimension mismatch");
  value_ -= o.value_;
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] -= o.grad_[i];
  for (std::size_t i = 0; i < hess_.size(); ++i) hess_[i] -= o.hess_[i];
  return *this;
}

Jet2& Jet2::operator*=(double s) {
  value_ *= s;
  for (double& g : grad_) g *= s;
  for (double& h : hess_) h *= s;
  return *this;
}

Jet2 operator-(const Jet2& a) { return a.compose(-a.value_, -1.0, 0.0); }

Jet2 operator*(const Jet2& a, const Jet2& b) {
  if (a.n_ != b.n_) throw DimensionMismatch("jet dimension mismatch");
  const int n = a.n_;
  Jet2 r(n);
  r.value_ = a.value_ * b.value_;
  for (int i = 0; i < n; ++i) {
    r.grad_[static_cast<std::size_t>(i)] = a.value_ * b.grad(i) + b.value_ * a.grad(i);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      r.hess_[static_cast<std::size_t>(i * n + j)] = a.value_ * b.hess(i, j) + b.value_ * a.hess(i, j) +
                                                     a.grad(i) * b.grad(j) + b.grad(i) * a.grad(j);
    }
  }
  r.mirror_upper();
  return r;
}

Jet2 reciprocal(const Jet2& a) {
  const double v = a.value();
  if (v == 0.0) throw DomainError("division by zero");
  const double r = 1.0 / v;
  return a.compose(r, -r * r, 2.0 * r * r * r);
}

Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.value());
  return a.compose(e, e, e);
}

Jet2 log(const Jet2& a) {
  const double v = a.value();
  if (v < 0.0) throw DomainError("log of a negative number");
  return a.compose(std::log(v), 1.0 / v, -1.0 / (v * v));
}

Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.value());
  return a.compose(s, std::cos(a.value()), -s);
}

Jet2 cos(const Jet2& a) {
  const double c = std::cos(a.value());
  return a.compose(c, -std::sin(a.value()), -c);
}

Jet2 sinh(const Jet2& a) {
  const double s = std::sinh(a.value());
  return a.compose(s, std::cosh(a.value()), s);
}

Jet2 cosh(const Jet2& a) {
  const double c = std::cosh(a.value());
  return a.compose(c, std::sinh(a.value()), c);
}

Jet2 tanh(const Jet2& a) {
  const double t = std::tanh(a.value());
  const double d = 1.0 - t * t;
  return a.compose(t, d, -2.0 * t * d);
}

Jet2 sqrt(const Jet2& a) {
  const double v = a.value();
  if (v < 0.0) throw DomainError("sqrt of a negative number");
  const double s = std::sqrt(v);
  return a.compose(s, 0.5 / s, -0.25 / (v * s));
}

Jet2 abs(const Jet2& a) {
  const double v = a.value();
  const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return a.compose(std::abs(v), sign, 0.0);
}

Jet2 pow(const Jet2& a, double c) {
  const double v = a.value();
  const bool integral = std::isfinite(c) && std::floor(c) == c;
  if (v < 0.0 && !integral) throw DomainError("non-integer power of a negative base");
  if (v == 0.0 && c < 0.0) throw DomainError("division by zero in negative power");
  const double g0 = std::pow(v, c);
  const double g1 = c == 0.0 ? 0.0 : c * std::pow(v, c - 1.0);
  const double g2 = (c == 0.0 || c == 1.0) ? 0.0 : c * (c - 1.0) * std::pow(v, c - 2.0);
  return a.compose(g0, g1, g2);
}

Jet2 pow(const Jet2& a, const Jet2& b) {
  const bool constant_exponent =
      std::all_of(b.gradient().begin(), b.gradient().end(), [](double g) { return g == 0.0; }) &&
      std::all_of(b.hessian().begin(), b.hessian().end(), [](double h) { return h == 0.0; });
  if (constant_exponent) return pow(a, b.value());
  if (a.value() <= 0.0) throw DomainError("variable exponent requires a positive base");
  return exp(b * log(a));
}

Jet2 apply(Func f, const Jet2& a) {
  switch (f) {
    case Func::Exp:
      return exp(a);
    case Func::Log:
      return log(a);
    case Func::Sin:
      return sin(a);
    case Func::Cos:
      return cos(a);
    case Func::Sinh:
      return sinh(a);
    case Func::Cosh:
      return cosh(a);
    case Func::Tanh:
      return tanh(a);
    case Func::Sqrt:
      return sqrt(a);
    case Func::Abs:
      return abs(a);
  }
  throw DomainError("unknown function");
}

namespace {

Jet2 jet_node(const ExprNode& node, std::span<const double> p, int n) {
  using K = ExprNode::Kind;
  switch (node.kind) {
    case K::Constant:
      return Jet2::constant(node.value, n);
    case K::Variable:
      return Jet2::variable(node.var, p[static_cast<std::size_t>(node.var)], n);
    case K::Negate:
      return -jet_node(*node.lhs, p, n);
    case K::Call:
      return apply(node.fn, jet_node(*node.lhs, p, n));
    case K::Binary: {
      Jet2 a = jet_node(*node.lhs, p, n);
      Jet2 b = jet_node(*node.rhs, p, n);
      switch (node.op) {
        case BinOp::Add:
          return a += b;
        case BinOp::Sub:
          return a -= b;
        case BinOp::Mul:
          return a * b;
        case BinOp::Div:
          return a / b;
        case BinOp::Pow:
          return pow(a, b);
      }
    }
  }
  throw DomainError("malformed expression node");
}

}  // namespace

Jet2 eval_jet2(const ScalarExpr& expr, std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(expr.dim())) {
    throw DimensionMismatch("point dimension does not match expression");
  }
  return jet_node(expr.root(), p, expr.dim());
}

double finite_diff_check(const ScalarExpr& expr, std::span<const double> p, double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  const int n = expr.dim();
  const Jet2 jet = eval_jet2(expr, p);
  std::vector<double> x(p.begin(), p.end());

  auto f_at = [&](int i, double di, int j, double dj) {
    x[static_cast<std::size_t>(i)] += di;
    x[static_cast<std::size_t>(j)] += dj;
    const double v = expr.eval(x);
    x[static_cast<std::size_t>(i)] -= di;
    x[static_cast<std::size_t>(j)] -= dj;
    return v;
  };
  auto discrepancy = [](double exact, double approx) { return std::abs(exact - approx) / (1.0 + std::abs(exact)); };

  const double f0 = expr.eval(p);
  auto grad_fd = [&](int i, double h) { return (f_at(i, h, i, 0.0) - f_at(i, -h, i, 0.0)) / (2.0 * h); };
  auto hess_fd = [&](int i, int j, double h) {
    if (i == j) return (f_at(i, h, i, 0.0) - 2.0 * f0 + f_at(i, -h, i, 0.0)) / (h * h);
    return (f_at(i, h, j, h) - f_at(i, h, j, -h) - f_at(i, -h, j, h) + f_at(i, -h, j, -h)) / (4.0 * h * h);
  };
  // Richardson: (4 D(h/2) - D(h)) / 3 cancels the h^2 term
  auto extrapolate = [&](auto&& d) { return (4.0 * d(step / 2.0) - d(step)) / 3.0; };

  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, discrepancy(jet.grad(i), extrapolate([&](double h) { return grad_fd(i, h); })));
    for (int j = i; j < n; ++j) {
      worst = std::max(worst, discrepancy(jet.hess(i, j), extrapolate([&](double h) { return hess_fd(i, j, h); })));
    }
  }
  return worst;
}

}  // namespace confcurv
