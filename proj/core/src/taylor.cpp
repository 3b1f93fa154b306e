#include "confcurv/taylor.hpp"

#include <cmath>

#include "confcurv/errors.hpp"

namespace confcurv {

namespace {

// Normalized coefficients c[m] = f^(m)(x0) / m!.
using Series = std::vector<double>;

Series mul(const Series& a, const Series& b) {
  Series c(a.size(), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n)
    for (std::size_t k = 0; k <= n; ++k) c[n] += a[k] * b[n - k];
  return c;
}

Series div(const Series& a, const Series& b) {
  if (b[0] == 0.0) throw DomainError("division by zero");
  Series c(a.size(), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n) {
    double s = a[n];
    for (std::size_t k = 0; k < n; ++k) s -= c[k] * b[n - k];
    c[n] = s / b[0];
  }
  return c;
}

Series exp_series(const Series& a) {
  Series e(a.size(), 0.0);
  e[0] = std::exp(a[0]);
  for (std::size_t n = 1; n < a.size(); ++n) {
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) s += static_cast<double>(k) * a[k] * e[n - k];
    e[n] = s / static_cast<double>(n);
  }
  return e;
}

Series log_series(const Series& a) {
  if (a[0] < 0.0) throw DomainError("log of a negative number");
  Series l(a.size(), 0.0);
  l[0] = std::log(a[0]);
  for (std::size_t n = 1; n < a.size(); ++n) {
    double s = 0.0;
    for (std::size_t k = 1; k < n; ++k) s += static_cast<double>(k) * l[k] * a[n - k];
    l[n] = (a[n] - s / static_cast<double>(n)) / a[0];
  }
  return l;
}

// Joint recurrence for (sin, cos) when sign = -1 and (sinh, cosh) when +1.
std::pair<Series, Series> trig_pair(const Series& a, double sign, bool hyperbolic) {
  Series s(a.size(), 0.0);
  Series c(a.size(), 0.0);
  s[0] = hyperbolic ? std::sinh(a[0]) : std::sin(a[0]);
  c[0] = hyperbolic ? std::cosh(a[0]) : std::cos(a[0]);
  for (std::size_t n = 1; n < a.size(); ++n) {
    double ds = 0.0;
    double dc = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      ds += static_cast<double>(k) * a[k] * c[n - k];
      dc += static_cast<double>(k) * a[k] * s[n - k];
    }
    s[n] = ds / static_cast<double>(n);
    c[n] = sign * dc / static_cast<double>(n);
  }
  return {s, c};
}

Series sqrt_series(const Series& a) {
  if (a[0] < 0.0) throw DomainError("sqrt of a negative number");
  Series r(a.size(), 0.0);
  r[0] = std::sqrt(a[0]);
  for (std::size_t n = 1; n < a.size(); ++n) {
    double s = a[n];
    for (std::size_t k = 1; k < n; ++k) s -= r[k] * r[n - k];
    r[n] = s / (2.0 * r[0]);
  }
  return r;
}

Series integer_power(Series base, long long e) {
  const bool negative = e < 0;
  unsigned long long m = static_cast<unsigned long long>(negative ? -e : e);
  Series result(base.size(), 0.0);
  result[0] = 1.0;
  while (m > 0) {
    if (m & 1ULL) result = mul(result, base);
    base = mul(base, base);
    m >>= 1ULL;
  }
  if (negative) {
    Series one(result.size(), 0.0);
    one[0] = 1.0;
    return div(one, result);
  }
  return result;
}

Series pow_series(const Series& a, const Series& b) {
  bool constant_exponent = true;
  for (std::size_t k = 1; k < b.size(); ++k) constant_exponent = constant_exponent && b[k] == 0.0;
  if (constant_exponent) {
    const double c = b[0];
    if (std::floor(c) == c && std::abs(c) <= 1024.0) return integer_power(a, static_cast<long long>(c));
    if (a[0] < 0.0) throw DomainError("non-integer power of a negative base");
    if (a[0] == 0.0) throw DomainError("non-integer power at zero is not differentiable");
    // p' a = c a' p
    Series p(a.size(), 0.0);
    p[0] = std::pow(a[0], c);
    for (std::size_t n = 1; n < a.size(); ++n) {
      double s = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        s += (c * static_cast<double>(k) - static_cast<double>(n - k)) * a[k] * p[n - k];
      }
      p[n] = s / (static_cast<double>(n) * a[0]);
    }
    return p;
  }
  if (a[0] <= 0.0) throw DomainError("variable exponent requires a positive base");
  return exp_series(mul(b, log_series(a)));
}

Series eval_series(const ExprNode& node, std::span<const double> p, int axis, std::size_t len) {
  using K = ExprNode::Kind;
  switch (node.kind) {
    case K::Constant: {
      Series s(len, 0.0);
      s[0] = node.value;
      return s;
    }
    case K::Variable: {
      Series s(len, 0.0);
      s[0] = p[static_cast<std::size_t>(node.var)];
      if (node.var == axis && len > 1) s[1] = 1.0;
      return s;
    }
    case K::Negate: {
      Series s = eval_series(*node.lhs, p, axis, len);
      for (double& v : s) v = -v;
      return s;
    }
    case K::Binary: {
      Series a = eval_series(*node.lhs, p, axis, len);
      Series b = eval_series(*node.rhs, p, axis, len);
      switch (node.op) {
        case BinOp::Add:
          for (std::size_t k = 0; k < len; ++k) a[k] += b[k];
          return a;
        case BinOp::Sub:
          for (std::size_t k = 0; k < len; ++k) a[k] -= b[k];
          return a;
        case BinOp::Mul:
          return mul(a, b);
        case BinOp::Div:
          return div(a, b);
        case BinOp::Pow:
          return pow_series(a, b);
      }
      break;
    }
    case K::Call: {
      Series a = eval_series(*node.lhs, p, axis, len);
      switch (node.fn) {
        case Func::Exp:
          return exp_series(a);
        case Func::Log:
          return log_series(a);
        case Func::Sin:
          return trig_pair(a, -1.0, false).first;
        case Func::Cos:
          return trig_pair(a, -1.0, false).second;
        case Func::Sinh:
          return trig_pair(a, 1.0, true).first;
        case Func::Cosh:
          return trig_pair(a, 1.0, true).second;
        case Func::Tanh: {
          auto [s, c] = trig_pair(a, 1.0, true);
          return div(s, c);
        }
        case Func::Sqrt:
          return sqrt_series(a);
        case Func::Abs: {
          if (a[0] < 0.0) {
            for (double& v : a) v = -v;
          }
          return a;
        }
      }
      break;
    }
  }
  throw DomainError("malformed expression node");
}

}  // namespace

std::vector<double> axis_derivatives(const ScalarExpr& e, std::span<const double> p, int axis, int order) {
  if (p.size() != static_cast<std::size_t>(e.dim())) throw DimensionMismatch("point dimension mismatch");
  if (axis < 0 || axis >= e.dim() || order < 0) throw DimensionMismatch("invalid derivative request");
  Series s = eval_series(e.root(), p, axis, static_cast<std::size_t>(order) + 1);
  double factorial = 1.0;
  for (std::size_t m = 1; m < s.size(); ++m) {
    factorial *= static_cast<double>(m);
    s[m] *= factorial;
  }
  return s;
}

}  // namespace confcurv
