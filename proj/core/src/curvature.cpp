#include "confcurv/curvature.hpp"

#include <cmath>
#include <string>

#include "confcurv/errors.hpp"
#include "linalg.hpp"

namespace confcurv {

namespace {

void require_nonsingular(const Jet2& u) {
  if (u.value() == 0.0 || !std::isfinite(u.value())) {
    throw SingularMetric("conformal factor vanishes (u = " + std::to_string(u.value()) + ")");
  }
}

}  // namespace

ConformalMetric::ConformalMetric(Field background, Field phi_rel)
    : n_(background.dim()), background_(std::move(background)), phi_rel_(std::move(phi_rel)) {
  if (phi_rel_.dim() != n_) throw DimensionMismatch("background and relative factor differ in dimension");
  if (n_ < 3) throw DimensionMismatch("conformal metrics need n >= 3");
}

ConformalMetric ConformalMetric::euclidean(Field u) {
  const int n = u.dim();
  return ConformalMetric(Field::constant(1.0, n), std::move(u));
}

Jet2 ConformalMetric::total_factor(std::span<const double> p) const {
  if (p.size() != static_cast<std::size_t>(n_)) throw DimensionMismatch("point dimension mismatch");
  Jet2 u = phi_rel_.jet(p) * background_.jet(p);
  require_nonsingular(u);
  return u;
}

SymBilinear ConformalMetric::metric(std::span<const double> p) const { return metric_from_factor(total_factor(p)); }

SymBilinear metric_from_factor(const Jet2& u) {
  require_nonsingular(u);
  const double w = 1.0 / (u.value() * u.value());
  SymBilinear g(u.dim());
  for (int i = 0; i < u.dim(); ++i) g.set(i, i, w);
  return g;
}

SymBilinear ricci_from_factor(const Jet2& u) {
  require_nonsingular(u);
  const int n = u.dim();
  const double v = u.value();
  const double iso = v * u.laplacian() - (n - 1) * u.grad_norm2();
  SymBilinear ric(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double e = (n - 2) * v * u.hess(i, j);
      if (i == j) e += iso;
      ric.set(i, j, e / (v * v));
    }
  }
  return ric;
}

double scalar_from_factor(const Jet2& u) {
  require_nonsingular(u);
  const int n = u.dim();
  return (n - 1) * (2.0 * u.value() * u.laplacian() - n * u.grad_norm2());
}

SymBilinear schouten_from_factor(const Jet2& u) {
  require_nonsingular(u);
  const int n = u.dim();
  const double v = u.value();
  const double iso = u.grad_norm2() / (2.0 * v * v);
  SymBilinear a(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double e = u.hess(i, j) / v;
      if (i == j) e -= iso;
      a.set(i, j, e);
    }
  }
  return a;
}

SymBilinear schouten_definitional_from_factor(const Jet2& u) {
  const int n = u.dim();
  SymBilinear g = metric_from_factor(u);
  const double k = scalar_from_factor(u);
  SymBilinear a = ricci_from_factor(u) - (k / (2.0 * (n - 1))) * g;
  a *= 1.0 / (n - 2);
  return a;
}

CurvTensor riemann_decomp_from_factor(const Jet2& u) {
  return kulkarni_nomizu(schouten_from_factor(u), metric_from_factor(u));
}

CurvTensor riemann_oracle_from_factor(const Jet2& u) {
  require_nonsingular(u);
  const int n = u.dim();
  // gbar_ij = delta_ij * u^-2, differentiated by jet arithmetic.
  const Jet2 w = pow(u, -2.0);
  std::vector<Jet2> g(static_cast<std::size_t>(n * n), Jet2::constant(0.0, n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i * n + i)] = w;
  return riemann_from_metric_jets(g);
}

CurvTensor riemann_from_metric_jets(std::span<const Jet2> metric) {
  const auto nn = metric.size();
  int n = 0;
  while (static_cast<std::size_t>(n * n) < nn) ++n;
  if (static_cast<std::size_t>(n * n) != nn || n < 2) throw DimensionMismatch("metric jets must form a square matrix");

  auto ix2 = [n](int a, int b) { return static_cast<std::size_t>(a * n + b); };
  auto ix3 = [n](int a, int b, int c) { return static_cast<std::size_t>((a * n + b) * n + c); };
  auto ix4 = [n](int a, int b, int c, int d) { return static_cast<std::size_t>(((a * n + b) * n + c) * n + d); };

  auto g = [&](int a, int b) { return metric[ix2(a, b)].value(); };
  auto dg = [&](int c, int a, int b) { return metric[ix2(a, b)].grad(c); };            // ∂_c g_ab
  auto ddg = [&](int c, int d, int a, int b) { return metric[ix2(a, b)].hess(c, d); };  // ∂_c∂_d g_ab

  std::vector<double> gv(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gv[ix2(a, b)] = g(a, b);
  const std::vector<double> ginv = detail::invert(gv, n);

  // ∂_e g^{mc} = -g^{mp} ∂_e g_pq g^{qc}
  std::vector<double> dginv(static_cast<std::size_t>(n * n * n), 0.0);  // [e][m][c]
  for (int e = 0; e < n; ++e)
    for (int m = 0; m < n; ++m)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) s += ginv[ix2(m, p)] * dg(e, p, q) * ginv[ix2(q, c)];
        dginv[ix3(e, m, c)] = -s;
      }

  // Christoffel symbols of the first kind and their derivatives:
  // first[a][b][c] = ½(∂_a g_bc + ∂_b g_ac - ∂_c g_ab)
  std::vector<double> first(static_cast<std::size_t>(n * n * n));
  std::vector<double> dfirst(static_cast<std::size_t>(n * n * n * n));  // [e][a][b][c]
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        first[ix3(a, b, c)] = 0.5 * (dg(a, b, c) + dg(b, a, c) - dg(c, a, b));
        for (int e = 0; e < n; ++e) {
          dfirst[ix4(e, a, b, c)] = 0.5 * (ddg(e, a, b, c) + ddg(e, b, a, c) - ddg(e, c, a, b));
        }
      }

  // gamma[m][a][b] = g^{mc} first[a][b][c];  dgamma[e][m][a][b] = ∂_e of it.
  std::vector<double> gamma(static_cast<std::size_t>(n * n * n), 0.0);
  std::vector<double> dgamma(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int m = 0; m < n; ++m)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += ginv[ix2(m, c)] * first[ix3(a, b, c)];
        gamma[ix3(m, a, b)] = s;
        for (int e = 0; e < n; ++e) {
          double d = 0.0;
          for (int c = 0; c < n; ++c) {
            d += dginv[ix3(e, m, c)] * first[ix3(a, b, c)] + ginv[ix2(m, c)] * dfirst[ix4(e, a, b, c)];
          }
          dgamma[ix4(e, m, a, b)] = d;
        }
      }

  // R(∂i,∂j)∂l = Rop[m][l][i][j] ∂m with
  // Rop = ∂_i Γ^m_jl - ∂_j Γ^m_il + Γ^m_ip Γ^p_jl - Γ^m_jp Γ^p_il.
  std::vector<double> rop(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = dgamma[ix4(i, m, j, l)] - dgamma[ix4(j, m, i, l)];
          for (int p = 0; p < n; ++p) {
            s += gamma[ix3(m, i, p)] * gamma[ix3(p, j, l)] - gamma[ix3(m, j, p)] * gamma[ix3(p, i, l)];
          }
          rop[ix4(m, l, i, j)] = s;
        }

  CurvTensor r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) s += g(k, m) * rop[ix4(m, l, i, j)];
          r.at(i, j, k, l) = s;
        }
  return r;
}

SymBilinear ricci(const ConformalMetric& m, std::span<const double> p) { return ricci_from_factor(m.total_factor(p)); }

double scalar_curv(const ConformalMetric& m, std::span<const double> p) {
  return scalar_from_factor(m.total_factor(p));
}

SymBilinear schouten(const ConformalMetric& m, std::span<const double> p) {
  return schouten_from_factor(m.total_factor(p));
}

SymBilinear schouten_definitional(const ConformalMetric& m, std::span<const double> p) {
  return schouten_definitional_from_factor(m.total_factor(p));
}

CurvTensor riemann_decomp(const ConformalMetric& m, std::span<const double> p) {
  return riemann_decomp_from_factor(m.total_factor(p));
}

CurvTensor riemann_oracle(const ConformalMetric& m, std::span<const double> p) {
  return riemann_oracle_from_factor(m.total_factor(p));
}

double sectional_from(const CurvTensor& r, const SymBilinear& g, int i, int j) {
  if (i == j) throw DimensionMismatch("sectional curvature needs two distinct directions");
  const double gram = g(i, i) * g(j, j) - g(i, j) * g(i, j);
  return r(i, j, i, j) / gram;
}

double sectional(const ConformalMetric& m, std::span<const double> p, int i, int j) {
  const Jet2 u = m.total_factor(p);
  return sectional_from(riemann_oracle_from_factor(u), metric_from_factor(u), i, j);
}

double weyl_residual(const ConformalMetric& m, std::span<const double> p) {
  const Jet2 u = m.total_factor(p);
  return tensor_max_norm(tensor_difference(riemann_oracle_from_factor(u), riemann_decomp_from_factor(u)));
}

SymBilinear ricci_contraction(const CurvTensor& r, const SymBilinear& g) {
  const int n = r.dim();
  std::vector<double> gv(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gv[static_cast<std::size_t>(a * n + b)] = g(a, b);
  const std::vector<double> ginv = detail::invert(gv, n);
  SymBilinear ric(n);
  for (int j = 0; j < n; ++j)
    for (int l = j; l < n; ++l) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) s += ginv[static_cast<std::size_t>(i * n + k)] * r(i, j, k, l);
      ric.set(j, l, s);
    }
  return ric;
}

}  // namespace confcurv
