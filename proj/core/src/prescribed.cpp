#include "confcurv/prescribed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "confcurv/errors.hpp"
#include "confcurv/parallel.hpp"
#include "confcurv/quadrature.hpp"
#include "confcurv/taylor.hpp"
#include "linalg.hpp"

namespace confcurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double magnitude_of(double v) { return std::isnan(v) ? kInf : std::abs(v); }

/// Point with x_k = t and every other coordinate 0.
std::vector<double> axis_point(int n, int k, double t) {
  std::vector<double> p(idx(n), 0.0);
  p[idx(k)] = t;
  return p;
}

std::string family_name(int f) { return "family" + std::to_string(f); }

/// Max/mean/argmax over per-grid-point values (NaN counts as infinite).
ResidualStat summarize(std::string name, const std::vector<double>& values, const Grid& grid) {
  ResidualStat s;
  s.family = std::move(name);
  s.samples = values.size();
  std::size_t arg = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = magnitude_of(values[i]);
    sum += v;
    if (v > s.max) {
      s.max = v;
      arg = i;
    }
  }
  s.mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
  if (!values.empty()) s.argmax = grid.point(arg);
  return s;
}

Band worst(Band a, Band b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

/// Smallest admissible i != j for G_j, or -1.
int source_index(std::span<const double> fv, int j) {
  const int n = static_cast<int>(fv.size());
  for (int i = 0; i < n; ++i) {
    if (i != j && pair_admissible(fv[idx(i)], fv[idx(j)])) return i;
  }
  return -1;
}

void require_gradient_defined(std::span<const double> fv, std::span<const double> p) {
  for (int j = 0; j < static_cast<int>(fv.size()); ++j) {
    if (source_index(fv, j) < 0) {
      throw Degenerate("3 f_i + f_j vanishes for every i != " + std::to_string(j + 1),
                       std::vector<double>(p.begin(), p.end()));
    }
  }
}

/// G_j = -H_{i(j) j} at x, evaluating only the jet it needs.
double gradient_component(const DiagonalTensorField& t, std::span<const double> x, int j) {
  const std::vector<double> fv = t.values(x);
  const int i = source_index(fv, j);
  if (i < 0) {
    throw Degenerate("3 f_i + f_j vanishes for every i != " + std::to_string(j + 1),
                     std::vector<double>(x.begin(), x.end()));
  }
  const Jet2 fi = t.component(i).jet(x);
  return -fi.grad(j) / (3.0 * fv[idx(i)] + fv[idx(j)]);
}

void check_point_dim(std::span<const double> p, int n, const char* what) {
  if (p.size() != idx(n)) throw DimensionMismatch(std::string(what) + " has the wrong dimension");
}

}  // namespace

Band classify_residual(double residual, const Tolerances& tol) {
  const double r = magnitude_of(residual);
  if (r <= tol.accept) return Band::Accept;
  if (r >= tol.reject) return Band::Reject;
  return Band::Indeterminate;
}

// --- DiagonalTensorField ---------------------------------------------------

DiagonalTensorField::DiagonalTensorField(std::vector<Field> components) : f_(std::move(components)) {
  const int n = dim();
  if (n < 3) throw DimensionMismatch("diagonal tensors need n >= 3 components");
  for (const Field& f : f_) {
    if (f.dim() != n) throw DimensionMismatch("tensor component dimension differs from the number of components");
  }
}

DiagonalTensorField DiagonalTensorField::single_variable(const Field& f, const Field& f_k, int k) {
  const int n = f.dim();
  if (f_k.dim() != n) throw DimensionMismatch("f and f_k differ in dimension");
  if (k < 0 || k >= n) throw DimensionMismatch("distinguished axis out of range");
  for (int j = 0; j < n; ++j) {
    if (j != k && (f.depends_on(j) || f_k.depends_on(j))) {
      throw DomainError("single-variable tensor components may depend on x" + std::to_string(k + 1) + " only");
    }
  }
  std::vector<Field> comps(idx(n), f);
  comps[idx(k)] = f_k;
  DiagonalTensorField t(std::move(comps));
  t.structure_ = Structure::SingleVariable;
  t.axis_ = k;
  return t;
}

DiagonalTensorField DiagonalTensorField::isotropic(const Field& f) {
  DiagonalTensorField t(std::vector<Field>(idx(f.dim()), f));
  t.structure_ = Structure::Isotropic;
  return t;
}

std::vector<Jet2> DiagonalTensorField::jets(std::span<const double> p) const {
  check_point_dim(p, dim(), "evaluation point");
  std::vector<Jet2> out;
  out.reserve(f_.size());
  for (const Field& f : f_) out.push_back(f.jet(p));
  return out;
}

std::vector<double> DiagonalTensorField::values(std::span<const double> p) const {
  check_point_dim(p, dim(), "evaluation point");
  std::vector<double> out;
  out.reserve(f_.size());
  for (const Field& f : f_) out.push_back(f.value(p));
  return out;
}

DiagonalTensorField DiagonalTensorField::scaled(double s) const {
  DiagonalTensorField t = *this;
  for (Field& f : t.f_) f = confcurv::scaled(f, s);
  return t;
}

DiagonalTensorField DiagonalTensorField::divided_by_square(const Field& background) const {
  const Field sq = product(background, background);
  DiagonalTensorField t = *this;
  for (Field& f : t.f_) f = quotient(f, sq);
  if (structure_ == Structure::SingleVariable) {
    for (int j = 0; j < dim(); ++j) {
      if (j != axis_ && background.depends_on(j)) {
        t.structure_ = Structure::General;
        t.axis_ = -1;
      }
    }
  }
  return t;
}

// --- ratios and the gradient field ---------------------------------------

bool pair_admissible(double f_i, double f_j) {
  const double d = 3.0 * f_i + f_j;
  return std::isfinite(d) && d != 0.0 && std::abs(d) > 1e-12 * (3.0 * std::abs(f_i) + std::abs(f_j));
}

RatioField ratio_field(std::span<const Jet2> f) {
  const int n = static_cast<int>(f.size());
  RatioField r;
  r.n = n;
  r.admissible.assign(idx(n * n), false);
  r.value.assign(idx(n * n), 0.0);
  r.gradient.assign(idx(n * n * n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Jet2& fi = f[idx(i)];
      const Jet2& fj = f[idx(j)];
      if (!pair_admissible(fi.value(), fj.value())) continue;
      const double d = 3.0 * fi.value() + fj.value();
      const double num = fi.grad(j);
      r.admissible[idx(i * n + j)] = true;
      r.value[idx(i * n + j)] = num / d;
      for (int k = 0; k < n; ++k) {
        const double dd = 3.0 * fi.grad(k) + fj.grad(k);
        r.gradient[idx((i * n + j) * n + k)] = (fi.hess(j, k) * d - num * dd) / (d * d);
      }
    }
  }
  return r;
}

GradientField gradient_field(std::span<const Jet2> f, std::span<const double> p) {
  const int n = static_cast<int>(f.size());
  std::vector<double> fv(idx(n));
  for (int i = 0; i < n; ++i) fv[idx(i)] = f[idx(i)].value();
  require_gradient_defined(fv, p);
  const RatioField r = ratio_field(f);

  GradientField g;
  g.g.assign(idx(n), 0.0);
  g.dg.assign(idx(n * n), 0.0);
  g.source.assign(idx(n), -1);
  for (int j = 0; j < n; ++j) {
    const int i = source_index(fv, j);
    g.source[idx(j)] = i;
    g.g[idx(j)] = -r.h(i, j);
    for (int k = 0; k < n; ++k) g.dg[idx(j * n + k)] = -r.dh(i, j, k);
    double lo = kInf;
    double hi = -kInf;
    for (int m = 0; m < n; ++m) {
      if (m == j || !r.ok(m, j)) continue;
      lo = std::min(lo, r.h(m, j));
      hi = std::max(hi, r.h(m, j));
    }
    g.consistency = std::max(g.consistency, hi - lo);
  }
  return g;
}

GradientField gradient_field(const DiagonalTensorField& t, std::span<const double> p) {
  const std::vector<Jet2> f = t.jets(p);
  return gradient_field(f, p);
}

// --- PDE system ------------------------------------------------------------

double PdeResidual::max_abs_diagonal() const {
  double m = 0.0;
  for (double v : diagonal) m = std::max(m, magnitude_of(v));
  return m;
}

double PdeResidual::max_abs_cross() const {
  double m = 0.0;
  for (double v : cross) m = std::max(m, magnitude_of(v));
  return m;
}

double PdeResidual::max_abs() const { return std::max(max_abs_diagonal(), max_abs_cross()); }

PdeResidual system_residual(const Jet2& u, std::span<const double> f) {
  const int n = u.dim();
  if (f.size() != idx(n)) throw DimensionMismatch("tensor and factor differ in dimension");
  const double v = u.value();
  if (v == 0.0 || !std::isfinite(v)) throw SingularMetric("conformal factor vanishes (u = " + std::to_string(v) + ")");
  const double iso = u.grad_norm2() / (2.0 * v * v);
  PdeResidual r;
  r.diagonal.resize(idx(n));
  for (int i = 0; i < n; ++i) r.diagonal[idx(i)] = u.hess(i, i) / v - iso - v * v * f[idx(i)];
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) r.cross.push_back(u.hess(i, j));
  }
  return r;
}

PdeResidual system_residual(const Field& u, const DiagonalTensorField& t, std::span<const double> p) {
  if (u.dim() != t.dim()) throw DimensionMismatch("tensor and factor differ in dimension");
  return system_residual(u.jet(p), t.values(p));
}

// --- compatibility families ------------------------------------------------

double CompatibilityResidual::max() const {
  double m = std::max({family1, family2, family3, family5});
  if (family4) m = std::max(m, *family4);
  return m;
}

CompatibilityResidual compatibility_residuals(std::span<const Jet2> f, const Jet2* u) {
  const int n = static_cast<int>(f.size());
  const RatioField r = ratio_field(f);
  CompatibilityResidual c;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !r.ok(i, j)) ++c.skipped_pairs;
    }
  }

  for (int j = 0; j < n; ++j) {
    double lo = kInf;
    double hi = -kInf;
    for (int i = 0; i < n; ++i) {
      if (i == j || !r.ok(i, j)) continue;
      lo = std::min(lo, r.h(i, j));
      hi = std::max(hi, r.h(i, j));
    }
    if (hi >= lo) c.family1 = std::max(c.family1, magnitude_of(hi - lo));
  }

  // closedness of G between two coordinates, both taken from the same source j
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) {
        if (i == j || k == j || !r.ok(j, i) || !r.ok(j, k)) continue;
        c.family2 = std::max(c.family2, magnitude_of(r.dh(j, i, k) - r.dh(j, k, i)));
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!r.ok(i, j) || !r.ok(j, i)) continue;
      c.family3 = std::max(c.family3, magnitude_of(r.dh(i, j, i) - r.dh(j, i, j)));
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !r.ok(i, j) || !r.ok(j, i)) continue;
      c.family5 = std::max(c.family5, magnitude_of(r.h(j, i) * r.h(i, j) - r.dh(i, j, i)));
    }
  }

  if (u != nullptr) {
    std::vector<double> fv(idx(n));
    for (int i = 0; i < n; ++i) fv[idx(i)] = f[idx(i)].value();
    c.family4 = system_residual(*u, fv).max_abs_diagonal();
  }
  return c;
}

CompatibilityResidual compatibility_residuals(const DiagonalTensorField& t, std::span<const double> p) {
  const std::vector<Jet2> f = t.jets(p);
  return compatibility_residuals(f);
}

// --- reconstruction --------------------------------------------------------

double reconstruct_log_ratio(const DiagonalTensorField& t, std::span<const double> base,
                             std::span<const double> query, double quad_tol, SweepOrder order) {
  const int n = t.dim();
  check_point_dim(base, n, "base point");
  check_point_dim(query, n, "query point");
  std::vector<double> cur(base.begin(), base.end());
  double total = 0.0;
  for (int step = 0; step < n; ++step) {
    const int axis = order == SweepOrder::Forward ? step : n - 1 - step;
    const double a = cur[idx(axis)];
    const double b = query[idx(axis)];
    if (a != b) {
      std::vector<double> x = cur;
      const auto integrand = [&](double s) {
        x[idx(axis)] = s;
        return gradient_component(t, x, axis);
      };
      total += adaptive_simpson(integrand, a, b, quad_tol).value;
    }
    cur[idx(axis)] = b;
  }
  return total;
}

double reconstruct_phi(const DiagonalTensorField& t, std::span<const double> base, std::span<const double> query,
                       double quad_tol, SweepOrder order) {
  return std::exp(reconstruct_log_ratio(t, base, query, quad_tol, order));
}

std::variant<double, NonExistence> determine_scale(const DiagonalTensorField& t, std::span<const double> base,
                                                   double tol) {
  const int n = t.dim();
  check_point_dim(base, n, "base point");
  const std::vector<double> fv = t.values(base);
  int pick = 0;
  for (int i = 1; i < n; ++i) {
    if (std::abs(fv[idx(i)]) > std::abs(fv[idx(pick)])) pick = i;
  }
  const std::vector<double> where(base.begin(), base.end());
  if (fv[idx(pick)] == 0.0) throw Degenerate("every f_i vanishes at the base point", where);

  const GradientField g = gradient_field(t, base);
  double g2 = 0.0;
  for (double v : g.g) g2 += v * v;
  std::vector<double> num(idx(n));
  for (int i = 0; i < n; ++i) num[idx(i)] = g.g[idx(i)] * g.g[idx(i)] + g.d(i, i) - 0.5 * g2;

  const double c2 = num[idx(pick)] / fv[idx(pick)];
  if (!(c2 > 0.0) || !std::isfinite(c2)) {
    return NonExistence{"scale_sign",
                        "diagonal equation " + std::to_string(pick + 1) + " forces C^2 = " + std::to_string(c2),
                        where, std::isfinite(c2) ? std::abs(c2) + std::abs(num[idx(pick)]) : kInf};
  }
  for (int i = 0; i < n; ++i) {
    const double dev = std::abs(num[idx(i)] - c2 * fv[idx(i)]);
    if (dev > tol * (1.0 + std::abs(num[idx(i)]))) {
      throw ScaleInconsistent("diagonal equation " + std::to_string(i + 1) + " disagrees with equation " +
                              std::to_string(pick + 1) + " on the scale by " + std::to_string(dev));
    }
  }
  return std::sqrt(c2);
}

// --- Solution --------------------------------------------------------------

Solution::Solution(DiagonalTensorField t, std::vector<double> base, double scale, double quad_tol)
    : t_(std::move(t)), base_(std::move(base)), scale_(scale), quad_tol_(quad_tol) {
  check_point_dim(base_, t_.dim(), "base point");
  if (!(scale_ > 0.0)) throw DomainError("solution scale must be positive");
}

double Solution::phi_at(std::span<const double> q, SweepOrder order) const {
  return scale_ * reconstruct_phi(t_, base_, q, quad_tol_, order);
}

std::vector<double> Solution::log_phi_grad(std::span<const double> q) const { return gradient_field(t_, q).g; }

Jet2 Solution::jet_at(std::span<const double> q) const {
  const int n = t_.dim();
  const double u = phi_at(q);
  const GradientField g = gradient_field(t_, q);
  std::vector<double> grad(idx(n));
  std::vector<double> hess(idx(n * n));
  for (int i = 0; i < n; ++i) {
    grad[idx(i)] = u * g.g[idx(i)];
    for (int j = 0; j < n; ++j) hess[idx(i * n + j)] = u * (g.g[idx(i)] * g.g[idx(j)] + g.d(j, i));
  }
  return Jet2::from_parts(u, grad, hess);
}

Field Solution::as_field() const {
  auto self = std::make_shared<const Solution>(*this);
  std::vector<bool> deps(idx(t_.dim()), false);
  for (const Field& f : t_.components()) {
    for (int i = 0; i < t_.dim(); ++i) deps[idx(i)] = deps[idx(i)] || f.depends_on(i);
  }
  return Field(
      t_.dim(), [self](std::span<const double> p) { return self->jet_at(p); }, std::move(deps),
      "reconstructed factor, C = " + std::to_string(scale_));
}

// --- solve -----------------------------------------------------------------

bool separable_nonexistence(const DiagonalTensorField& t, const Grid& grid) {
  const int n = t.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i && t.component(i).depends_on(j)) return false;
    }
  }
  std::vector<char> cross_free(grid.size(), 1);
  std::vector<char> nonzero(grid.size(), 0);
  parallel_for(grid.size(), [&](std::size_t s) {
    const std::vector<double> p = grid.point(s);
    for (int i = 0; i < n; ++i) {
      const Jet2 f = t.component(i).jet(p);
      if (f.value() != 0.0) nonzero[s] = 1;
      for (int j = 0; j < n; ++j) {
        if (j != i && f.grad(j) != 0.0) cross_free[s] = 0;
      }
    }
  });
  const bool separable = std::all_of(cross_free.begin(), cross_free.end(), [](char c) { return c != 0; });
  const bool not_zero = std::any_of(nonzero.begin(), nonzero.end(), [](char c) { return c != 0; });
  return separable && not_zero;
}

SolveReport solve(const PrescribedProblem& problem) {
  const DiagonalTensorField& t = problem.tensor;
  const Grid& grid = problem.grid;
  const Tolerances& tol = problem.tol;
  const int n = t.dim();
  check_point_dim(problem.base_point, n, "base point");
  if (grid.dim() != n) throw DimensionMismatch("grid and tensor differ in dimension");

  const std::size_t count = grid.size();
  SolveReport report{NonExistence{}, {}, {}};

  if (separable_nonexistence(t, grid)) {
    std::vector<double> size(count, 0.0);
    parallel_for(count, [&](std::size_t s) {
      for (double v : t.values(grid.point(s))) size[s] = std::max(size[s], std::abs(v));
    });
    const ResidualStat st = summarize("tensor_size", size, grid);
    report.outcome = NonExistence{"separable_tensor", "every f_i depends on x_i alone and T is not zero", st.argmax,
                                  st.max};
    report.residuals.push_back(st);
    return report;
  }

  std::vector<CompatibilityResidual> compat(count);
  parallel_for(count, [&](std::size_t s) {
    const std::vector<double> p = grid.point(s);
    const std::vector<Jet2> f = t.jets(p);
    std::vector<double> fv(idx(n));
    for (int i = 0; i < n; ++i) fv[idx(i)] = f[idx(i)].value();
    require_gradient_defined(fv, p);
    compat[s] = compatibility_residuals(f);
  });

  int skipped = 0;
  for (const auto& c : compat) skipped += c.skipped_pairs;
  if (skipped > 0) {
    report.notes.push_back(std::to_string(skipped) + " (point, pair) samples skipped where 3 f_i + f_j vanishes");
  }

  std::vector<double> column(count);
  const auto add_family = [&](int fam, auto member) {
    for (std::size_t s = 0; s < count; ++s) column[s] = compat[s].*member;
    report.residuals.push_back(summarize(family_name(fam), column, grid));
  };
  add_family(1, &CompatibilityResidual::family1);
  add_family(2, &CompatibilityResidual::family2);
  add_family(3, &CompatibilityResidual::family3);
  add_family(5, &CompatibilityResidual::family5);

  // witness: the family with the largest rejecting magnitude
  const ResidualStat* rejecting = nullptr;
  const ResidualStat* uncertain = nullptr;
  for (const ResidualStat& st : report.residuals) {
    const Band b = classify_residual(st.max, tol);
    if (b == Band::Reject && (rejecting == nullptr || st.max > rejecting->max)) rejecting = &st;
    if (b == Band::Indeterminate && uncertain == nullptr) uncertain = &st;
  }
  if (rejecting != nullptr) {
    const std::string fam = rejecting->family.substr(6);
    report.outcome = NonExistence{"compatibility_family_" + fam,
                                  "compatibility family " + fam + " fails on the grid", rejecting->argmax,
                                  rejecting->max};
    return report;
  }
  std::optional<Indeterminate> pending;
  if (uncertain != nullptr) pending = Indeterminate{uncertain->family, uncertain->argmax, uncertain->max};

  const auto scale = determine_scale(t, problem.base_point, kInf);
  if (const auto* none = std::get_if<NonExistence>(&scale)) {
    report.outcome = *none;
    return report;
  }
  Solution sol(t, problem.base_point, std::get<double>(scale), tol.quadrature);

  std::vector<PdeResidual> audit(count);
  parallel_for(count, [&](std::size_t s) {
    const std::vector<double> p = grid.point(s);
    audit[s] = system_residual(sol.jet_at(p), t.values(p));
  });
  for (std::size_t s = 0; s < count; ++s) column[s] = audit[s].max_abs_diagonal();
  report.residuals.push_back(summarize(family_name(4), column, grid));
  for (std::size_t s = 0; s < count; ++s) column[s] = audit[s].max_abs_cross();
  report.residuals.push_back(summarize("cross", column, grid));

  const ResidualStat& diag = report.residuals[report.residuals.size() - 2];
  const ResidualStat& cross = report.residuals.back();
  const Band bd = classify_residual(diag.max, tol);
  const Band bc = classify_residual(cross.max, tol);
  if (bd == Band::Reject || bc == Band::Reject) {
    const bool use_diag = bd == Band::Reject && (bc != Band::Reject || diag.max >= cross.max);
    const ResidualStat& st = use_diag ? diag : cross;
    report.outcome = NonExistence{use_diag ? "compatibility_family_4" : "pde_audit",
                                  use_diag ? "diagonal equations fail for the reconstructed factor"
                                           : "mixed second derivatives of the reconstructed factor do not vanish",
                                  st.argmax, st.max};
    return report;
  }
  if (!pending && bd == Band::Indeterminate) pending = Indeterminate{diag.family, diag.argmax, diag.max};
  if (!pending && bc == Band::Indeterminate) pending = Indeterminate{cross.family, cross.argmax, cross.max};
  if (pending) {
    report.outcome = *pending;
    return report;
  }
  report.outcome = std::move(sol);
  return report;
}

// --- quadratic families ----------------------------------------------------

QuadraticFamily QuadraticFamily::make(double a, std::vector<double> b, double c) {
  QuadraticFamily q;
  q.a = a;
  q.b = std::move(b);
  q.c = c;
  double b2 = 0.0;
  for (double v : q.b) b2 += v * v;
  q.lambda = b2 - 4.0 * a * c;
  return q;
}

double QuadraticFamily::u(std::span<const double> x) const {
  if (x.size() != b.size()) throw DimensionMismatch("point dimension does not match the family");
  double s = c;
  for (std::size_t i = 0; i < x.size(); ++i) s += a * x[i] * x[i] + b[i] * x[i];
  return s;
}

QuadraticConstruction construct_quadratic_family(double a, std::span<const double> b, double c) {
  const int n = static_cast<int>(b.size());
  if (n < 3) throw DimensionMismatch("quadratic families need n >= 3");
  const bool all_zero = a == 0.0 && c == 0.0 && std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; });
  if (all_zero) throw DegenerateFamily("a, b and c all vanish: the factor is identically zero");

  const QuadraticFamily family = QuadraticFamily::make(a, std::vector<double>(b.begin(), b.end()), c);

  const auto coef = [n](double k, const ScalarExpr& term) {
    return k == 1.0 ? term : ScalarExpr::constant(k, n) * term;
  };
  const ScalarExpr two = ScalarExpr::constant(2.0, n);
  std::optional<ScalarExpr> u;
  const auto add = [&u](const ScalarExpr& term) { u = u ? *u + term : term; };
  for (int i = 0; i < n; ++i) {
    const ScalarExpr x = ScalarExpr::variable(i, n);
    if (a != 0.0) add(coef(a, pow(x, two)));
    if (b[idx(i)] != 0.0) add(coef(b[idx(i)], x));
  }
  if (c != 0.0 || !u) add(ScalarExpr::constant(c, n));
  const double lead = -0.5 * family.lambda;
  ScalarExpr f = lead == 0.0 ? ScalarExpr::constant(0.0, n)
                             : ScalarExpr::constant(lead, n) / pow(*u, ScalarExpr::constant(4.0, n));
  return QuadraticConstruction{family, *u, std::move(f)};
}

SingularSet classify_singular_set(const QuadraticFamily& fam, double zero_tol) {
  SingularSet s;
  const double lambda = fam.lambda;
  const bool a_zero = std::abs(fam.a) <= zero_tol;
  const auto center = [&fam] {
    std::vector<double> c(fam.b.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = -fam.b[i] / (2.0 * fam.a);
    return c;
  };
  if (lambda < -zero_tol) return s;
  if (std::abs(lambda) <= zero_tol) {
    if (a_zero) return s;
    s.kind = SingularSet::Kind::Point;
    s.center = center();
    return s;
  }
  if (a_zero) {
    s.kind = SingularSet::Kind::Hyperplane;
    s.normal = fam.b;
    s.offset = fam.c;
    return s;
  }
  s.kind = SingularSet::Kind::Sphere;
  s.center = center();
  s.radius = std::sqrt(lambda) / (2.0 * std::abs(fam.a));
  return s;
}

const char* to_string(SingularSet::Kind k) {
  switch (k) {
    case SingularSet::Kind::Empty:
      return "Empty";
    case SingularSet::Kind::Point:
      return "Point";
    case SingularSet::Kind::Hyperplane:
      return "Hyperplane";
    case SingularSet::Kind::Sphere:
      return "Sphere";
  }
  return "Unknown";
}

std::variant<QuadraticFamily, QuadraticMismatch> detect_quadratic_family(const Field& f, const Grid& grid,
                                                                         double tol) {
  const int n = f.dim();
  if (grid.dim() != n) throw DimensionMismatch("grid and density differ in dimension");
  const std::vector<double> x0 = grid.center();
  const double f0 = f.value(x0);
  if (f0 == 0.0 || !std::isfinite(f0)) return QuadraticMismatch{"density vanishes at the grid center", kInf, x0};

  // stencil x0, x0 ± s e_i with s halved until every value is usable
  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  double s = 1.0;
  for (int attempt = 0;; ++attempt) {
    pts.assign(1, x0);
    vals.assign(1, f0);
    bool usable = true;
    for (int i = 0; i < n && usable; ++i) {
      for (double sign : {-1.0, 1.0}) {
        std::vector<double> p = x0;
        p[idx(i)] += sign * s;
        double v = 0.0;
        try {
          v = f.value(p);
        } catch (const DomainError&) {
          usable = false;
          break;
        }
        if (v == 0.0 || !std::isfinite(v)) {
          usable = false;
          break;
        }
        pts.push_back(std::move(p));
        vals.push_back(v);
      }
    }
    if (usable) break;
    if (attempt == 40) return QuadraticMismatch{"no usable detection stencil around the grid center", kInf, x0};
    s *= 0.5;
  }

  // least squares for r = A |x|² + B·x + C' over the stencil
  const int m = n + 2;
  std::vector<double> ata(idx(m * m), 0.0);
  std::vector<double> atb(idx(m), 0.0);
  std::vector<double> row(idx(m));
  for (std::size_t r = 0; r < pts.size(); ++r) {
    const double ratio = f0 / vals[r];
    if (ratio < 0.0) throw NegativeRadicand("density changes sign on the detection stencil");
    const double target = std::pow(ratio, 0.25);
    double sq = 0.0;
    for (int i = 0; i < n; ++i) sq += pts[r][idx(i)] * pts[r][idx(i)];
    row[0] = sq;
    for (int i = 0; i < n; ++i) row[idx(i + 1)] = pts[r][idx(i)];
    row[idx(n + 1)] = 1.0;
    for (int a = 0; a < m; ++a) {
      atb[idx(a)] += row[idx(a)] * target;
      for (int b = 0; b < m; ++b) ata[idx(a * m + b)] += row[idx(a)] * row[idx(b)];
    }
  }
  const std::vector<double> coef = detail::solve_linear(ata, atb, m);
  const QuadraticFamily q =
      QuadraticFamily::make(coef[0], std::vector<double>(coef.begin() + 1, coef.begin() + 1 + n), coef[idx(n + 1)]);
  const double q0 = q.u(x0);
  const double s2 = -q.lambda / (2.0 * f0 * std::pow(q0, 4));
  if (!(s2 > 0.0) || !std::isfinite(s2)) {
    return QuadraticMismatch{"fitted quadratic gives a nonpositive squared scale", kInf, x0};
  }
  double scale = std::sqrt(s2);
  if (q0 < 0.0) scale = -scale;
  std::vector<double> b = q.b;
  for (double& v : b) v *= scale;
  const QuadraticFamily fam = QuadraticFamily::make(q.a * scale, std::move(b), q.c * scale);

  std::vector<double> dev(grid.size(), 0.0);
  std::vector<char> sign_flip(grid.size(), 0);
  parallel_for(grid.size(), [&](std::size_t k) {
    const std::vector<double> p = grid.point(k);
    double v = 0.0;
    try {
      v = f.value(p);
    } catch (const DomainError&) {
      return;
    }
    const double u = fam.u(p);
    if (u == 0.0) return;
    if (v * f0 < 0.0) sign_flip[k] = 1;
    const double fit = -fam.lambda / (2.0 * std::pow(u, 4));
    dev[k] = v == 0.0 ? (fit == 0.0 ? 0.0 : kInf) : std::abs(v - fit) / std::abs(v);
  });
  if (std::any_of(sign_flip.begin(), sign_flip.end(), [](char c) { return c != 0; })) {
    throw NegativeRadicand("density changes sign on the grid");
  }
  const ResidualStat st = summarize("quadratic_fit", dev, grid);
  if (st.max > tol) return QuadraticMismatch{"density deviates from the fitted quadratic family", st.max, st.argmax};
  return fam;
}

// --- single-variable tensors -----------------------------------------------

namespace {

struct AxisSample {
  double h = 0.0;
  double dh = 0.0;
  double f = 0.0;
  double fk = 0.0;
};

AxisSample sample_axis(const Field& f, const Field& fk, int n, int k, double t) {
  const std::vector<double> p = axis_point(n, k, t);
  const Jet2 a = f.jet(p);
  const Jet2 b = fk.jet(p);
  if (!pair_admissible(a.value(), b.value())) throw Degenerate("3 f + f_k vanishes", p);
  const double d = 3.0 * a.value() + b.value();
  const double dd = 3.0 * a.grad(k) + b.grad(k);
  AxisSample s;
  s.f = a.value();
  s.fk = b.value();
  s.h = a.grad(k) / d;
  s.dh = (a.hess(k, k) * d - a.grad(k) * dd) / (d * d);
  return s;
}

int single_axis_of(const DiagonalTensorField& t) {
  if (t.axis() >= 0) return t.axis();
  int k = -1;
  for (const Field& f : t.components()) {
    for (int j = 0; j < t.dim(); ++j) {
      if (!f.depends_on(j)) continue;
      if (k >= 0 && k != j) throw DomainError("tensor depends on more than one coordinate");
      k = j;
    }
  }
  return k < 0 ? 0 : k;
}

}  // namespace

std::variant<SingleVariableSolution, NonExistence, Indeterminate> solve_single_variable(
    const DiagonalTensorField& t, std::optional<double> scale, std::span<const double> samples,
    const Tolerances& tol) {
  const int n = t.dim();
  const int k = single_axis_of(t);
  if (samples.empty()) throw std::invalid_argument("single-variable solve needs sample points");
  const int other = k == 0 ? 1 : 0;
  const Field f = t.component(other);
  const Field fk = t.component(k);

  for (int i = 0; i < n; ++i) {
    if (i == k || i == other) continue;
    const Field& g = t.component(i);
    if (f.expr() && g.expr() && f.expr()->structurally_equal(*g.expr())) continue;
    for (double s : samples) {
      const std::vector<double> p = axis_point(n, k, s);
      const double a = f.value(p);
      const double d = std::abs(g.value(p) - a);
      if (classify_residual(d / (1.0 + std::abs(a)), tol) != Band::Accept) {
        return NonExistence{"unequal_transverse",
                            "f_" + std::to_string(i + 1) + " differs from f_" + std::to_string(other + 1), p, d};
      }
    }
  }

  const auto antiderivative = [&](double x) {
    if (x == 0.0) return 0.0;
    return adaptive_simpson([&](double s) { return sample_axis(f, fk, n, k, s).h; }, 0.0, x, tol.quadrature).value;
  };

  std::vector<AxisSample> at(samples.size());
  std::vector<double> v(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    at[s] = sample_axis(f, fk, n, k, samples[s]);
    v[s] = std::exp(-2.0 * antiderivative(samples[s]));
  }

  double c2 = 0.0;
  if (scale) {
    c2 = *scale * *scale;
  } else {
    std::size_t best = 0;
    for (std::size_t s = 1; s < samples.size(); ++s) {
      if (std::abs(at[s].fk * v[s]) > std::abs(at[best].fk * v[best])) best = s;
    }
    const double lhs = 0.5 * at[best].h * at[best].h - at[best].dh;
    c2 = lhs / (at[best].fk * v[best]);
    if (!(c2 > 0.0) || !std::isfinite(c2)) {
      return NonExistence{"scale_sign", "first equation forces C^2 = " + std::to_string(c2),
                          axis_point(n, k, samples[best]), std::isfinite(c2) ? std::abs(lhs) + std::abs(c2) : kInf};
    }
  }

  double eq1 = 0.0;
  double eq2 = 0.0;
  std::size_t arg1 = 0;
  std::size_t arg2 = 0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const AxisSample& a = at[s];
    const double r1 = magnitude_of(0.5 * a.h * a.h - a.dh - c2 * a.fk * v[s]);
    const double r2 = magnitude_of(a.h * a.h + 2.0 * c2 * a.f * v[s]);
    if (r1 > eq1) {
      eq1 = r1;
      arg1 = s;
    }
    if (r2 > eq2) {
      eq2 = r2;
      arg2 = s;
    }
  }
  const Band b1 = classify_residual(eq1, tol);
  const Band b2 = classify_residual(eq2, tol);
  if (b1 == Band::Reject || b2 == Band::Reject) {
    const bool first = b1 == Band::Reject && (b2 != Band::Reject || eq1 >= eq2);
    return NonExistence{first ? "single_variable_eq1" : "single_variable_eq2",
                        first ? "first single-variable equation fails" : "second single-variable equation fails",
                        axis_point(n, k, samples[first ? arg1 : arg2]), first ? eq1 : eq2};
  }
  if (b1 == Band::Indeterminate || b2 == Band::Indeterminate) {
    const bool first = b1 == Band::Indeterminate;
    return Indeterminate{first ? "single_variable_eq1" : "single_variable_eq2",
                         axis_point(n, k, samples[first ? arg1 : arg2]), first ? eq1 : eq2};
  }

  const double c = std::sqrt(c2);
  const double qtol = tol.quadrature;
  auto jet = [f, fk, n, k, c, qtol](std::span<const double> p) {
    const double x = p[idx(k)];
    const double integral =
        x == 0.0 ? 0.0
                 : adaptive_simpson([&](double s) { return sample_axis(f, fk, n, k, s).h; }, 0.0, x, qtol).value;
    const AxisSample a = sample_axis(f, fk, n, k, x);
    const double u = c * std::exp(-integral);
    return Jet2::along_axis(k, u, -a.h * u, (a.h * a.h - a.dh) * u, n);
  };
  std::vector<bool> deps(idx(n), false);
  deps[idx(k)] = true;
  return SingleVariableSolution{
      k, c, Field(n, std::move(jet), std::move(deps), "C exp(-integral of h), C = " + std::to_string(c)), eq1, eq2};
}

GeneratedProblem construct_from_generator(const ScalarExpr& h, int k, double scale, double quad_tol) {
  const int n = h.dim();
  if (k < 0 || k >= n) throw DimensionMismatch("generator axis out of range");
  if (!(scale > 0.0)) throw std::invalid_argument("generator scale C must be positive");
  const std::vector<bool> vars = h.free_variables();
  for (int j = 0; j < n; ++j) {
    if (j != k && vars[idx(j)]) throw DomainError("generator h may depend on x" + std::to_string(k + 1) + " only");
  }
  bool vanishes = true;
  for (int s = -16; s <= 16 && vanishes; ++s) {
    try {
      vanishes = h.eval(axis_point(n, k, 0.25 * s)) == 0.0;
    } catch (const DomainError&) {
    }
  }
  if (vanishes) throw DegenerateTensor("generator h vanishes identically, so T = 0");

  const double inv = 1.0 / (2.0 * scale * scale);
  auto integral = [h, n, k, quad_tol](double x) {
    if (x == 0.0) return 0.0;
    std::vector<double> q(idx(n), 0.0);
    return adaptive_simpson(
               [&](double s) {
                 q[idx(k)] = s;
                 return h.eval(q);
               },
               0.0, x, quad_tol)
        .value;
  };

  // P E / (2C²) with E = e^{2∫h}; `transverse` selects P = -h² instead of h² - 2h'.
  auto component = [h, n, k, inv, integral](bool transverse) {
    return [h, n, k, inv, integral, transverse](std::span<const double> p) {
      const std::vector<double> d = axis_derivatives(h, p, k, 3);
      const double h0 = d[0], h1 = d[1], h2 = d[2], h3 = d[3];
      const double e = std::exp(2.0 * integral(p[idx(k)]));
      const double e1 = 2.0 * h0 * e;
      const double e2 = (2.0 * h1 + 4.0 * h0 * h0) * e;
      double p0 = 0.0, p1 = 0.0, p2 = 0.0;
      if (transverse) {
        p0 = -h0 * h0;
        p1 = -2.0 * h0 * h1;
        p2 = -2.0 * h1 * h1 - 2.0 * h0 * h2;
      } else {
        p0 = h0 * h0 - 2.0 * h1;
        p1 = 2.0 * h0 * h1 - 2.0 * h2;
        p2 = 2.0 * h1 * h1 + 2.0 * h0 * h2 - 2.0 * h3;
      }
      return Jet2::along_axis(k, inv * p0 * e, inv * (p1 * e + p0 * e1), inv * (p2 * e + 2.0 * p1 * e1 + p0 * e2), n);
    };
  };
  std::vector<bool> deps(idx(n), false);
  deps[idx(k)] = true;
  const std::string text = h.to_canonical_text();
  const Field f(n, component(true), deps, "-h^2/(2C^2) e^{2 int h}, h = " + text);
  const Field fk(n, component(false), deps, "(h^2 - 2h')/(2C^2) e^{2 int h}, h = " + text);

  auto ujet = [h, n, k, scale, integral](std::span<const double> p) {
    const std::vector<double> d = axis_derivatives(h, p, k, 1);
    const double u = scale * std::exp(-integral(p[idx(k)]));
    return Jet2::along_axis(k, u, -d[0] * u, (d[0] * d[0] - d[1]) * u, n);
  };
  const Field u(n, std::move(ujet), deps, "C exp(-int h), h = " + text);
  return GeneratedProblem{DiagonalTensorField::single_variable(f, fk, k), u};
}

Completeness completeness_flag(const ScalarExpr& h, int k, double lo, double hi, double bound,
                               bool asserted_global, int samples, double quad_tol) {
  if (!(hi >= lo) || samples < 2) throw std::invalid_argument("completeness probe needs lo <= hi and >= 2 samples");
  const int n = h.dim();
  std::vector<double> q(idx(n), 0.0);
  const auto hk = [&](double s) {
    q[idx(k)] = s;
    return h.eval(q);
  };
  double lowest = kInf;
  for (int s = 0; s < samples; ++s) {
    const double x = lo + (hi - lo) * s / (samples - 1);
    const double v = x == 0.0 ? 0.0 : adaptive_simpson(hk, 0.0, x, quad_tol).value;
    lowest = std::min(lowest, v);
  }
  return lowest >= -bound && asserted_global ? Completeness::Complete : Completeness::Inconclusive;
}

// --- locally conformally flat backgrounds ----------------------------------

LiftResult lift_to_background(const Field& background, const PrescribedProblem& problem) {
  PrescribedProblem eff{problem.tensor.divided_by_square(background), problem.base_point, problem.grid, problem.tol};
  LiftResult out{eff.tensor, solve(eff), std::nullopt};
  if (const auto* sol = std::get_if<Solution>(&out.report.outcome)) out.phi_rel = quotient(sol->as_field(), background);
  return out;
}

RequiredTensor required_diagonal_tensor(const ConformalMetric& m, std::span<const double> p) {
  const int n = m.dim();
  const CurvTensor r = riemann_oracle(m, p);
  const double fb = m.background().value(p);
  const double gb = 1.0 / (fb * fb);

  // least squares over the planes i<j: T_i + T_j = R_ijij / gb
  std::vector<double> ata(idx(n * n), 0.0);
  std::vector<double> atb(idx(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double s = r(i, j, i, j) / gb;
      for (int a : {i, j}) {
        atb[idx(a)] += s;
        for (int b : {i, j}) ata[idx(a * n + b)] += 1.0;
      }
    }
  }
  RequiredTensor out;
  out.t = detail::solve_linear(ata, atb, n);
  const SymBilinear tt = SymBilinear::diagonal(out.t);
  SymBilinear g(n);
  for (int i = 0; i < n; ++i) g.set(i, i, gb);
  out.residual = tensor_max_norm(tensor_difference(r, kulkarni_nomizu(tt, g)));
  return out;
}

PairingComparison compare_pairings(const DiagonalTensorField& t, const ConformalMetric& m, const Grid& grid) {
  const std::size_t count = grid.size();
  std::vector<double> bg(count, 0.0);
  std::vector<double> eu(count, 0.0);
  const auto rel = [](double a, double b) {
    const double den = std::max(std::abs(a), std::abs(b));
    return den == 0.0 ? 0.0 : std::abs(a - b) / den;
  };
  parallel_for(count, [&](std::size_t s) {
    const std::vector<double> p = grid.point(s);
    const std::vector<double> req = required_diagonal_tensor(m, p).t;
    const std::vector<double> tv = t.values(p);
    const double fb = m.background().value(p);
    for (std::size_t i = 0; i < tv.size(); ++i) {
      bg[s] = std::max(bg[s], rel(tv[i], req[i]));
      eu[s] = std::max(eu[s], rel(tv[i], req[i] / (fb * fb)));
    }
  });
  const ResidualStat b = summarize("background", bg, grid);
  const ResidualStat e = summarize("euclidean", eu, grid);
  return PairingComparison{b.max, e.max, b.argmax, e.argmax};
}

// --- verification ------------------------------------------------------------

VerifyReport verify(const DiagonalTensorField& t, const Field& background, const Field& phi_rel, const Grid& grid,
                    const Tolerances& tol) {
  const int n = t.dim();
  if (grid.dim() != n) throw DimensionMismatch("grid and tensor differ in dimension");
  const ConformalMetric m(background, phi_rel);
  const DiagonalTensorField eff = t.divided_by_square(background);
  const std::size_t count = grid.size();

  struct PointResult {
    double diagonal = 0.0;
    double cross = 0.0;
    CompatibilityResidual compat;
    double oracle = 0.0;
  };
  std::vector<PointResult> res(count);
  parallel_for(count, [&](std::size_t s) {
    const std::vector<double> p = grid.point(s);
    const Jet2 u = m.total_factor(p);
    const std::vector<Jet2> f = eff.jets(p);
    std::vector<double> fv(idx(n));
    for (int i = 0; i < n; ++i) fv[idx(i)] = f[idx(i)].value();
    const PdeResidual pde = system_residual(u, fv);
    res[s].diagonal = pde.max_abs_diagonal();
    res[s].cross = pde.max_abs_cross();
    res[s].compat = compatibility_residuals(f);
    const CurvTensor oracle = riemann_oracle_from_factor(u);
    const CurvTensor want = kulkarni_nomizu(SymBilinear::diagonal(fv), SymBilinear::identity(n));
    res[s].oracle = tensor_max_norm(tensor_difference(oracle, want)) / (1.0 + tensor_max_norm(oracle));
  });

  VerifyReport out;
  std::vector<double> column(count);
  const auto add = [&](const std::string& name, auto get) {
    for (std::size_t s = 0; s < count; ++s) column[s] = get(res[s]);
    out.residuals.push_back(summarize(name, column, grid));
    out.band = worst(out.band, classify_residual(out.residuals.back().max, tol));
  };
  add("system_diagonal", [](const PointResult& r) { return r.diagonal; });
  add("system_cross", [](const PointResult& r) { return r.cross; });
  add(family_name(1), [](const PointResult& r) { return r.compat.family1; });
  add(family_name(2), [](const PointResult& r) { return r.compat.family2; });
  add(family_name(3), [](const PointResult& r) { return r.compat.family3; });
  add(family_name(5), [](const PointResult& r) { return r.compat.family5; });
  add("curvature_oracle", [](const PointResult& r) { return r.oracle; });

  int skipped = 0;
  for (const PointResult& r : res) skipped += r.compat.skipped_pairs;
  if (skipped > 0) {
    out.notes.push_back(std::to_string(skipped) + " (point, pair) samples skipped where 3 f_i + f_j vanishes");
  }
  return out;
}

}  // namespace confcurv
