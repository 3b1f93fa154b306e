#include "confcurv/tensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "confcurv/errors.hpp"
#include "linalg.hpp"

namespace confcurv {

namespace {

void require_dims(int a, int b) {
  if (a != b) throw DimensionMismatch("tensor dimensions differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace

SymBilinear::SymBilinear(int n) : n_(n), a_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0) {}

SymBilinear SymBilinear::identity(int n) {
  SymBilinear s(n);
  for (int i = 0; i < n; ++i) s.set(i, i, 1.0);
  return s;
}

SymBilinear SymBilinear::diagonal(std::span<const double> d) {
  SymBilinear s(static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) s.set(static_cast<int>(i), static_cast<int>(i), d[i]);
  return s;
}

double SymBilinear::max_norm() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

double SymBilinear::trace(const SymBilinear& metric) const {
  require_dims(n_, metric.n_);
  const std::vector<double> inv = detail::invert(metric.a_, n_);
  double t = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) t += inv[idx(i, j)] * (*this)(j, i);
  }
  return t;
}

SymBilinear& SymBilinear::operator+=(const SymBilinear& o) {
  require_dims(n_, o.n_);
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

SymBilinear& SymBilinear::operator-=(const SymBilinear& o) {
  require_dims(n_, o.n_);
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

SymBilinear& SymBilinear::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

CurvTensor::CurvTensor(int n) : n_(n), r_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

void CurvTensor::set_with_symmetries(int i, int j, int k, int l, double v) {
  at(i, j, k, l) = v;
  at(j, i, k, l) = -v;
  at(i, j, l, k) = -v;
  at(j, i, l, k) = v;
  at(k, l, i, j) = v;
  at(l, k, i, j) = -v;
  at(k, l, j, i) = -v;
  at(l, k, j, i) = v;
}

CurvTensor kulkarni_nomizu(const SymBilinear& a, const SymBilinear& b) {
  require_dims(a.dim(), b.dim());
  const int n = a.dim();
  CurvTensor r(n);
  // One evaluation per unordered pair of index pairs, copied to the
  // symmetric positions: antisymmetry and pair symmetry then hold exactly.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
          if (k * n + l < i * n + j) continue;
          // Extended precision keeps each stored value within about half an
          // ulp of the exact product, which bounds the Bianchi residual.
          const long double v = static_cast<long double>(a(i, k)) * b(j, l) +
                                static_cast<long double>(a(j, l)) * b(i, k) -
                                static_cast<long double>(a(i, l)) * b(j, k) -
                                static_cast<long double>(a(j, k)) * b(i, l);
          r.set_with_symmetries(i, j, k, l, static_cast<double>(v));
        }
      }
    }
  }
  return r;
}

double SymmetryViolation::max() const { return std::max({antisym_first, antisym_second, pair, bianchi}); }

namespace {

// Visits every index tuple and reports (raw violation, rounding slack) for
// each symmetry family.
template <typename Visit>
void for_each_symmetry(const CurvTensor& r, Visit&& visit) {
  const int n = r.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          const double a = r(i, j, k, l);
          const double b = r(j, i, k, l);
          const double c = r(i, j, l, k);
          const double d = r(k, l, i, j);
          const double e = r(i, k, l, j);
          const double f = r(i, l, j, k);
          visit(0, std::abs(a + b), 2.0 * kEps * (std::abs(a) + std::abs(b)));
          visit(1, std::abs(a + c), 2.0 * kEps * (std::abs(a) + std::abs(c)));
          visit(2, std::abs(a - d), 2.0 * kEps * (std::abs(a) + std::abs(d)));
          visit(3, std::abs(a + e + f), 4.0 * kEps * (std::abs(a) + std::abs(e) + std::abs(f)));
        }
      }
    }
  }
}

}  // namespace

SymmetryViolation symmetry_violation(const CurvTensor& r) {
  SymmetryViolation v;
  double* slots[] = {&v.antisym_first, &v.antisym_second, &v.pair, &v.bianchi};
  for_each_symmetry(r, [&](int family, double raw, double) {
    *slots[family] = std::max(*slots[family], raw);
  });
  return v;
}

bool validate_symmetries(const CurvTensor& r, double tol) {
  bool ok = true;
  for_each_symmetry(r, [&](int, double raw, double slack) {
    if (!(raw <= tol + slack)) ok = false;
  });
  return ok;
}

double tensor_max_norm(const CurvTensor& r) {
  double m = 0.0;
  for (double v : r.data()) m = std::max(m, std::abs(v));
  return m;
}

CurvTensor tensor_difference(const CurvTensor& a, const CurvTensor& b) {
  require_dims(a.dim(), b.dim());
  const int n = a.dim();
  CurvTensor d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) d.at(i, j, k, l) = a(i, j, k, l) - b(i, j, k, l);
  return d;
}

}  // namespace confcurv
