#include "linalg.hpp"

#include <cmath>
#include <utility>

#include "confcurv/errors.hpp"

namespace confcurv::detail {

namespace {

// Reduces [a | rhs] in place; rhs has `m` columns. Returns false when a
// zero pivot is met.
bool gauss_jordan(std::vector<double>& a, std::vector<double>& rhs, int n, int m) {
  auto A = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r * n + c)]; };
  auto B = [&](int r, int c) -> double& { return rhs[static_cast<std::size_t>(r * m + c)]; };
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(A(r, col)) > std::abs(A(pivot, col))) pivot = r;
    }
    if (A(pivot, col) == 0.0) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(A(pivot, c), A(col, c));
      for (int c = 0; c < m; ++c) std::swap(B(pivot, c), B(col, c));
    }
    const double inv = 1.0 / A(col, col);
    for (int c = 0; c < n; ++c) A(col, c) *= inv;
    for (int c = 0; c < m; ++c) B(col, c) *= inv;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = A(r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) A(r, c) -= f * A(col, c);
      for (int c = 0; c < m; ++c) B(r, c) -= f * B(col, c);
    }
  }
  return true;
}

}  // namespace

std::vector<double> invert(const std::vector<double>& a, int n) {
  std::vector<double> work = a;
  std::vector<double> inv(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = 1.0;
  if (!gauss_jordan(work, inv, n, n)) throw SingularMetric("matrix is not invertible");
  return inv;
}

std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, int n) {
  if (!gauss_jordan(a, b, n, 1)) throw DomainError("singular linear system");
  return b;
}

}  // namespace confcurv::detail
