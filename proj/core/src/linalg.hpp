#pragma once

// Small dense linear algebra for n <= ~20; row-major storage.

#include <vector>

namespace confcurv::detail {

/// Inverse of the n x n matrix `a`; throws SingularMetric when singular.
std::vector<double> invert(const std::vector<double>& a, int n);

/// Solves a x = b by Gaussian elimination with partial pivoting; throws
/// DomainError when a is singular.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, int n);

}  // namespace confcurv::detail
