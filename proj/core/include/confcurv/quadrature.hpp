#pragma once

#include <functional>

namespace confcurv {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

/// Adaptive Simpson rule on [a, b] (b < a allowed, giving the signed
/// integral). Subintervals are accepted when the Richardson estimate
/// |S2 - S1| / 15 is below their share of `abs_tol`; a subinterval that
/// still fails at `max_depth` raises QuadratureFailure.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol = 1e-10, int max_depth = 40);

}  // namespace confcurv
