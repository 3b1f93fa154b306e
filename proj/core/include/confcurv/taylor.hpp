#pragma once

#include <span>
#include <vector>

#include "confcurv/expr.hpp"

namespace confcurv {

/// Derivatives d^m e / dx_axis^m at p for m = 0..order, by univariate
/// Taylor-series arithmetic over the expression tree (exact to rounding).
/// Used where a construction needs more than the two orders a Jet2 holds.
std::vector<double> axis_derivatives(const ScalarExpr& e, std::span<const double> p, int axis, int order);

}  // namespace confcurv
