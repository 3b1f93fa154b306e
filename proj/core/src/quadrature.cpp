#include "confcurv/quadrature.hpp"

#include <cmath>
#include <string>

#include "confcurv/errors.hpp"

namespace confcurv {

namespace {

// Guards against a coarse first estimate agreeing by accident (e.g. odd
// integrands over symmetric intervals).
constexpr int kMinDepth = 3;

struct Simpson {
  const std::function<double(double)>& f;
  int max_depth;
  int evaluations = 0;
  double error = 0.0;

  double eval(double x) {
    ++evaluations;
    const double v = f(x);
    if (!std::isfinite(v)) throw QuadratureFailure("non-finite integrand at " + std::to_string(x));
    return v;
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= kMinDepth && std::abs(delta) <= 15.0 * tol) {
      error += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (depth >= max_depth) {
      throw QuadratureFailure("adaptive Simpson did not reach tolerance on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]");
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                  int max_depth) {
  if (!(abs_tol > 0.0)) throw QuadratureFailure("quadrature tolerance must be positive");
  if (a == b) return {};
  Simpson s{f, max_depth};
  const double fa = s.eval(a);
  const double fb = s.eval(b);
  const double fm = s.eval(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  QuadratureResult r;
  r.value = s.recurse(a, b, fa, fm, fb, whole, abs_tol, 0);
  r.error_estimate = s.error;
  r.evaluations = s.evaluations;
  return r;
}

}  // namespace confcurv
