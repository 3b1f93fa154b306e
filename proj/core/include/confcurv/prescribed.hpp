#pragma once

// Prescribed curvature tensor R = T ⊙ g for diagonal T = Σ f_i dx_i² and
// conformal metrics gbar = g / u².
//
// On euclidean space the problem is equivalent to the PDE system
//
//   u_ii / u - |∇u|² / (2u²) = u² f_i      (every i)
//   u_ij = 0                                (i != j)
//
// and any solution has ∂_j ln u = -H_ij for every i != j, where
//
//   H_ij = f_{i,x_j} / (3 f_i + f_j).
//
// The solver integrates the gradient field G_j = -H_{i(j) j} of ln u along
// coordinate legs, fixes the free multiplicative constant from the
// diagonal equations, and audits the result against the PDE system on a
// grid. Compatibility of the H_ij (independence of i, closedness of G, and
// vanishing mixed second derivatives) is reported as residual families:
//
//   family 1  spread of H_ij over i, for fixed j
//   family 2  ∂_k H_ji - ∂_i H_jk                (i, k != j)
//   family 3  ∂_i H_ij - ∂_j H_ji
//   family 4  diagonal PDE residual with the reconstructed u
//   family 5  H_ji H_ij - ∂_i H_ij
//
// Indices are 0-based throughout this API.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "confcurv/curvature.hpp"
#include "confcurv/field.hpp"
#include "confcurv/grid.hpp"

namespace confcurv {

struct Tolerances {
  double accept = 1e-8;
  double reject = 1e-4;
  double quadrature = 1e-10;
};

/// Where a residual falls relative to the accept/reject thresholds.
enum class Band { Accept, Indeterminate, Reject };
Band classify_residual(double residual, const Tolerances& tol);

class DiagonalTensorField {
 public:
  enum class Structure { General, SingleVariable, Isotropic };

  /// General T; checks that every component has dimension n >= 3.
  explicit DiagonalTensorField(std::vector<Field> components);
  /// f_i = f for i != k, f_k on the k-th slot; all depending on x_k only.
  static DiagonalTensorField single_variable(const Field& f, const Field& f_k, int k);
  /// f_i = f for all i.
  static DiagonalTensorField isotropic(const Field& f);

  int dim() const noexcept { return static_cast<int>(f_.size()); }
  const Field& component(int i) const { return f_[static_cast<std::size_t>(i)]; }
  const std::vector<Field>& components() const noexcept { return f_; }
  Structure structure() const noexcept { return structure_; }
  /// Distinguished coordinate for SingleVariable, else -1.
  int axis() const noexcept { return axis_; }

  std::vector<Jet2> jets(std::span<const double> p) const;
  std::vector<double> values(std::span<const double> p) const;

  /// T * s.
  DiagonalTensorField scaled(double s) const;
  /// T / F², the euclidean-equivalent tensor for a background δ / F².
  DiagonalTensorField divided_by_square(const Field& background) const;

 private:
  std::vector<Field> f_;
  Structure structure_ = Structure::General;
  int axis_ = -1;
};

/// True when 3 f_i + f_j is numerically nonzero, i.e. H_ij is defined.
bool pair_admissible(double f_i, double f_j);

/// H_ij and ∂_k H_ij at one point, from the jets of the f_i.
struct RatioField {
  int n = 0;
  std::vector<bool> admissible;  // [i*n + j]
  std::vector<double> value;     // H_ij
  std::vector<double> gradient;  // ∂_k H_ij at [(i*n + j)*n + k]

  bool ok(int i, int j) const { return admissible[static_cast<std::size_t>(i * n + j)]; }
  double h(int i, int j) const { return value[static_cast<std::size_t>(i * n + j)]; }
  double dh(int i, int j, int k) const { return gradient[static_cast<std::size_t>((i * n + j) * n + k)]; }
};
RatioField ratio_field(std::span<const Jet2> f);

/// G = ∇ ln u at a point, with its Jacobian.
struct GradientField {
  std::vector<double> g;     // G_j
  std::vector<double> dg;    // ∂_k G_j at [j*n + k]
  std::vector<int> source;   // i used for G_j: smallest admissible index != j
  double consistency = 0.0;  // family 1 at this point

  double d(int j, int k) const { return dg[static_cast<std::size_t>(j * static_cast<int>(g.size()) + k)]; }
};
/// Throws Degenerate when some G_j has no admissible i.
GradientField gradient_field(std::span<const Jet2> f, std::span<const double> p);
GradientField gradient_field(const DiagonalTensorField& t, std::span<const double> p);

/// Residuals of the PDE system for a candidate factor u.
struct PdeResidual {
  std::vector<double> diagonal;  // u_ii/u - |∇u|²/(2u²) - u² f_i
  std::vector<double> cross;     // u_ij, pairs i<j in lexicographic order

  double max_abs() const;
  double max_abs_diagonal() const;
  double max_abs_cross() const;
};
PdeResidual system_residual(const Jet2& u, std::span<const double> f);
/// Throws SingularMetric when u(p) = 0.
PdeResidual system_residual(const Field& u, const DiagonalTensorField& t, std::span<const double> p);

/// Compatibility residual families at one point (see header comment).
/// Family 4 needs a factor and is filled only when `u` is given.
struct CompatibilityResidual {
  double family1 = 0.0;
  double family2 = 0.0;
  double family3 = 0.0;
  std::optional<double> family4;
  double family5 = 0.0;
  int skipped_pairs = 0;  // pairs with vanishing 3 f_i + f_j

  double max() const;
};
CompatibilityResidual compatibility_residuals(std::span<const Jet2> f, const Jet2* u = nullptr);
CompatibilityResidual compatibility_residuals(const DiagonalTensorField& t, std::span<const double> p);

enum class SweepOrder { Forward, Reversed };

/// ln u(query) - ln u(base): line integral of G along the axis-aligned
/// polyline that moves one coordinate at a time (x1..xn for Forward).
double reconstruct_log_ratio(const DiagonalTensorField& t, std::span<const double> base,
                             std::span<const double> query, double quad_tol, SweepOrder order = SweepOrder::Forward);
/// u(query) / u(base).
double reconstruct_phi(const DiagonalTensorField& t, std::span<const double> base, std::span<const double> query,
                       double quad_tol, SweepOrder order = SweepOrder::Forward);

/// Why no metric exists (or which check failed).
struct NonExistence {
  std::string witness;  // separable_tensor | compatibility_family_N | scale_sign | pde_audit | single_variable_eqN | unequal_transverse
  std::string detail;
  std::vector<double> location;
  double magnitude = 0.0;
};

/// Residual between the accept and reject thresholds.
struct Indeterminate {
  std::string check;
  std::vector<double> location;
  double magnitude = 0.0;
};

/// The multiplicative constant C = u(base) fixed by the diagonal equations
/// at `base`. Returns NonExistence when C² <= 0; throws ScaleInconsistent
/// when the diagonal equations disagree by more than `tol` (relative) and
/// Degenerate when all f_i(base) vanish.
std::variant<double, NonExistence> determine_scale(const DiagonalTensorField& t, std::span<const double> base,
                                                   double tol = 1e-8);

/// max / mean / argmax of one residual family over a grid.
struct ResidualStat {
  std::string family;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> argmax;
  std::size_t samples = 0;
};

/// u = C exp(∫ G) reconstructed from T.
class Solution {
 public:
  Solution(DiagonalTensorField t, std::vector<double> base, double scale, double quad_tol);

  double scale() const noexcept { return scale_; }
  const std::vector<double>& base_point() const noexcept { return base_; }
  const DiagonalTensorField& tensor() const noexcept { return t_; }

  double phi_at(std::span<const double> q, SweepOrder order = SweepOrder::Forward) const;
  /// G = ∇ ln u at q.
  std::vector<double> log_phi_grad(std::span<const double> q) const;
  /// Jet of u at q: gradient u G, Hessian u (G_i G_j + ∂_i G_j).
  Jet2 jet_at(std::span<const double> q) const;
  /// u as a procedural field.
  Field as_field() const;

 private:
  DiagonalTensorField t_;
  std::vector<double> base_;
  double scale_;
  double quad_tol_;
};

struct PrescribedProblem {
  DiagonalTensorField tensor;
  std::vector<double> base_point;
  Grid grid;
  Tolerances tol;
};

struct SolveReport {
  std::variant<Solution, NonExistence, Indeterminate> outcome;
  std::vector<ResidualStat> residuals;
  std::vector<std::string> notes;

  bool solved() const { return std::holds_alternative<Solution>(outcome); }
};

/// Separability screen, compatibility families on the grid, reconstruction
/// and scale, then a PDE audit of the reconstructed u on the grid. A
/// Solution is returned only when every check is within tol.accept.
/// Throws Degenerate when some G_j is undefined at a grid point.
SolveReport solve(const PrescribedProblem& problem);

/// Every f_i depends on x_i alone (structurally, confirmed by vanishing
/// cross derivatives on the grid) and T is not identically zero: such T
/// admit no conformal metric.
bool separable_nonexistence(const DiagonalTensorField& t, const Grid& grid);

// --- isotropic T = f (g ⊙ g): quadratic factors -------------------------

struct QuadraticFamily {
  double a = 0.0;
  std::vector<double> b;
  double c = 0.0;
  double lambda = 0.0;  // |b|² - 4ac

  static QuadraticFamily make(double a, std::vector<double> b, double c);
  double u(std::span<const double> x) const;
};

struct QuadraticConstruction {
  QuadraticFamily family;
  ScalarExpr u;  // Σ (a x_i² + b_i x_i) + c
  ScalarExpr f;  // -λ / (2 u⁴)
};
/// Throws DegenerateFamily when a, b, c all vanish.
QuadraticConstruction construct_quadratic_family(double a, std::span<const double> b, double c);

struct SingularSet {
  enum class Kind { Empty, Point, Hyperplane, Sphere };
  Kind kind = Kind::Empty;
  std::vector<double> center;  // Point and Sphere
  std::vector<double> normal;  // Hyperplane {x : normal·x + offset = 0}
  double offset = 0.0;
  double radius = 0.0;
};
/// Zero set of u. Values with |λ| or |a| <= zero_tol count as zero.
SingularSet classify_singular_set(const QuadraticFamily& fam, double zero_tol = 0.0);
const char* to_string(SingularSet::Kind k);

struct QuadraticMismatch {
  std::string reason;
  double max_deviation = 0.0;  // relative
  std::vector<double> argmax;
};
/// Recovers (a, b, c) from an isotropic density f by fitting the quadratic
/// (f(x0)/f)^(1/4) on the stencil {x0, x0 ± s e_i} at the grid center, then
/// verifies f = -λ/(2u⁴) on the whole grid to `tol` (relative). The result
/// is normalized so that u(x0) > 0. Throws NegativeRadicand when f changes
/// sign on the stencil.
std::variant<QuadraticFamily, QuadraticMismatch> detect_quadratic_family(const Field& f, const Grid& grid,
                                                                         double tol = 1e-8);

// --- T depending on one coordinate x_k ----------------------------------

struct SingleVariableSolution {
  int axis = 0;
  double scale = 0.0;
  Field u;  // C exp(-∫_0^{x_k} h)
  double eq1_residual = 0.0;
  double eq2_residual = 0.0;
};

/// With h = f'/(3f + f_k) and v = exp(-2∫_0 h), checks
///   ½h² - h' = C² f_k v   and   -h² = 2C² f v
/// on `samples` (values of x_k). When `scale` is empty C is inferred from
/// the first equation at the sample with the largest |f_k v|.
std::variant<SingleVariableSolution, NonExistence, Indeterminate> solve_single_variable(
    const DiagonalTensorField& t, std::optional<double> scale, std::span<const double> samples,
    const Tolerances& tol);

struct GeneratedProblem {
  DiagonalTensorField tensor;
  Field u;
};
/// T with f_k = (h² - 2h')/(2C²) e^{2∫h}, f = -h²/(2C²) e^{2∫h} and the
/// factor u = C e^{-∫h}, antiderivatives anchored at x_k = 0. Throws
/// DegenerateTensor when h vanishes identically.
GeneratedProblem construct_from_generator(const ScalarExpr& h, int k, double scale, double quad_tol = 1e-10);

enum class Completeness { Complete, Inconclusive };
/// Sufficient completeness test for u = C e^{-∫h}: the running
/// antiderivative stays >= -bound over `samples` points of [lo, hi] and the
/// caller asserts the bound holds globally.
Completeness completeness_flag(const ScalarExpr& h, int k, double lo, double hi, double bound,
                               bool asserted_global, int samples = 41, double quad_tol = 1e-10);

// --- locally conformally flat backgrounds --------------------------------

struct LiftResult {
  DiagonalTensorField effective;
  SolveReport report;
  std::optional<Field> phi_rel;  // u / F when solved
};
/// Solves R = T ⊙ (δ/F²) through the euclidean problem with f_i / F².
LiftResult lift_to_background(const Field& background, const PrescribedProblem& problem);

/// Diagonal T with R_oracle = T ⊙ g at p, g = δ / F² the background of m.
struct RequiredTensor {
  std::vector<double> t;
  double residual = 0.0;  // max |R_oracle - T ⊙ g|
};
RequiredTensor required_diagonal_tensor(const ConformalMetric& m, std::span<const double> p);

/// Compares a given T with the tensor the oracle requires, under the two
/// possible pairings: R = T ⊙ g (background) and R = T ⊙ δ (euclidean).
struct PairingComparison {
  double background_deviation = 0.0;  // max relative |T - T_req|
  double euclidean_deviation = 0.0;   // max relative |T - T_req / F²|
  std::vector<double> background_argmax;
  std::vector<double> euclidean_argmax;
};
PairingComparison compare_pairings(const DiagonalTensorField& t, const ConformalMetric& m, const Grid& grid);

// --- verification of a given factor --------------------------------------

struct VerifyReport {
  Band band = Band::Accept;
  std::vector<ResidualStat> residuals;
  std::vector<std::string> notes;
};
/// PDE and compatibility residuals of (T, phi_rel) over the grid, for the
/// background δ/F² (F = 1 for euclidean space).
VerifyReport verify(const DiagonalTensorField& t, const Field& background, const Field& phi_rel, const Grid& grid,
                    const Tolerances& tol);

}  // namespace confcurv
