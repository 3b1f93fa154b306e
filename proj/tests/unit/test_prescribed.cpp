#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "confcurv/errors.hpp"
#include "confcurv/prescribed.hpp"

using namespace confcurv;

namespace {

Field fx(const char* text, int n = 3) { return Field(ScalarExpr::parse(text, n)); }

// u = 1/(1+x1^2): f = -2 x1^2, f_k = 4 x1^2 - 2 (k = x1, C = 1)
DiagonalTensorField example2() { return DiagonalTensorField::single_variable(fx("-2*x1^2"), fx("4*x1^2-2"), 0); }
DiagonalTensorField example3() {
  return DiagonalTensorField::single_variable(fx("-2*x1^2*exp(2*x1^2)"), fx("2*(x1^2-1)*exp(2*x1^2)"), 0);
}

Grid line_grid() { return Grid({0, 0, 0}, 2.0, 9, {true, false, false}); }

}  // namespace

TEST(Bands, Thresholds) {
  const Tolerances tol;
  EXPECT_EQ(classify_residual(1e-9, tol), Band::Accept);
  EXPECT_EQ(classify_residual(1e-6, tol), Band::Indeterminate);
  EXPECT_EQ(classify_residual(1e-3, tol), Band::Reject);
  EXPECT_EQ(classify_residual(std::nan(""), tol), Band::Reject);
}

TEST(Tensor, StructureAndTransforms) {
  const DiagonalTensorField t = example2();
  EXPECT_EQ(t.structure(), DiagonalTensorField::Structure::SingleVariable);
  EXPECT_EQ(t.axis(), 0);
  const std::vector<double> p{1.0, 5.0, 5.0};
  EXPECT_EQ(t.values(p), (std::vector<double>{2.0, -2.0, -2.0}));
  EXPECT_EQ(t.scaled(0.25).values(p), (std::vector<double>{0.5, -0.5, -0.5}));
  EXPECT_EQ(t.divided_by_square(Field::constant(2.0, 3)).values(p), (std::vector<double>{0.5, -0.5, -0.5}));
  EXPECT_THROW(DiagonalTensorField({fx("x1", 2), fx("x2", 2)}), std::exception);
}

TEST(Ratio, HMatchesLogDerivative) {
  // every solution has ∂_j ln u = -H_ij, here ∂_1 ln u = -2x/(1+x^2)
  const DiagonalTensorField t = example2();
  const std::vector<double> p{0.7, 0.1, -0.3};
  const GradientField g = gradient_field(t, p);
  EXPECT_NEAR(g.g[0], -2 * 0.7 / (1 + 0.49), 1e-14);
  EXPECT_NEAR(g.g[1], 0.0, 1e-15);
  EXPECT_NEAR(g.g[2], 0.0, 1e-15);
  EXPECT_LE(g.consistency, 1e-15);
}

TEST(Ratio, InadmissiblePairsSkipped) {
  EXPECT_FALSE(pair_admissible(1.0, -3.0));
  EXPECT_TRUE(pair_admissible(1.0, 1.0));
  EXPECT_FALSE(pair_admissible(0.0, 0.0));
  const DiagonalTensorField zero({Field::constant(0, 3), Field::constant(0, 3), Field::constant(0, 3)});
  EXPECT_THROW(gradient_field(zero, std::vector<double>{0, 0, 0}), Degenerate);
}

TEST(System, ClosedFormFactorHasZeroResidual) {
  const DiagonalTensorField t = example2();
  for (double x : {-2.0, -0.5, 0.0, 0.7, 2.0}) {
    const std::vector<double> p{x, 0.1, -0.3};
    const PdeResidual r = system_residual(fx("1/(1+x1^2)"), t, p);
    EXPECT_LE(r.max_abs(), 1e-12);
    const CompatibilityResidual c = compatibility_residuals(t, p);
    EXPECT_LE(c.max(), 1e-12);
  }
  EXPECT_GT(system_residual(fx("2/(1+x1^2)"), t, std::vector<double>{0.5, 0, 0}).max_abs_diagonal(), 0.1);
  EXPECT_GT(system_residual(fx("1+x1*x2"), t, std::vector<double>{0.5, 0, 0}).max_abs_cross(), 0.5);
}

TEST(Scale, RecoveredAndQuarterScaleDoubles) {
  const std::vector<double> base{0, 0, 0};
  const auto c = determine_scale(example2(), base);
  ASSERT_TRUE(std::holds_alternative<double>(c));
  EXPECT_NEAR(std::get<double>(c), 1.0, 1e-12);
  const auto c4 = determine_scale(example2().scaled(0.25), base);
  EXPECT_NEAR(std::get<double>(c4), 2.0, 1e-12);
  const auto neg = determine_scale(example2().scaled(-1.0), base);
  ASSERT_TRUE(std::holds_alternative<NonExistence>(neg));
  EXPECT_EQ(std::get<NonExistence>(neg).witness, "scale_sign");
}

TEST(Reconstruct, PathIndependentAndClosedForm) {
  const DiagonalTensorField t = example2();
  const std::vector<double> base{0, 0, 0};
  const std::vector<double> q{2, 0.5, -1};
  const double fwd = reconstruct_phi(t, base, q, 1e-12, SweepOrder::Forward);
  const double rev = reconstruct_phi(t, base, q, 1e-12, SweepOrder::Reversed);
  EXPECT_NEAR(fwd, 0.2, 1e-9);
  EXPECT_NEAR(rev, 0.2, 1e-9);
}

TEST(Solve, Example2) {
  const SolveReport r = solve(PrescribedProblem{example2(), {0, 0, 0}, line_grid(), {}});
  ASSERT_TRUE(r.solved());
  const Solution& s = std::get<Solution>(r.outcome);
  EXPECT_NEAR(s.scale(), 1.0, 1e-10);
  for (double x : line_grid().axis_values(0)) {
    EXPECT_NEAR(s.phi_at(std::vector<double>{x, 0, 0}), 1 / (1 + x * x), 1e-8);
  }
}

TEST(Solve, SeparableAndConstantTensorsHaveNoMetric) {
  const Grid grid({0, 0, 0}, 1.0, 5);
  for (const auto& t : {DiagonalTensorField({fx("exp(x1)"), fx("exp(x2)"), fx("exp(x3)")}),
                        DiagonalTensorField({Field::constant(1, 3), Field::constant(1, 3), Field::constant(1, 3)})}) {
    EXPECT_TRUE(separable_nonexistence(t, grid));
    const SolveReport r = solve(PrescribedProblem{t, {0, 0, 0}, grid, {}});
    ASSERT_TRUE(std::holds_alternative<NonExistence>(r.outcome));
    EXPECT_EQ(std::get<NonExistence>(r.outcome).witness, "separable_tensor");
  }
  EXPECT_FALSE(separable_nonexistence(example2(), grid));
}

TEST(Solve, PerturbedExample3IsRejectedByACompatibilityFamily) {
  const DiagonalTensorField t({fx("2*(x1^2-1)*exp(2*x1^2)"), fx("-2*x1^2*exp(2*x1^2)*(1+0.1*x2^2)"),
                               fx("-2*x1^2*exp(2*x1^2)*(1+0.1*x2^2)")});
  const SolveReport r = solve(PrescribedProblem{t, {0, 0, 0}, Grid({0, 0, 0}, 1.0, 5), {}});
  ASSERT_TRUE(std::holds_alternative<NonExistence>(r.outcome));
  const NonExistence& w = std::get<NonExistence>(r.outcome);
  EXPECT_EQ(w.witness.rfind("compatibility_family_", 0), 0u) << w.witness;
  EXPECT_GE(w.magnitude, 1e-3);
}

TEST(Quadratic, ConstructionDetectionClassification) {
  const std::vector<double> zero{0, 0, 0};
  const QuadraticConstruction q = construct_quadratic_family(1.0, zero, 1.0);
  EXPECT_DOUBLE_EQ(q.family.lambda, -4.0);
  // u = 1 + |x|^2 gives f = 2/u^4
  const std::vector<double> p{0.5, -1, 0.25};
  const double u = 1 + 0.25 + 1 + 0.0625;
  EXPECT_NEAR(q.f.eval(p), 2 / std::pow(u, 4), 1e-15);

  const auto det = detect_quadratic_family(Field(q.f), Grid({0, 0, 0}, 1.0, 5));
  ASSERT_TRUE(std::holds_alternative<QuadraticFamily>(det));
  const QuadraticFamily& f = std::get<QuadraticFamily>(det);
  EXPECT_NEAR(f.a, 1.0, 1e-8);
  EXPECT_NEAR(f.c, 1.0, 1e-8);
  for (double b : f.b) EXPECT_NEAR(b, 0.0, 1e-8);
  EXPECT_EQ(classify_singular_set(f, 1e-10).kind, SingularSet::Kind::Empty);

  const SingularSet sphere = classify_singular_set(QuadraticFamily::make(1, {0, 0, 0}, -1));
  EXPECT_EQ(sphere.kind, SingularSet::Kind::Sphere);
  EXPECT_NEAR(sphere.radius, 1.0, 1e-12);
  const SingularSet shifted = classify_singular_set(QuadraticFamily::make(1, {-2, 0, 0}, -3));
  EXPECT_EQ(shifted.kind, SingularSet::Kind::Sphere);
  EXPECT_NEAR(shifted.center[0], 1.0, 1e-12);
  EXPECT_NEAR(shifted.radius, 2.0, 1e-12);
  EXPECT_EQ(classify_singular_set(QuadraticFamily::make(1, {0, 0, 0}, 0)).kind, SingularSet::Kind::Point);
  EXPECT_EQ(classify_singular_set(QuadraticFamily::make(0, {1, 0, 0}, 1)).kind, SingularSet::Kind::Hyperplane);
  EXPECT_THROW(construct_quadratic_family(0, zero, 0), DegenerateFamily);
}

TEST(Quadratic, NonQuadraticDensityMismatches) {
  const auto det = detect_quadratic_family(fx("1/(1+x1^2+x2^2+x3^2)^3"), Grid({0, 0, 0}, 1.0, 5));
  EXPECT_TRUE(std::holds_alternative<QuadraticMismatch>(det));
  EXPECT_THROW(detect_quadratic_family(fx("x1"), Grid({0.5, 0, 0}, 1.0, 5)), NegativeRadicand);
  const auto vanishing = detect_quadratic_family(fx("x1"), Grid({0, 0, 0}, 1.0, 5));
  EXPECT_TRUE(std::holds_alternative<QuadraticMismatch>(vanishing));
}

TEST(SingleVariable, Example3) {
  const std::vector<double> xs{-2, -1, -0.5, 0, 0.5, 1, 2};
  const auto r = solve_single_variable(example3(), 1.0, xs, Tolerances{});
  ASSERT_TRUE(std::holds_alternative<SingleVariableSolution>(r));
  const SingleVariableSolution& s = std::get<SingleVariableSolution>(r);
  EXPECT_LE(s.eq1_residual, 1e-8);
  EXPECT_LE(s.eq2_residual, 1e-8);
  for (double x : xs) EXPECT_NEAR(s.u.value(std::vector<double>{x, 0, 0}), std::exp(-x * x), 1e-8);
  const auto inferred = solve_single_variable(example3(), std::nullopt, xs, Tolerances{});
  ASSERT_TRUE(std::holds_alternative<SingleVariableSolution>(inferred));
  EXPECT_NEAR(std::get<SingleVariableSolution>(inferred).scale, 1.0, 1e-8);
}

TEST(Generator, ReproducesExample2) {
  const GeneratedProblem g = construct_from_generator(ScalarExpr::parse("2*x1/(1+x1^2)", 3), 0, 1.0);
  for (double x : {-2.0, -0.3, 0.0, 1.1, 2.0}) {
    const std::vector<double> p{x, 0.4, 0.4};
    const std::vector<double> v = g.tensor.values(p);
    EXPECT_NEAR(v[0], 4 * x * x - 2, 1e-8);
    EXPECT_NEAR(v[1], -2 * x * x, 1e-8);
    EXPECT_NEAR(g.u.value(p), 1 / (1 + x * x), 1e-9);
  }
  EXPECT_THROW(construct_from_generator(ScalarExpr::parse("0*x1", 3), 0, 1.0), DegenerateTensor);
}

TEST(Generator, Completeness) {
  EXPECT_EQ(completeness_flag(ScalarExpr::parse("2*x1", 3), 0, -3, 3, 0.0, true), Completeness::Complete);
  EXPECT_EQ(completeness_flag(ScalarExpr::parse("sinh(x1)", 3), 0, -3, 3, 0.0, true), Completeness::Complete);
  EXPECT_EQ(completeness_flag(ScalarExpr::parse("2*x1", 3), 0, -3, 3, 0.0, false), Completeness::Inconclusive);
  EXPECT_EQ(completeness_flag(ScalarExpr::parse("-2*x1", 3), 0, -3, 3, 1.0, true), Completeness::Inconclusive);
}

TEST(Background, RequiredTensorAndLift) {
  const Field F = fx("x3");
  const Field phi = fx("exp(-x3^2)");
  const ConformalMetric m(F, phi);
  for (double x : {0.5, 1.0, 1.7}) {
    const std::vector<double> p{0, 0, x};
    const RequiredTensor r = required_diagonal_tensor(m, p);
    const double e = std::exp(2 * x * x);
    EXPECT_NEAR(r.t[0], -std::pow(2 * x * x - 1, 2) * e / (2 * x * x), 1e-9 * (1 + std::abs(r.t[0])));
    EXPECT_NEAR(r.t[2], (4 * std::pow(x, 4) - 8 * x * x - 1) * e / (2 * x * x), 1e-9 * (1 + std::abs(r.t[2])));
    EXPECT_LE(r.residual, 1e-8);
  }
  const DiagonalTensorField t({fx("-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)"), fx("-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)"),
                               fx("(4*x3^4-8*x3^2-1)*exp(2*x3^2)/(2*x3^2)")});
  const Grid grid({0, 0, 1.25}, 0.75, 9, {false, false, true});
  const LiftResult lift = lift_to_background(F, PrescribedProblem{t, {0, 0, 1.25}, grid, {}});
  ASSERT_TRUE(lift.phi_rel.has_value());
  for (double x : grid.axis_values(2)) {
    const std::vector<double> p{0, 0, x};
    EXPECT_NEAR(lift.phi_rel->value(p), phi.value(p), 1e-6);
  }
  const PairingComparison pc = compare_pairings(t, m, grid);
  EXPECT_LE(pc.background_deviation, 1e-8);
  EXPECT_GT(pc.euclidean_deviation, 0.1);
}

TEST(Verify, AcceptsTrueFactorRejectsWrongOne) {
  const Grid grid = line_grid();
  const VerifyReport ok = verify(example3(), Field::constant(1, 3), fx("exp(-x1^2)"), grid, {});
  EXPECT_EQ(ok.band, Band::Accept);
  for (const ResidualStat& s : ok.residuals) EXPECT_LE(s.max, 1e-10) << s.family;
  const VerifyReport bad = verify(example3(), Field::constant(1, 3), fx("exp(-x1^2/2)"), grid, {});
  EXPECT_EQ(bad.band, Band::Reject);
}
