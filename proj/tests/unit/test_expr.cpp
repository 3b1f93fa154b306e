#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "confcurv/errors.hpp"
#include "confcurv/expr.hpp"

using confcurv::DomainError;
using confcurv::ParseError;
using confcurv::ScalarExpr;

namespace {

double at(const char* text, std::vector<double> p) {
  return ScalarExpr::parse(text, static_cast<int>(p.size())).eval(p);
}

}  // namespace

TEST(ExprParse, Precedence) {
  EXPECT_DOUBLE_EQ(at("1+2*3", {0, 0, 0}), 7.0);
  EXPECT_DOUBLE_EQ(at("(1+2)*3", {0, 0, 0}), 9.0);
  EXPECT_DOUBLE_EQ(at("8/4/2", {0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(at("2^3^2", {0, 0, 0}), 512.0);
  EXPECT_DOUBLE_EQ(at("-2^2", {0, 0, 0}), -4.0);
  EXPECT_DOUBLE_EQ(at("2^-1", {0, 0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(at("1 - -1", {0, 0, 0}), 2.0);
}

TEST(ExprParse, VariablesAndFunctions) {
  EXPECT_DOUBLE_EQ(at("x1*x2+x3", {1, 2, 3}), 5.0);
  EXPECT_NEAR(at("exp(x1)*cosh(x2)-sinh(x3)", {0.5, 0.25, -1}),
              std::exp(0.5) * std::cosh(0.25) - std::sinh(-1.0), 1e-15);
  EXPECT_NEAR(at("sqrt(abs(x1))+log(x2)+tanh(x3)", {-4, 2, 0.3}), 2.0 + std::log(2.0) + std::tanh(0.3), 1e-15);
  EXPECT_NEAR(at("sin(x1)^2+cos(x1)^2", {0.7, 0, 0}), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(at("1.5e2 + .5", {0, 0, 0}), 150.5);
  EXPECT_DOUBLE_EQ(at("x10", {0, 0, 0, 0, 0, 0, 0, 0, 0, 7}), 7.0);
}

TEST(ExprParse, ErrorsCarryOffsets) {
  try {
    ScalarExpr::parse("1+", 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  try {
    ScalarExpr::parse("x1 * x4", 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
  EXPECT_THROW(ScalarExpr::parse("x0", 3), ParseError);
  EXPECT_THROW(ScalarExpr::parse("foo(x1)", 3), ParseError);
  EXPECT_THROW(ScalarExpr::parse("(x1", 3), ParseError);
  EXPECT_THROW(ScalarExpr::parse("2 x1", 3), ParseError);
  EXPECT_THROW(ScalarExpr::parse("", 3), ParseError);
}

TEST(ExprEval, DomainErrors) {
  EXPECT_THROW(at("log(x1)", {-1, 0, 0}), DomainError);
  EXPECT_THROW(at("1/x1", {0, 0, 0}), DomainError);
  EXPECT_THROW(at("sqrt(x1)", {-1, 0, 0}), DomainError);
  EXPECT_THROW(at("x1^0.5", {-2, 0, 0}), DomainError);
  EXPECT_DOUBLE_EQ(at("x1^3", {-2, 0, 0}), -8.0);
}

TEST(ExprCanonical, RoundTrip) {
  const char* corpus[] = {"-(2*x3^2-1)^2/(2*x3^4)*exp(2*x3^2)", "x1^2+x2^2+x3^2+1", "-sinh(x1)^2/2*exp(2*cosh(x1))",
                          "1/(1+x1^2)", "2^3^2", "-x1^-2", "abs(x1-x2)*sqrt(1+x3^2)"};
  for (const char* text : corpus) {
    const ScalarExpr e = ScalarExpr::parse(text, 3);
    const ScalarExpr back = ScalarExpr::parse(e.to_canonical_text(), 3);
    EXPECT_TRUE(e.structurally_equal(back)) << text;
    EXPECT_EQ(back.to_canonical_text(), e.to_canonical_text());
  }
}

TEST(ExprStructure, FreeVariablesAndConstness) {
  const ScalarExpr e = ScalarExpr::parse("x1*exp(x3)", 4);
  EXPECT_EQ(e.free_variables(), (std::vector<bool>{true, false, true, false}));
  EXPECT_FALSE(e.is_constant());
  EXPECT_TRUE(ScalarExpr::parse("2*exp(1)", 3).is_constant());
  EXPECT_FALSE(ScalarExpr::parse("1+x1", 3).structurally_equal(ScalarExpr::parse("x1+1", 3)));
}

TEST(ExprBuild, OperatorsMatchParsedText) {
  const ScalarExpr x = ScalarExpr::variable(0, 3);
  const ScalarExpr one = ScalarExpr::constant(1.0, 3);
  const ScalarExpr built = one / (one + pow(x, ScalarExpr::constant(2.0, 3)));
  EXPECT_TRUE(built.structurally_equal(ScalarExpr::parse("1/(1+x1^2)", 3)));
  const std::vector<double> p{2, 0, 0};
  EXPECT_DOUBLE_EQ(built.eval(p), 0.2);
}
