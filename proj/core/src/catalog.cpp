#include <cmath>

#include "confcurv/scenarios.hpp"

namespace confcurv {

namespace {

Scenario base_scenario(Task task) {
  Scenario s;
  s.n = 3;
  s.task = task;
  return s;
}

TensorSpec single(std::string f, std::string f_k, int axis) {
  TensorSpec t;
  t.form = TensorSpec::Form::SingleVariable;
  t.f = std::move(f);
  t.f_k = std::move(f_k);
  t.axis = axis;
  return t;
}

TensorSpec listed(std::vector<std::string> comps) {
  TensorSpec t;
  t.form = TensorSpec::Form::List;
  t.components = std::move(comps);
  return t;
}

TensorSpec quadratic(double a, std::vector<double> b, double c) {
  TensorSpec t;
  t.form = TensorSpec::Form::Quadratic;
  t.a = a;
  t.b = std::move(b);
  t.c = c;
  return t;
}

CatalogEntry single_variable_entry(std::string id, std::string source, std::string summary, std::string f,
                                   std::string f_k, std::string phi, double scale) {
  CatalogEntry e;
  e.id = std::move(id);
  e.source = std::move(source);
  e.summary = std::move(summary);
  e.scenario = base_scenario(Task::Solve);
  e.scenario.tensor = single(std::move(f), std::move(f_k), 0);
  e.scenario.phi = std::move(phi);
  e.scenario.grid.axes = std::vector<int>{0};
  e.expected_verdict = Verdict::Solution;
  e.expected_C = scale;
  return e;
}

std::vector<CatalogEntry> build() {
  std::vector<CatalogEntry> out;

  {
    CatalogEntry e = single_variable_entry(
        "corollary45-ex1", "Example 2(1)", "single-variable tensor with u = exp(-cosh x1)",
        "-sinh(x1)^2/2*exp(2*cosh(x1))", "(sinh(x1)^2-2*cosh(x1))/2*exp(2*cosh(x1))", "exp(-cosh(x1))",
        std::exp(-1.0));
    e.displayed = {
        {"scalar", "-2*exp(-cosh(x1))*(2*cosh(x1)^2+sinh(x1)^2)", false, "-(2*sinh(x1)^2+4*cosh(x1))*exp(-2*cosh(x1))"},
        {"ric_11", "-2*cosh(x1)", true, std::nullopt},
        {"ric_22", "-(cosh(x1)+sinh(x1)^2)", true, std::nullopt},
        {"K_23", "-sinh(x1)^2*exp(-2*cosh(x1))", true, std::nullopt},
        {"K_12", "-cosh(x1)*exp(-2*cosh(x1))", true, std::nullopt},
    };
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e = single_variable_entry("corollary45-ex2", "Example 2(2)",
                                           "single-variable tensor with u = 1/(1+x1^2)", "-2*x1^2", "4*x1^2-2",
                                           "1/(1+x1^2)", 1.0);
    e.displayed = {
        {"scalar", "-8/(1+x1^2)^2", false, "-8/(1+x1^2)^4"},
        {"ric_11", "4*(x1^2-1)/(1+x1^2)^2", true, std::nullopt},
        {"ric_22", "(-2*x1^2-2)/(1+x1^2)^2", true, std::nullopt},
        {"K_23", "-4*x1^2/(1+x1^2)^4", true, std::nullopt},
        {"K_12", "-2*(1-x1^2)/(1+x1^2)^4", true, std::nullopt},
    };
    e.point_values = {
        {"scalar", {0.0, 0.0, 0.0}, -8.0, 1e-9},
        {"K_23", {1.0, 0.0, 0.0}, -0.25, 1e-9},
    };
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e = single_variable_entry(
        "corollary45-ex3", "Example 2(3)", "single-variable tensor with u = exp(-x1^2)", "-2*x1^2*exp(2*x1^2)",
        "2*(x1^2-1)*exp(2*x1^2)", "exp(-x1^2)", 1.0);
    e.displayed = {
        {"scalar", "-8*exp(-2*x1^2)*(1+x1^2)", true, std::nullopt},
        {"ric_11", "-4", true, std::nullopt},
        {"ric_22", "-2*(1-2*x1^2)", false, "-2-4*x1^2"},
        {"K_23", "-4*x1^2*exp(-2*x1^2)", true, std::nullopt},
        {"K_12", "-2*exp(-2*x1^2)", true, std::nullopt},
    };
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "hyperbolic-ex1";
    e.source = "Example 1";
    e.summary = "upper half-space background delta/x3^2 with phi = exp(-x3^2)";
    e.scenario = base_scenario(Task::Solve);
    e.scenario.background = "x3";
    e.scenario.phi = "exp(-x3^2)";
    e.scenario.tensor = listed({"-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)", "-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)",
                                "(4*x3^4-8*x3^2-1)*exp(2*x3^2)/(2*x3^2)"});
    e.scenario.grid.center = std::vector<double>{0.0, 0.0, 1.25};
    e.scenario.grid.half_width = 0.75;
    e.scenario.grid.axes = std::vector<int>{2};
    e.displayed = {
        {"scalar", "2*exp(-2*x3^2)*(-4*x3^4-3)", true, std::nullopt},
        {"ric_11", "(-4*x3^4+2*x3^2-2)/x3^2", true, std::nullopt},
        {"ric_33", "2*(4*x3^4-4*x3^2-1)/x3^2", false, "-4-2/x3^2"},
        {"K_12", "-(1-2*x3^2)^2*exp(-2*x3^2)", true, std::nullopt},
        {"K_13", "2*x3^2*(2*x3^2-3)*exp(-2*x3^2)", false, "-(2*x3^2+1)*exp(-2*x3^2)"},
    };
    e.displayed_tensor = std::vector<std::string>{"-(2*x3^2-1)^2/(2*x3^4)*exp(2*x3^2)",
                                                  "-(2*x3^2-1)^2/(2*x3^4)*exp(2*x3^2)",
                                                  "(4*x3^4-8*x3^2-1)/(2*x3^4)*exp(2*x3^2)"};
    e.displayed_tensor_background_agrees = false;
    e.displayed_tensor_euclidean_agrees = true;
    e.expected_verdict = Verdict::Solution;
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "quadratic-global";
    e.source = "constructed";
    e.summary = "u = |x|^2 + 1, a global solution (round sphere metric)";
    e.scenario = base_scenario(Task::Classify);
    e.scenario.tensor = quadratic(1.0, {0.0, 0.0, 0.0}, 1.0);
    e.scenario.phi = "x1^2+x2^2+x3^2+1";
    e.point_values = {{"K_12", {0.0, 0.0, 0.0}, 4.0, 1e-9}, {"K_12", {1.0, -0.5, 2.0}, 4.0, 1e-9}};
    e.expected_verdict = Verdict::Ok;
    e.expected_singular_set = SingularSet::Kind::Empty;
    e.expected_family = QuadraticFamily::make(1.0, {0.0, 0.0, 0.0}, 1.0);
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "quadratic-sphere";
    e.source = "constructed";
    e.summary = "u = |x|^2 - 1, singular on the unit sphere";
    e.scenario = base_scenario(Task::Classify);
    e.scenario.tensor = quadratic(1.0, {0.0, 0.0, 0.0}, -1.0);
    e.scenario.grid.half_width = 0.5;
    e.expected_verdict = Verdict::Ok;
    e.expected_singular_set = SingularSet::Kind::Sphere;
    e.expected_family = QuadraticFamily::make(-1.0, {0.0, 0.0, 0.0}, 1.0);
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e;
    e.id = "separable-exp";
    e.source = "constructed";
    e.summary = "f_i = exp(x_i), each component depending on its own coordinate only";
    e.scenario = base_scenario(Task::Solve);
    e.scenario.tensor = listed({"exp(x1)", "exp(x2)", "exp(x3)"});
    e.scenario.grid.half_width = 1.0;
    e.scenario.grid.points_per_axis = 5;
    e.expected_verdict = Verdict::Nonexistent;
    e.expected_witness = "separable_tensor";
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build();
  return entries;
}

const CatalogEntry* find_example(const std::string& id) {
  for (const CatalogEntry& e : catalog()) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

}  // namespace confcurv
