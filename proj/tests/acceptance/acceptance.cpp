#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "confcurv/curvature.hpp"
#include "confcurv/errors.hpp"
#include "confcurv/parallel.hpp"
#include "confcurv/prescribed.hpp"
#include "confcurv/scenarios.hpp"

using namespace confcurv;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Field fx(const std::string& text, int n = 3) { return Field(ScalarExpr::parse(text, n)); }

std::vector<double> random_point(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> p(static_cast<std::size_t>(n));
  for (double& v : p) v = d(rng);
  return p;
}

// 1. Kulkarni-Nomizu algebra
Outcome criterion1() {
  Outcome o;
  std::mt19937_64 rng(20261019);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  int symmetric_ok = 0;
  double min_norm = INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 3;
    SymBilinear a(n), b(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        a.set(i, j, d(rng));
        b.set(i, j, d(rng));
      }
    }
    symmetric_ok += validate_symmetries(kulkarni_nomizu(a, b), 0.0) ? 1 : 0;

    std::vector<double> t(static_cast<std::size_t>(n), 0.0);
    t[static_cast<std::size_t>(trial % n)] = d(rng);
    if (trial % 2 == 0) {
      for (double& v : t) v = d(rng);
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    for (double& v : g) v = 0.5 + std::abs(d(rng));
    min_norm = std::min(min_norm, tensor_max_norm(kulkarni_nomizu(SymBilinear::diagonal(t), SymBilinear::diagonal(g))));
  }
  o.require(symmetric_ok == 200, "symmetry checks at tolerance 0");
  o.require(min_norm > 0.0, "injectivity on nonzero diagonal T");
  o.note("200/200 pairs pass symmetries: " + std::string(symmetric_ok == 200 ? "yes" : "no") +
         ", min ||T o g|| = " + fmt(min_norm));
  return o;
}

// 2. Oracle equivalence
Outcome criterion2() {
  Outcome o;
  std::mt19937_64 rng(42);
  double worst_weyl = 0.0;
  double worst_trace = 0.0;
  for (int n = 3; n <= 5; ++n) {
    std::string r2 = "x1^2";
    for (int i = 2; i <= n; ++i) r2 += "+x" + std::to_string(i) + "^2";
    std::string sep = "3+x1";
    for (int i = 2; i <= n; ++i) sep += "+" + std::to_string(0.4 / i) + "*x" + std::to_string(i) + "^" + std::to_string(i);
    const std::string families[] = {"0.5*(" + r2 + ")+0.3*x1-0.2*x2+1.5", "1/(1+x1^2)", "exp(-x2^2)",
                                    "exp(-cosh(x1))", sep};
    for (const std::string& u : families) {
      const ConformalMetric m = ConformalMetric::euclidean(fx(u, n));
      for (int k = 0; k < 100; ++k) {
        const std::vector<double> p = random_point(rng, n, -1.0, 1.0);
        const CurvTensor oracle = riemann_oracle(m, p);
        const double weyl = tensor_max_norm(tensor_difference(riemann_decomp(m, p), oracle)) /
                            (1.0 + tensor_max_norm(oracle));
        const double scal = scalar_curv(m, p);
        const double tr = std::abs(ricci(m, p).trace(m.metric(p)) - scal) / (1.0 + std::abs(scal));
        worst_weyl = std::max(worst_weyl, weyl);
        worst_trace = std::max(worst_trace, tr);
      }
    }
  }
  o.require(worst_weyl <= 1e-10, "decomposition vs oracle");
  o.require(worst_trace <= 1e-10, "trace(Ric) vs scalar");
  o.note("1500 samples, max rel |decomp - oracle| = " + fmt(worst_weyl) + ", max rel trace gap = " + fmt(worst_trace));
  return o;
}

// 3. Quadratic sphere family
Outcome criterion3() {
  Outcome o;
  const std::vector<double> zero{0, 0, 0};
  const QuadraticConstruction q = construct_quadratic_family(1.0, zero, 1.0);
  o.require(q.family.lambda == -4.0, "lambda = -4");
  const ConformalMetric m = ConformalMetric::euclidean(Field(q.u));
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> p = random_point(rng, 3, -3.0, 3.0);
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) worst = std::max(worst, std::abs(sectional(m, p, i, j) - 4.0));
    }
  }
  o.require(worst <= 1e-9, "sectional curvature 4");
  const auto det = detect_quadratic_family(Field(q.f), Grid({0, 0, 0}, 1.0, 5));
  double round_trip = INFINITY;
  if (const auto* f = std::get_if<QuadraticFamily>(&det)) {
    round_trip = std::max(std::abs(f->a - 1.0), std::abs(f->c - 1.0));
    for (double b : f->b) round_trip = std::max(round_trip, std::abs(b));
    o.require(classify_singular_set(*f, 1e-10).kind == SingularSet::Kind::Empty, "classification Empty");
  }
  o.require(round_trip <= 1e-8, "detect round trip");
  const SingularSet s = classify_singular_set(QuadraticFamily::make(1.0, zero, -1.0));
  o.require(s.kind == SingularSet::Kind::Sphere && std::abs(s.radius - 1.0) <= 1e-12, "sphere radius 1");
  o.note("lambda = " + fmt(q.family.lambda) + ", max |K - 4| = " + fmt(worst) + ", round trip = " + fmt(round_trip) +
         ", (1,0,-1) -> " + to_string(s.kind) + " r = " + fmt(s.radius));
  return o;
}

struct SingleExample {
  const char* h;
  const char* u;
};
const SingleExample kExamples[] = {
    {"sinh(x1)", "exp(1-cosh(x1))"}, {"2*x1/(1+x1^2)", "1/(1+x1^2)"}, {"2*x1", "exp(-x1^2)"}};

Grid line_grid() { return Grid({0, 0, 0}, 2.0, 9, {true, false, false}); }

// 4. Single-variable example regression
Outcome criterion4() {
  Outcome o;
  double worst_verify = 0.0;
  double worst_u = 0.0;
  const Grid grid = line_grid();
  for (const SingleExample& e : kExamples) {
    const GeneratedProblem g = construct_from_generator(ScalarExpr::parse(e.h, 3), 0, 1.0);
    const VerifyReport vr = verify(g.tensor, Field::constant(1.0, 3), fx(e.u), grid, Tolerances{});
    for (const ResidualStat& s : vr.residuals) worst_verify = std::max(worst_verify, s.max);
    const SolveReport sr = solve(PrescribedProblem{g.tensor, {0, 0, 0}, grid, Tolerances{}});
    if (const auto* sol = std::get_if<Solution>(&sr.outcome)) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::vector<double> p = grid.point(i);
        worst_u = std::max(worst_u, std::abs(sol->phi_at(p) - fx(e.u).value(p)));
      }
    } else {
      o.require(false, std::string("solve of h = ") + e.h);
    }
  }
  o.require(worst_verify <= 1e-10, "verify residual");
  o.require(worst_u <= 1e-6, "reconstructed u");
  const ConformalMetric m2 = ConformalMetric::euclidean(fx("1/(1+x1^2)"));
  const double scal = scalar_curv(m2, std::vector<double>{0, 0, 0});
  const double k23 = sectional(m2, std::vector<double>{1, 0, 0}, 1, 2);
  o.require(std::abs(scal + 8.0) <= 1e-9, "scalar curvature -8 at x1 = 0");
  o.require(std::abs(k23 + 0.25) <= 1e-9, "K(d2,d3) = -0.25 at x1 = 1");
  o.note("max verify residual = " + fmt(worst_verify) + ", max |u - closed form| = " + fmt(worst_u) +
         ", scalar(0) = " + fmt(scal) + ", K23(1) = " + fmt(k23));
  return o;
}

// 5. Nonexistence
Outcome criterion5() {
  Outcome o;
  const Grid grid({0, 0, 0}, 1.0, 5);
  const DiagonalTensorField separable({fx("exp(x1)"), fx("exp(x2)"), fx("exp(x3)")});
  const DiagonalTensorField constant({Field::constant(1, 3), Field::constant(1, 3), Field::constant(1, 3)});
  for (const DiagonalTensorField* t : {&separable, &constant}) {
    const SolveReport r = solve(PrescribedProblem{*t, {0, 0, 0}, grid, Tolerances{}});
    const auto* none = std::get_if<NonExistence>(&r.outcome);
    o.require(none != nullptr && none->witness == "separable_tensor", "separable witness");
  }
  const DiagonalTensorField perturbed({fx("2*(x1^2-1)*exp(2*x1^2)"), fx("-2*x1^2*exp(2*x1^2)*(1+0.1*x2^2)"),
                                       fx("-2*x1^2*exp(2*x1^2)*(1+0.1*x2^2)")});
  const SolveReport r = solve(PrescribedProblem{perturbed, {0, 0, 0}, grid, Tolerances{}});
  const auto* none = std::get_if<NonExistence>(&r.outcome);
  const bool family = none != nullptr && none->witness.rfind("compatibility_family_", 0) == 0;
  o.require(family && none->magnitude >= 1e-3, "perturbed example rejected by a compatibility family");
  o.note(std::string("exp(x_i), diag(1,1,1) -> separable_tensor; perturbed -> ") +
         (none ? none->witness + " magnitude " + fmt(none->magnitude) : "no witness"));
  return o;
}

double path_gap(const Solution& s, const Grid& grid) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::vector<double> p = grid.point(i);
    worst = std::max(worst, std::abs(std::log(s.phi_at(p, SweepOrder::Forward) / s.phi_at(p, SweepOrder::Reversed))));
  }
  return worst;
}

// 6. Scale and path properties
Outcome criterion6() {
  Outcome o;
  double worst_scale = 0.0;
  double worst_path = 0.0;
  int passing = 0;
  const Grid grid = line_grid();
  for (const SingleExample& e : kExamples) {
    const GeneratedProblem g = construct_from_generator(ScalarExpr::parse(e.h, 3), 0, 1.0);
    const auto c1 = determine_scale(g.tensor, std::vector<double>{0, 0, 0});
    const auto c4 = determine_scale(g.tensor.scaled(0.25), std::vector<double>{0, 0, 0});
    if (std::holds_alternative<double>(c1) && std::holds_alternative<double>(c4)) {
      worst_scale = std::max(worst_scale, std::abs(std::get<double>(c4) - 2.0 * std::get<double>(c1)));
    } else {
      o.require(false, "scale determined");
    }
  }
  // every passing scenario: the three examples, a 3-D quadratic factor and the hyperbolic lift
  std::vector<PrescribedProblem> problems;
  for (const SingleExample& e : kExamples) {
    problems.push_back({construct_from_generator(ScalarExpr::parse(e.h, 3), 0, 1.0).tensor, {0, 0, 0}, grid, {}});
  }
  const QuadraticConstruction q = construct_quadratic_family(0.5, std::vector<double>{0.3, -0.2, 0.1}, 1.0);
  problems.push_back({DiagonalTensorField::isotropic(Field(q.f)), {0, 0, 0}, Grid({0, 0, 0}, 1.0, 5), {}});
  for (const PrescribedProblem& p : problems) {
    const SolveReport r = solve(p);
    if (const auto* s = std::get_if<Solution>(&r.outcome)) {
      ++passing;
      worst_path = std::max(worst_path, path_gap(*s, p.grid));
    }
  }
  const DiagonalTensorField hyp({fx("-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)"), fx("-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)"),
                                 fx("(4*x3^4-8*x3^2-1)*exp(2*x3^2)/(2*x3^2)")});
  const Grid hgrid({0, 0, 1.25}, 0.75, 9, {false, false, true});
  const LiftResult lift = lift_to_background(fx("x3"), PrescribedProblem{hyp, {0, 0, 1.25}, hgrid, {}});
  if (const auto* s = std::get_if<Solution>(&lift.report.outcome)) {
    ++passing;
    worst_path = std::max(worst_path, path_gap(*s, hgrid));
  }
  o.require(passing == 5, "all scenarios solved");
  o.require(worst_scale <= 1e-8, "quarter tensor doubles C");
  o.require(worst_path <= 1e-8, "forward vs reversed sweep");
  o.note("max |C(T/4) - 2C(T)| = " + fmt(worst_scale) + ", " + std::to_string(passing) +
         " scenarios, max |ln fwd - ln rev| = " + fmt(worst_path));
  return o;
}

// 7. Hyperbolic background round trip
Outcome criterion7() {
  Outcome o;
  const Field F = fx("x3");
  const Field phi = fx("exp(-x3^2)");
  const ConformalMetric m(F, phi);
  const Grid grid({0, 0, 1.25}, 0.75, 9, {false, false, true});
  double worst_rel = 0.0;
  std::vector<Field> comps;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::vector<double> p = grid.point(i);
    const RequiredTensor r = required_diagonal_tensor(m, p);
    worst_rel = std::max(worst_rel, r.residual / (1.0 + tensor_max_norm(riemann_oracle(m, p))));
  }
  const DiagonalTensorField t({fx("-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)"), fx("-(2*x3^2-1)^2*exp(2*x3^2)/(2*x3^2)"),
                               fx("(4*x3^4-8*x3^2-1)*exp(2*x3^2)/(2*x3^2)")});
  const PairingComparison pc = compare_pairings(t, m, grid);
  const LiftResult lift = lift_to_background(F, PrescribedProblem{t, {0, 0, 1.25}, grid, {}});
  double worst_phi = INFINITY;
  if (lift.phi_rel) {
    worst_phi = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::vector<double> p = grid.point(i);
      worst_phi = std::max(worst_phi, std::abs(lift.phi_rel->value(p) - phi.value(p)));
    }
  }
  Scenario s = find_example("hyperbolic-ex1")->scenario;
  s.task = Task::Example;
  s.example_id = "hyperbolic-ex1";
  const Report rep = run(s);
  bool flagged_bg = false;
  bool flagged_eu = false;
  for (const Discrepancy& d : rep.discrepancies) {
    if (d.quantity.find("background") != std::string::npos) flagged_bg = !d.agrees;
    if (d.quantity.find("euclidean") != std::string::npos) flagged_eu = d.agrees;
  }
  o.require(worst_rel <= 1e-8, "required T satisfies R = T o g_hyp");
  o.require(pc.background_deviation <= 1e-8, "required T matches the closed form");
  o.require(worst_phi <= 1e-6, "lift recovers phi_rel");
  o.require(flagged_bg && flagged_eu, "displayed T pairing flagged");
  o.require(rep.verdict == Verdict::Solution, "catalog example runs without drift");
  o.note("max |R - T o g|/(1+|R|) = " + fmt(worst_rel) + ", closed-form T deviation = " +
         fmt(pc.background_deviation) + ", max |phi_rel - exp(-x3^2)| = " + fmt(worst_phi) +
         ", displayed T: background pairing " + (flagged_bg ? "differs" : "agrees") + ", euclidean pairing " +
         (flagged_eu ? "agrees" : "differs"));
  return o;
}

// 8. Infrastructure
Outcome criterion8(const std::string& corpus_path) {
  Outcome o;
  std::ifstream in(corpus_path);
  std::vector<std::string> corpus;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) corpus.push_back(line);
  }
  o.require(corpus.size() == 50, "50-expression corpus present");
  int round_trips = 0;
  double worst_fd = 0.0;
  const std::vector<double> p{0.3, -0.7, 1.1};
  for (const std::string& text : corpus) {
    try {
      const ScalarExpr e = ScalarExpr::parse(text, 3);
      const ScalarExpr back = ScalarExpr::parse(e.to_canonical_text(), 3);
      round_trips += e.structurally_equal(back) && back.to_canonical_text() == e.to_canonical_text() ? 1 : 0;
      worst_fd = std::max(worst_fd, finite_diff_check(e, p));
    } catch (const Error& err) {
      o.require(false, "corpus entry '" + text + "': " + err.what());
    }
  }
  o.require(round_trips == static_cast<int>(corpus.size()), "parser round trip");
  o.require(worst_fd <= 1e-6, "jet vs finite differences");

  bool identical = true;
  int reports = 0;
  for (const CatalogEntry& e : catalog()) {
    Scenario s = e.scenario;
    s.task = Task::Example;
    s.example_id = e.id;
    std::string first;
    for (unsigned threads : {1u, 2u, 4u, 1u}) {
      set_thread_count(threads);
      const std::string json = to_json(run(s));
      if (first.empty()) first = json;
      identical = identical && json == first;
      ++reports;
    }
  }
  set_thread_count(0);
  o.require(identical, "byte-identical JSON");
  o.note(std::to_string(round_trips) + "/" + std::to_string(corpus.size()) + " round trips, max fd gap = " +
         fmt(worst_fd) + ", " + std::to_string(reports) + " reports byte-identical across 1/2/4 threads: " +
         (identical ? "yes" : "no"));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string corpus = argc > 1 ? argv[1] : "tests/data/expression_corpus.txt";
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"Kulkarni-Nomizu algebra", criterion1},
      {"oracle equivalence", criterion2},
      {"quadratic sphere family", criterion3},
      {"single-variable example regression", criterion4},
      {"nonexistence", criterion5},
      {"scale and path properties", criterion6},
      {"hyperbolic background round trip", criterion7},
      {"infrastructure", [&] { return criterion8(corpus); }},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d [%s] %s: %s\n", index++, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
