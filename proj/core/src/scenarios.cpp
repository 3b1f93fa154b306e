#include "confcurv/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "confcurv/errors.hpp"
#include "confcurv/parallel.hpp"

namespace confcurv {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// --- strict reading helpers ---------------------------------------------------

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw SchemaError(path + "/" + item.key(), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw SchemaError(path + "/" + key, "required key is missing");
  return obj.at(key);
}

const json& as_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  return j;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

double as_positive(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v > 0.0)) throw SchemaError(path, "expected a positive number");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < -1000000 || v > 1000000) throw SchemaError(path, "integer out of range");
  return static_cast<int>(v);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_numbers(const json& j, const std::string& path, int length) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
  if (length >= 0 && j.size() != idx(length)) {
    throw SchemaError(path, "expected " + std::to_string(length) + " entries, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "/" + std::to_string(i)));
  return out;
}

ScalarExpr as_expression(const json& j, const std::string& path, int n) {
  const std::string text = as_string(j, path);
  try {
    return ScalarExpr::parse(text, n);
  } catch (const ParseError& e) {
    throw SchemaError(path, e.what());
  }
}

/// 1-based axis in a file, 0-based in memory.
int as_axis(const json& j, const std::string& path, int n) {
  const int k = as_int(j, path);
  if (k < 1 || k > n) throw SchemaError(path, "axis must lie in 1.." + std::to_string(n));
  return k - 1;
}

void require_single_axis(const ScalarExpr& e, int k, const std::string& path) {
  const std::vector<bool> vars = e.free_variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j] && static_cast<int>(j) != k) {
      throw SchemaError(path, "may depend on x" + std::to_string(k + 1) + " only");
    }
  }
}

TensorSpec read_tensor(const json& j, int n) {
  const std::string path = "/tensor";
  TensorSpec t;
  if (j.is_array()) {
    if (j.size() != idx(n)) throw SchemaError(path, "expected " + std::to_string(n) + " component expressions");
    t.form = TensorSpec::Form::List;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string p = path + "/" + std::to_string(i);
      as_expression(j[i], p, n);
      t.components.push_back(j[i].get<std::string>());
    }
    return t;
  }
  as_object(j, path);
  const bool single = j.contains("f") || j.contains("f_k");
  const bool generator = j.contains("h") || j.contains("C");
  const bool quadratic = j.contains("a") || j.contains("b") || j.contains("c");
  if (static_cast<int>(single) + static_cast<int>(generator) + static_cast<int>(quadratic) != 1) {
    throw SchemaError(path, "expected exactly one of {f, f_k, k}, {h, k, C} or {a, b, c}");
  }
  if (single) {
    allow_keys(j, path, {"f", "f_k", "k"});
    t.form = TensorSpec::Form::SingleVariable;
    t.axis = as_axis(require(j, path, "k"), path + "/k", n);
    require_single_axis(as_expression(require(j, path, "f"), path + "/f", n), t.axis, path + "/f");
    require_single_axis(as_expression(require(j, path, "f_k"), path + "/f_k", n), t.axis, path + "/f_k");
    t.f = j.at("f").get<std::string>();
    t.f_k = j.at("f_k").get<std::string>();
  } else if (generator) {
    allow_keys(j, path, {"h", "k", "C"});
    t.form = TensorSpec::Form::Generator;
    t.axis = as_axis(require(j, path, "k"), path + "/k", n);
    require_single_axis(as_expression(require(j, path, "h"), path + "/h", n), t.axis, path + "/h");
    t.h = j.at("h").get<std::string>();
    t.scale = as_positive(require(j, path, "C"), path + "/C");
  } else {
    allow_keys(j, path, {"a", "b", "c"});
    t.form = TensorSpec::Form::Quadratic;
    t.a = as_number(require(j, path, "a"), path + "/a");
    t.b = as_numbers(require(j, path, "b"), path + "/b", n);
    t.c = as_number(require(j, path, "c"), path + "/c");
  }
  return t;
}

void read_grid(const json& j, int n, GridSpec& g) {
  const std::string path = "/grid";
  as_object(j, path);
  allow_keys(j, path, {"center", "half_width", "points_per_axis", "axes"});
  if (j.contains("center")) g.center = as_numbers(j.at("center"), path + "/center", n);
  if (j.contains("half_width")) g.half_width = as_positive(j.at("half_width"), path + "/half_width");
  if (j.contains("points_per_axis")) {
    const int p = as_int(j.at("points_per_axis"), path + "/points_per_axis");
    if (p < 3 || p % 2 == 0) throw SchemaError(path + "/points_per_axis", "expected an odd integer >= 3");
    g.points_per_axis = p;
  }
  if (j.contains("axes")) {
    const json& a = j.at("axes");
    if (!a.is_array() || a.empty()) throw SchemaError(path + "/axes", "expected a non-empty array of axes");
    std::set<int> seen;
    std::vector<int> axes;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const int k = as_axis(a[i], path + "/axes/" + std::to_string(i), n);
      if (!seen.insert(k).second) throw SchemaError(path + "/axes/" + std::to_string(i), "duplicate axis");
      axes.push_back(k);
    }
    std::sort(axes.begin(), axes.end());
    g.axes = axes;
  }
}

void read_tolerances(const json& j, Tolerances& tol) {
  const std::string path = "/tolerances";
  as_object(j, path);
  allow_keys(j, path, {"accept", "reject", "quadrature"});
  if (j.contains("accept")) tol.accept = as_positive(j.at("accept"), path + "/accept");
  if (j.contains("reject")) tol.reject = as_positive(j.at("reject"), path + "/reject");
  if (j.contains("quadrature")) tol.quadrature = as_positive(j.at("quadrature"), path + "/quadrature");
  if (!(tol.accept < tol.reject)) throw SchemaError(path, "accept must be smaller than reject");
}

void check_task_fields(const Scenario& s) {
  const bool needs_tensor = s.task == Task::Verify || s.task == Task::Solve || s.task == Task::Classify;
  const bool needs_phi = s.task == Task::Verify || s.task == Task::Curvature;
  if (needs_tensor && !s.tensor) throw SchemaError("/tensor", std::string("required for task ") + to_string(s.task));
  if (needs_phi && !s.phi) throw SchemaError("/phi", std::string("required for task ") + to_string(s.task));
  if (s.task == Task::Example && !s.example_id) throw SchemaError("/example_id", "required for task example");
}

// --- evaluation helpers -------------------------------------------------------

Field parse_field(const std::string& text, int n) { return Field(ScalarExpr::parse(text, n)); }

bool is_unit(const std::string& text, int n) {
  const ScalarExpr e = ScalarExpr::parse(text, n);
  return e.is_constant() && e.eval(std::vector<double>(idx(n), 0.0)) == 1.0;
}

struct BuiltTensor {
  DiagonalTensorField tensor;
  std::optional<Field> factor;
  std::optional<QuadraticFamily> family;
};

BuiltTensor build_tensor(const TensorSpec& t, int n, double quad_tol) {
  switch (t.form) {
    case TensorSpec::Form::List: {
      std::vector<Field> comps;
      for (const std::string& c : t.components) comps.push_back(parse_field(c, n));
      return {DiagonalTensorField(std::move(comps)), std::nullopt, std::nullopt};
    }
    case TensorSpec::Form::SingleVariable:
      return {DiagonalTensorField::single_variable(parse_field(t.f, n), parse_field(t.f_k, n), t.axis), std::nullopt,
              std::nullopt};
    case TensorSpec::Form::Generator: {
      GeneratedProblem g = construct_from_generator(ScalarExpr::parse(t.h, n), t.axis, t.scale, quad_tol);
      return {std::move(g.tensor), std::move(g.u), std::nullopt};
    }
    case TensorSpec::Form::Quadratic: {
      const QuadraticConstruction q = construct_quadratic_family(t.a, t.b, t.c);
      return {DiagonalTensorField::isotropic(Field(q.f)), Field(q.u), q.family};
    }
  }
  throw std::logic_error("unknown tensor form");
}

double relative_gap(double a, double b) {
  const double den = std::max(std::abs(a), std::abs(b));
  if (den == 0.0) return 0.0;
  if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
  return std::abs(a - b) / den;
}

ResidualStat stat_over(const std::string& name, const std::vector<double>& v, const Grid& grid) {
  ResidualStat s;
  s.family = name;
  s.samples = v.size();
  std::size_t arg = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = std::isnan(v[i]) ? std::numeric_limits<double>::infinity() : std::abs(v[i]);
    sum += x;
    if (x > s.max) {
      s.max = x;
      arg = i;
    }
  }
  s.mean = v.empty() ? 0.0 : sum / static_cast<double>(v.size());
  if (!v.empty()) s.argmax = grid.point(arg);
  return s;
}

Verdict band_verdict(Band b, Verdict on_accept, Verdict on_reject) {
  switch (b) {
    case Band::Accept:
      return on_accept;
    case Band::Reject:
      return on_reject;
    case Band::Indeterminate:
      return Verdict::Indeterminate;
  }
  return Verdict::Error;
}

const ResidualStat* worst_stat(const std::vector<ResidualStat>& stats) {
  const ResidualStat* w = nullptr;
  for (const ResidualStat& s : stats) {
    if (w == nullptr || s.max > w->max) w = &s;
  }
  return w;
}

// --- tasks ----------------------------------------------------------------------

void run_verify(const Scenario& s, Report& r) {
  const BuiltTensor b = build_tensor(*s.tensor, s.n, s.tol.quadrature);
  const VerifyReport vr =
      verify(b.tensor, parse_field(s.background, s.n), parse_field(*s.phi, s.n), s.make_grid(), s.tol);
  r.residuals = vr.residuals;
  r.notes.insert(r.notes.end(), vr.notes.begin(), vr.notes.end());
  r.verdict = band_verdict(vr.band, Verdict::Ok, Verdict::Mismatch);
  if (vr.band != Band::Accept) {
    const ResidualStat* w = worst_stat(vr.residuals);
    r.witness = Witness{w->family, "largest residual over the grid", w->argmax, w->max};
  }
}

void run_solve(const Scenario& s, Report& r) {
  const int n = s.n;
  const BuiltTensor b = build_tensor(*s.tensor, n, s.tol.quadrature);
  const Grid grid = s.make_grid();
  const PrescribedProblem problem{b.tensor, s.base(), grid, s.tol};
  const Field background = parse_field(s.background, n);

  SolveReport sr{NonExistence{}, {}, {}};
  if (is_unit(s.background, n)) {
    sr = solve(problem);
  } else {
    LiftResult lift = lift_to_background(background, problem);
    sr = std::move(lift.report);
    r.notes.push_back("solved through the euclidean problem with f_i / F^2, F = " + background.describe());
  }
  r.residuals = sr.residuals;
  r.notes.insert(r.notes.end(), sr.notes.begin(), sr.notes.end());

  if (const auto* none = std::get_if<NonExistence>(&sr.outcome)) {
    r.verdict = Verdict::Nonexistent;
    r.witness = Witness{none->witness, none->detail, none->location, none->magnitude};
    return;
  }
  if (const auto* ind = std::get_if<Indeterminate>(&sr.outcome)) {
    r.verdict = Verdict::Indeterminate;
    r.witness = Witness{ind->check, "residual between the accept and reject thresholds; refine the grid",
                        ind->location, ind->magnitude};
    return;
  }
  const Solution& sol = std::get<Solution>(sr.outcome);
  r.verdict = Verdict::Solution;
  r.recovered_C = sol.scale();

  const std::size_t count = grid.size();
  std::vector<double> path_gap(count, 0.0);
  std::vector<double> phi_gap(count, 0.0);
  std::optional<ConformalMetric> given;
  if (s.phi) given.emplace(background, parse_field(*s.phi, n));
  parallel_for(count, [&](std::size_t i) {
    const std::vector<double> p = grid.point(i);
    const double fwd = sol.phi_at(p, SweepOrder::Forward);
    const double rev = sol.phi_at(p, SweepOrder::Reversed);
    path_gap[i] = std::abs(std::log(fwd / rev));
    if (given) {
      const double rel = fwd / background.value(p);
      phi_gap[i] = relative_gap(rel, given->phi_rel().value(p));
    }
  });
  r.residuals.push_back(stat_over("path_independence", path_gap, grid));
  const Band path_band = classify_residual(r.residuals.back().max, s.tol);
  if (path_band != Band::Accept) {
    const ResidualStat& st = r.residuals.back();
    r.verdict = Verdict::Indeterminate;
    r.witness = Witness{st.family, "forward and reversed coordinate sweeps disagree", st.argmax, st.max};
  }
  if (given) {
    const ResidualStat st = stat_over("phi_match", phi_gap, grid);
    r.checks.push_back(Check{"phi_match", st.max, 0.0, 1e-6, st.max <= 1e-6});
  }
}

void run_classify(const Scenario& s, Report& r) {
  const int n = s.n;
  const BuiltTensor b = build_tensor(*s.tensor, n, s.tol.quadrature);
  const Field& f = b.tensor.component(0);
  if (!b.family) {
    for (const Field& g : b.tensor.components()) {
      if (!g.expr() || !f.expr() || !g.expr()->structurally_equal(*f.expr())) {
        throw DomainError("classify needs an isotropic tensor (all f_i equal)");
      }
    }
  }
  std::variant<QuadraticFamily, QuadraticMismatch> det = QuadraticMismatch{};
  try {
    det = detect_quadratic_family(f, s.make_grid(), s.tol.accept);
  } catch (const NegativeRadicand& e) {
    r.verdict = Verdict::Mismatch;
    r.witness = Witness{"negative_radicand", e.what(), s.make_grid().center(), 0.0};
    return;
  }
  if (const auto* miss = std::get_if<QuadraticMismatch>(&det)) {
    r.verdict = Verdict::Mismatch;
    r.witness = Witness{"quadratic_fit", miss->reason, miss->argmax, miss->max_deviation};
    return;
  }
  const QuadraticFamily fam = std::get<QuadraticFamily>(det);
  double scale = std::abs(fam.a) + std::abs(fam.c);
  for (double v : fam.b) scale = std::max(scale, std::abs(v));
  r.verdict = Verdict::Ok;
  r.family = fam;
  r.singular_set = classify_singular_set(fam, 1e-10 * (1.0 + scale));
  if (b.family) {
    // same family up to the sign normalization u(center) > 0
    double best = std::numeric_limits<double>::infinity();
    for (double sign : {1.0, -1.0}) {
      double d = std::max(std::abs(fam.a - sign * b.family->a), std::abs(fam.c - sign * b.family->c));
      for (int i = 0; i < n; ++i) d = std::max(d, std::abs(fam.b[idx(i)] - sign * b.family->b[idx(i)]));
      best = std::min(best, d);
    }
    r.checks.push_back(Check{"family_round_trip", best, 0.0, 1e-8, best <= 1e-8});
  }
}

void run_curvature(const Scenario& s, Report& r) {
  const int n = s.n;
  const ConformalMetric m(parse_field(s.background, n), parse_field(*s.phi, n));
  const Grid grid = s.make_grid();
  CurvatureTable table;
  for (int i = 0; i < n; ++i) table.header.push_back("x" + std::to_string(i + 1));
  table.header.push_back("scalar");
  for (int i = 0; i < n; ++i) table.header.push_back("ric_" + pair_label(i, i, n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) table.header.push_back("K_" + pair_label(i, j, n));
  }

  const std::size_t count = grid.size();
  table.rows.resize(count);
  std::vector<double> weyl(count, 0.0);
  std::vector<double> trace(count, 0.0);
  parallel_for(count, [&](std::size_t k) {
    const std::vector<double> p = grid.point(k);
    const Jet2 u = m.total_factor(p);
    const CurvTensor oracle = riemann_oracle_from_factor(u);
    const SymBilinear g = metric_from_factor(u);
    const SymBilinear ric = ricci_from_factor(u);
    const double scal = scalar_from_factor(u);
    std::vector<double>& row = table.rows[k];
    row = p;
    row.push_back(scal);
    for (int i = 0; i < n; ++i) row.push_back(ric(i, i));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) row.push_back(sectional_from(oracle, g, i, j));
    }
    const double on = tensor_max_norm(oracle);
    weyl[k] = tensor_max_norm(tensor_difference(oracle, riemann_decomp_from_factor(u))) / (1.0 + on);
    trace[k] = std::abs(ric.trace(g) - scal) / (1.0 + std::abs(scal));
  });
  r.residuals.push_back(stat_over("weyl", weyl, grid));
  r.residuals.push_back(stat_over("ricci_trace", trace, grid));
  Band band = Band::Accept;
  for (const ResidualStat& st : r.residuals) {
    const Band b = classify_residual(st.max, s.tol);
    if (static_cast<int>(b) > static_cast<int>(band)) band = b;
  }
  r.verdict = band == Band::Accept ? Verdict::Ok : Verdict::Indeterminate;
  r.table = std::move(table);
}

void dispatch(const Scenario& s, Task task, Report& r);

void run_example(const Scenario& s, Report& r) {
  const CatalogEntry* entry = find_example(*s.example_id);
  if (entry == nullptr) throw SchemaError("/example_id", "unknown example '" + *s.example_id + "'");
  r.source = entry->source;
  dispatch(s, entry->scenario.task, r);

  const int n = s.n;
  const Grid grid = s.make_grid();
  std::vector<std::string> drift;

  if (s.phi) {
    const ConformalMetric m(parse_field(s.background, n), parse_field(*s.phi, n));
    for (const DisplayedFormula& d : entry->displayed) {
      const ScalarExpr shown = ScalarExpr::parse(d.text, n);
      std::vector<double> gap(grid.size(), 0.0);
      parallel_for(grid.size(), [&](std::size_t k) {
        const std::vector<double> p = grid.point(k);
        gap[k] = relative_gap(shown.eval(p), curvature_quantity(m, p, d.quantity));
      });
      const ResidualStat st = stat_over(d.quantity, gap, grid);
      const bool agrees = st.max <= s.tol.accept;
      Discrepancy disc{d.quantity, d.text, st.max, st.argmax, agrees, d.expected_agreement, d.corrected, 0.0};
      if (d.corrected) {
        const ScalarExpr fixed = ScalarExpr::parse(*d.corrected, n);
        std::vector<double> cgap(grid.size(), 0.0);
        parallel_for(grid.size(), [&](std::size_t k) {
          const std::vector<double> p = grid.point(k);
          cgap[k] = relative_gap(fixed.eval(p), curvature_quantity(m, p, d.quantity));
        });
        disc.corrected_deviation = stat_over(d.quantity, cgap, grid).max;
        if (disc.corrected_deviation > s.tol.accept) drift.push_back("corrected " + d.quantity);
      }
      r.discrepancies.push_back(std::move(disc));
      if (agrees != d.expected_agreement) drift.push_back("displayed " + d.quantity);
    }
    if (entry->displayed_tensor) {
      std::vector<Field> comps;
      for (const std::string& c : *entry->displayed_tensor) comps.push_back(parse_field(c, n));
      const PairingComparison pc = compare_pairings(DiagonalTensorField(std::move(comps)), m, grid);
      std::string text;
      for (const std::string& c : *entry->displayed_tensor) text += (text.empty() ? "" : "; ") + c;
      const bool bg = pc.background_deviation <= s.tol.accept;
      const bool eu = pc.euclidean_deviation <= s.tol.accept;
      std::optional<std::string> required;
      double required_dev = 0.0;
      if (!bg && s.tensor && s.tensor->form == TensorSpec::Form::List) {
        required = std::string();
        for (const std::string& c : s.tensor->components) *required += (required->empty() ? "" : "; ") + c;
        required_dev = compare_pairings(build_tensor(*s.tensor, n, s.tol.quadrature).tensor, m, grid).background_deviation;
        if (required_dev > s.tol.accept) drift.push_back("corrected tensor");
      }
      r.discrepancies.push_back(Discrepancy{"T (R = T o g, background metric)", text, pc.background_deviation,
                                            pc.background_argmax, bg, entry->displayed_tensor_background_agrees,
                                            required, required_dev});
      r.discrepancies.push_back(Discrepancy{"T (R = T o delta, euclidean metric)", text, pc.euclidean_deviation,
                                            pc.euclidean_argmax, eu, entry->displayed_tensor_euclidean_agrees,
                                            std::nullopt, 0.0});
      if (bg != entry->displayed_tensor_background_agrees) drift.push_back("displayed tensor, background pairing");
      if (eu != entry->displayed_tensor_euclidean_agrees) drift.push_back("displayed tensor, euclidean pairing");
      if (!bg && eu) {
        r.notes.push_back("the displayed tensor satisfies R = T o delta, i.e. it equals the tensor required for the "
                          "background metric divided by F^2");
      }
    }
    for (const PointValue& pv : entry->point_values) {
      const double v = curvature_quantity(m, pv.point, pv.quantity);
      std::ostringstream name;
      name << pv.quantity << " at (";
      for (std::size_t i = 0; i < pv.point.size(); ++i) name << (i ? ", " : "") << pv.point[i];
      name << ")";
      r.checks.push_back(Check{name.str(), v, pv.value, pv.tolerance, std::abs(v - pv.value) <= pv.tolerance});
    }
  }

  if (entry->expected_C) {
    const double got = r.recovered_C.value_or(std::numeric_limits<double>::quiet_NaN());
    r.checks.push_back(Check{"recovered_C", got, *entry->expected_C, 1e-8, std::abs(got - *entry->expected_C) <= 1e-8});
  }
  if (entry->expected_family) {
    const QuadraticFamily& want = *entry->expected_family;
    double d = std::numeric_limits<double>::infinity();
    if (r.family) {
      d = std::max(std::abs(r.family->a - want.a), std::abs(r.family->c - want.c));
      for (int i = 0; i < n; ++i) d = std::max(d, std::abs(r.family->b[idx(i)] - want.b[idx(i)]));
    }
    r.checks.push_back(Check{"family", d, 0.0, 1e-8, d <= 1e-8});
  }
  if (entry->expected_singular_set) {
    const bool same = r.singular_set && r.singular_set->kind == *entry->expected_singular_set;
    r.checks.push_back(Check{std::string("singular_set ") + to_string(*entry->expected_singular_set), same ? 1.0 : 0.0,
                             1.0, 0.0, same});
    if (same && *entry->expected_singular_set == SingularSet::Kind::Sphere && entry->expected_family) {
      const double want = std::sqrt(entry->expected_family->lambda) / (2.0 * std::abs(entry->expected_family->a));
      const double got = r.singular_set->radius;
      r.checks.push_back(Check{"singular_set_radius", got, want, 1e-12, std::abs(got - want) <= 1e-12});
    }
  }
  if (entry->expected_witness) {
    const bool same = r.witness && r.witness->name == *entry->expected_witness;
    r.checks.push_back(Check{"witness " + *entry->expected_witness, same ? 1.0 : 0.0, 1.0, 0.0, same});
  }

  for (const Check& c : r.checks) {
    if (!c.passed) drift.push_back("check " + c.name);
  }
  if (r.verdict != entry->expected_verdict) {
    drift.push_back(std::string("verdict ") + to_string(r.verdict) + " (expected " +
                    to_string(entry->expected_verdict) + ")");
  }
  if (!drift.empty()) {
    std::string all;
    for (const std::string& d : drift) all += (all.empty() ? "" : ", ") + d;
    r.verdict = Verdict::Error;
    r.error = "catalog expectations drifted: " + all;
  }
}

void dispatch(const Scenario& s, Task task, Report& r) {
  switch (task) {
    case Task::Verify:
      run_verify(s, r);
      return;
    case Task::Solve:
      run_solve(s, r);
      return;
    case Task::Classify:
      run_classify(s, r);
      return;
    case Task::Curvature:
      run_curvature(s, r);
      return;
    case Task::Example:
      run_example(s, r);
      return;
  }
}

// --- JSON output ----------------------------------------------------------------

ojson point_json(const std::vector<double>& p) {
  ojson a = ojson::array();
  for (double v : p) a.push_back(v);
  return a;
}

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

const char* to_string(Task t) {
  switch (t) {
    case Task::Verify:
      return "verify";
    case Task::Solve:
      return "solve";
    case Task::Classify:
      return "classify";
    case Task::Curvature:
      return "curvature";
    case Task::Example:
      return "example";
  }
  return "unknown";
}

Task task_from_string(const std::string& s) {
  for (Task t : {Task::Verify, Task::Solve, Task::Classify, Task::Curvature, Task::Example}) {
    if (s == to_string(t)) return t;
  }
  throw SchemaError("/task", "unknown task '" + s + "'");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Solution:
      return "SOLUTION";
    case Verdict::Nonexistent:
      return "NONEXISTENT";
    case Verdict::Mismatch:
      return "MISMATCH";
    case Verdict::Indeterminate:
      return "INDETERMINATE";
    case Verdict::Ok:
      return "OK";
    case Verdict::Error:
      return "ERROR";
  }
  return "ERROR";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Solution:
    case Verdict::Ok:
      return 0;
    case Verdict::Nonexistent:
    case Verdict::Mismatch:
      return 2;
    case Verdict::Indeterminate:
      return 3;
    case Verdict::Error:
      return 1;
  }
  return 1;
}

Grid Scenario::make_grid() const {
  std::vector<double> c = grid.center.value_or(std::vector<double>(idx(n), 0.0));
  std::vector<bool> active(idx(n), !grid.axes.has_value());
  if (grid.axes) {
    for (int a : *grid.axes) active[idx(a)] = true;
  }
  return Grid(std::move(c), grid.half_width, grid.points_per_axis, std::move(active));
}

std::vector<double> Scenario::base() const {
  if (base_point) return *base_point;
  return grid.center.value_or(std::vector<double>(idx(n), 0.0));
}

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  as_object(root, "");
  allow_keys(root, "", {"schema_version", "task", "n", "background", "tensor", "phi", "base_point", "grid",
                        "tolerances", "example_id"});
  const int version = as_int(require(root, "", "schema_version"), "/schema_version");
  if (version != 1) throw SchemaError("/schema_version", "unsupported schema version " + std::to_string(version));
  const Task task = task_from_string(as_string(require(root, "", "task"), "/task"));

  Scenario s;
  if (root.contains("example_id")) {
    const std::string id = as_string(root.at("example_id"), "/example_id");
    const CatalogEntry* entry = find_example(id);
    if (entry == nullptr) throw SchemaError("/example_id", "unknown example '" + id + "'");
    for (const char* key : {"n", "background", "tensor", "phi", "base_point"}) {
      if (root.contains(key)) throw SchemaError(std::string("/") + key, "not allowed together with example_id");
    }
    s = entry->scenario;
    s.example_id = id;
  } else {
    s.n = as_int(require(root, "", "n"), "/n");
    if (s.n < 3 || s.n > 16) throw SchemaError("/n", "dimension must lie in 3..16");
    if (root.contains("background")) {
      as_expression(root.at("background"), "/background", s.n);
      s.background = root.at("background").get<std::string>();
    }
    if (root.contains("tensor")) s.tensor = read_tensor(root.at("tensor"), s.n);
    if (root.contains("phi")) {
      as_expression(root.at("phi"), "/phi", s.n);
      s.phi = root.at("phi").get<std::string>();
    }
    if (root.contains("base_point")) s.base_point = as_numbers(root.at("base_point"), "/base_point", s.n);
  }
  s.schema_version = version;
  s.task = task;
  if (root.contains("grid")) read_grid(root.at("grid"), s.n, s.grid);
  if (root.contains("tolerances")) read_tolerances(root.at("tolerances"), s.tol);
  check_task_fields(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

Report run(const Scenario& s) {
  Report r;
  r.task = s.task;
  r.example_id = s.example_id;
  r.n = s.n;
  try {
    check_task_fields(s);
    dispatch(s, s.task, r);
  } catch (const std::exception& e) {
    r.verdict = Verdict::Error;
    r.error = e.what();
  }
  return r;
}

std::string to_json(const Report& r) {
  ojson j;
  j["schema_version"] = 1;
  j["task"] = to_string(r.task);
  j["example_id"] = r.example_id ? ojson(*r.example_id) : ojson(nullptr);
  j["source"] = r.source ? ojson(*r.source) : ojson(nullptr);
  j["n"] = r.n;
  j["verdict"] = to_string(r.verdict);
  if (r.witness) {
    ojson w;
    w["name"] = r.witness->name;
    w["detail"] = r.witness->detail;
    w["location"] = point_json(r.witness->location);
    w["magnitude"] = r.witness->magnitude;
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["recovered_C"] = optional_number(r.recovered_C);
  if (r.family) {
    ojson f;
    f["a"] = r.family->a;
    f["b"] = point_json(r.family->b);
    f["c"] = r.family->c;
    f["lambda"] = r.family->lambda;
    j["quadratic_family"] = f;
  } else {
    j["quadratic_family"] = nullptr;
  }
  if (r.singular_set) {
    ojson s;
    s["kind"] = to_string(r.singular_set->kind);
    s["center"] = point_json(r.singular_set->center);
    s["normal"] = point_json(r.singular_set->normal);
    s["offset"] = r.singular_set->offset;
    s["radius"] = r.singular_set->radius;
    j["singular_set"] = s;
  } else {
    j["singular_set"] = nullptr;
  }
  ojson residuals = ojson::array();
  for (const ResidualStat& st : r.residuals) {
    ojson e;
    e["family"] = st.family;
    e["max"] = st.max;
    e["mean"] = st.mean;
    e["argmax"] = point_json(st.argmax);
    e["samples"] = st.samples;
    residuals.push_back(e);
  }
  j["residuals"] = residuals;
  ojson checks = ojson::array();
  for (const Check& c : r.checks) {
    ojson e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["expected"] = c.expected;
    e["tolerance"] = c.tolerance;
    e["passed"] = c.passed;
    checks.push_back(e);
  }
  j["checks"] = checks;
  ojson disc = ojson::array();
  for (const Discrepancy& d : r.discrepancies) {
    ojson e;
    e["quantity"] = d.quantity;
    e["displayed"] = d.displayed;
    e["max_relative_deviation"] = d.max_deviation;
    e["argmax"] = point_json(d.argmax);
    e["agrees"] = d.agrees;
    e["expected_agreement"] = d.expected_agreement ? ojson(*d.expected_agreement) : ojson(nullptr);
    e["corrected"] = d.corrected ? ojson(*d.corrected) : ojson(nullptr);
    e["corrected_max_relative_deviation"] = d.corrected ? ojson(d.corrected_deviation) : ojson(nullptr);
    disc.push_back(e);
  }
  j["discrepancies"] = disc;
  j["notes"] = r.notes;
  j["error"] = r.error ? ojson(*r.error) : ojson(nullptr);
  if (r.table) {
    ojson t;
    t["header"] = r.table->header;
    ojson rows = ojson::array();
    for (const auto& row : r.table->rows) rows.push_back(point_json(row));
    t["rows"] = rows;
    j["table"] = t;
  } else {
    j["table"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const Report& r) {
  if (!r.table) throw std::invalid_argument("CSV output needs a curvature table (task curvature)");
  std::string out;
  for (std::size_t i = 0; i < r.table->header.size(); ++i) out += (i ? "," : "") + r.table->header[i];
  out += "\n";
  char buf[64];
  for (const auto& row : r.table->rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      if (i) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void emit(const Report& r, Format f, const std::filesystem::path& path) {
  const std::string text = f == Format::Json ? to_json(r) : to_csv(r);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string pair_label(int i, int j, int n) {
  if (n <= 9) return std::to_string(i + 1) + std::to_string(j + 1);
  return std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

double curvature_quantity(const ConformalMetric& m, std::span<const double> p, const std::string& quantity) {
  const int n = m.dim();
  if (quantity == "scalar") return scalar_curv(m, p);
  const auto parse_pair = [&](const std::string& rest) {
    int i = 0;
    int j = 0;
    const auto us = rest.find('_');
    if (us != std::string::npos) {
      i = std::stoi(rest.substr(0, us));
      j = std::stoi(rest.substr(us + 1));
    } else if (rest.size() == 2 && std::isdigit(static_cast<unsigned char>(rest[0])) &&
               std::isdigit(static_cast<unsigned char>(rest[1]))) {
      i = rest[0] - '0';
      j = rest[1] - '0';
    }
    if (i < 1 || j < 1 || i > n || j > n) throw std::invalid_argument("bad curvature quantity '" + quantity + "'");
    return std::pair<int, int>{i - 1, j - 1};
  };
  if (quantity.rfind("ric_", 0) == 0) {
    const auto [i, j] = parse_pair(quantity.substr(4));
    return ricci(m, p)(i, j);
  }
  if (quantity.rfind("K_", 0) == 0) {
    const auto [i, j] = parse_pair(quantity.substr(2));
    return sectional(m, p, i, j);
  }
  throw std::invalid_argument("bad curvature quantity '" + quantity + "'");
}

}  // namespace confcurv
