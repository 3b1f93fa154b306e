#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "confcurv/errors.hpp"
#include "confcurv/parallel.hpp"
#include "confcurv/scenarios.hpp"

using namespace confcurv;

namespace {

const char* kVerify = R"j({
  "schema_version": 1, "task": "verify", "n": 3,
  "tensor": {"f": "-2*x1^2*exp(2*x1^2)", "f_k": "2*(x1^2-1)*exp(2*x1^2)", "k": 1},
  "phi": "exp(-x1^2)",
  "grid": {"axes": [1]}
})j";

std::string schema_path(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const SchemaError& e) {
    return e.key_path();
  }
  return "<none>";
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(ScenarioParse, MinimalVerifyWithDefaults) {
  const Scenario s = parse_scenario(kVerify);
  EXPECT_EQ(s.task, Task::Verify);
  EXPECT_EQ(s.n, 3);
  EXPECT_EQ(s.background, "1");
  ASSERT_TRUE(s.tensor.has_value());
  EXPECT_EQ(s.tensor->form, TensorSpec::Form::SingleVariable);
  EXPECT_EQ(s.tensor->axis, 0);
  EXPECT_DOUBLE_EQ(s.grid.half_width, 2.0);
  EXPECT_EQ(s.grid.points_per_axis, 9);
  EXPECT_DOUBLE_EQ(s.tol.accept, 1e-8);
  EXPECT_DOUBLE_EQ(s.tol.reject, 1e-4);
  EXPECT_DOUBLE_EQ(s.tol.quadrature, 1e-10);
  EXPECT_EQ(s.make_grid().size(), 9u);
}

TEST(ScenarioParse, StrictErrorsCarryPaths) {
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["1","1","1"],"h":"x1"})j"), "/h");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":{"f":"x1","f_k":"x1","k":1,"h":"x1"}})j"),
            "/tensor");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["1","1"]})j"), "/tensor");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["1","1","x1+"]})j"), "/tensor/2");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":{"f":"x2","f_k":"x1","k":1}})j"),
            "/tensor/f");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["1","1","1"],"grid":{"pts":3}})j"),
            "/grid/pts");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["1","1","1"],"grid":{"points_per_axis":4}})j"),
            "/grid/points_per_axis");
  EXPECT_EQ(schema_path(R"j({"schema_version":2,"task":"solve","n":3})j"), "/schema_version");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"fly","n":3})j"), "/task");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"verify","n":3,"tensor":["1","1","1"]})j"), "/phi");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":2,"tensor":["1","1"]})j"), "/n");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["1","1","1"],"tolerances":{"accept":1e-3,"reject":1e-4}})j"),
            "/tolerances");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"example","example_id":"corollary45-ex2","n":3})j"), "/n");
  EXPECT_EQ(schema_path(R"j({"schema_version":1,"task":"example","example_id":"nope"})j"), "/example_id");
  EXPECT_EQ(schema_path("{not json"), "");
}

TEST(ScenarioParse, ExampleIdPreloadsCatalogScenario) {
  const Scenario s =
      parse_scenario(R"j({"schema_version":1,"task":"example","example_id":"corollary45-ex2","grid":{"points_per_axis":5}})j");
  EXPECT_EQ(s.task, Task::Example);
  ASSERT_TRUE(s.phi.has_value());
  EXPECT_EQ(*s.phi, "1/(1+x1^2)");
  EXPECT_EQ(s.grid.points_per_axis, 5);
  ASSERT_TRUE(s.grid.axes.has_value());
  EXPECT_EQ(*s.grid.axes, std::vector<int>{0});
}

TEST(ScenarioRun, VerifyExample3) {
  const Report r = run(parse_scenario(kVerify));
  EXPECT_EQ(r.verdict, Verdict::Ok);
  for (const ResidualStat& s : r.residuals) EXPECT_LE(s.max, 1e-10) << s.family;
}

TEST(ScenarioRun, SeparableIsNonexistent) {
  const Report r =
      run(parse_scenario(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["exp(x1)","exp(x2)","exp(x3)"],"grid":{"half_width":1,"points_per_axis":5}})j"));
  EXPECT_EQ(r.verdict, Verdict::Nonexistent);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->name, "separable_tensor");
  EXPECT_EQ(exit_code(r.verdict), 2);
}

TEST(ScenarioRun, ClassifyRoundTrip) {
  const char* f = "\"2/(1+x1^2+x2^2+x3^2)^4\"";
  const std::string text = std::string(R"j({"schema_version":1,"task":"classify","n":3,"tensor":[)j") + f + "," + f +
                           "," + f + R"j(],"grid":{"half_width":1,"points_per_axis":5}})j";
  const Report r = run(parse_scenario(text));
  EXPECT_EQ(r.verdict, Verdict::Ok);
  ASSERT_TRUE(r.family.has_value());
  EXPECT_NEAR(r.family->a, 1.0, 1e-8);
  EXPECT_NEAR(r.family->c, 1.0, 1e-8);
  ASSERT_TRUE(r.singular_set.has_value());
  EXPECT_EQ(r.singular_set->kind, SingularSet::Kind::Empty);
}

TEST(ScenarioRun, ClassifyNeedsIsotropicTensor) {
  const Report r =
      run(parse_scenario(R"j({"schema_version":1,"task":"classify","n":3,"tensor":["1","2","1"]})j"));
  EXPECT_EQ(r.verdict, Verdict::Error);
  EXPECT_TRUE(r.error.has_value());
}

TEST(ScenarioRun, GeneratorSolveRecoversScale) {
  const Report r = run(parse_scenario(
      R"j({"schema_version":1,"task":"solve","n":3,"tensor":{"h":"2*x1/(1+x1^2)","k":1,"C":1},"phi":"1/(1+x1^2)","grid":{"axes":[1]}})j"));
  ASSERT_EQ(r.verdict, Verdict::Solution);
  ASSERT_TRUE(r.recovered_C.has_value());
  EXPECT_NEAR(*r.recovered_C, 1.0, 1e-10);
  EXPECT_NE(to_json(r).find("\"recovered_C\": 1.0"), std::string::npos);
}

TEST(ScenarioRun, MissingFieldAfterTaskOverrideIsError) {
  Scenario s = parse_scenario(R"j({"schema_version":1,"task":"solve","n":3,"tensor":["1","1","1"]})j");
  s.task = Task::Verify;
  const Report r = run(s);
  EXPECT_EQ(r.verdict, Verdict::Error);
  EXPECT_EQ(exit_code(r.verdict), 1);
}

TEST(ScenarioEmit, CurvatureCsv) {
  const Report r = run(parse_scenario(
      R"j({"schema_version":1,"task":"curvature","n":3,"phi":"1+x1^2+x2^2+x3^2","grid":{"half_width":1,"points_per_axis":3}})j"));
  ASSERT_EQ(r.verdict, Verdict::Ok);
  const std::string csv = to_csv(r);
  EXPECT_EQ(count_lines(csv), 28u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1,x2,x3,scalar,ric_11,ric_22,ric_33,K_12,K_13,K_23");
  for (const auto& row : r.table->rows) {
    for (std::size_t c = 7; c < 10; ++c) EXPECT_NEAR(row[c], 4.0, 1e-9);
  }
  Report no_table = r;
  no_table.table.reset();
  EXPECT_THROW(to_csv(no_table), std::invalid_argument);
}

TEST(ScenarioEmit, JsonKeyOrderAndDeterminism) {
  const Scenario s = parse_scenario(kVerify);
  set_thread_count(1);
  const std::string one = to_json(run(s));
  set_thread_count(4);
  const std::string four = to_json(run(s));
  set_thread_count(0);
  EXPECT_EQ(one, four);
  const char* keys[] = {"schema_version", "task",      "example_id", "source",        "n",
                        "verdict",        "witness",   "recovered_C", "quadratic_family", "singular_set",
                        "residuals",      "checks",    "discrepancies", "notes",       "error",
                        "table"};
  std::size_t last = 0;
  for (const char* k : keys) {
    const std::size_t at = one.find(std::string("\"") + k + "\"");
    ASSERT_NE(at, std::string::npos) << k;
    EXPECT_GT(at + 1, last) << k;
    last = at;
  }
}

TEST(ScenarioEmit, IoErrorNamesPath) {
  const Report r = run(parse_scenario(kVerify));
  try {
    emit(r, Format::Json, "/nonexistent-dir/report.json");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/report.json"), std::string::npos);
  }
  const auto path = std::filesystem::temp_directory_path() / "confcurv_emit_test.json";
  emit(r, Format::Json, path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), to_json(r));
  std::filesystem::remove(path);
}

TEST(Catalog, EveryEntryMeetsItsExpectations) {
  ASSERT_FALSE(catalog().empty());
  for (const CatalogEntry& e : catalog()) {
    EXPECT_FALSE(e.source.empty()) << e.id;
    Scenario s = e.scenario;
    s.task = Task::Example;
    s.example_id = e.id;
    const Report r = run(s);
    EXPECT_EQ(r.verdict, e.expected_verdict) << e.id << ": " << r.error.value_or("");
    ASSERT_TRUE(r.source.has_value());
    EXPECT_EQ(*r.source, e.source);
  }
  ASSERT_NE(find_example("corollary45-ex2"), nullptr);
  EXPECT_EQ(find_example("corollary45-ex2")->source, "Example 2(2)");
  EXPECT_EQ(find_example("missing"), nullptr);
}

TEST(Catalog, DisplayedDiscrepanciesAreReportedWithCorrections) {
  Scenario s = find_example("hyperbolic-ex1")->scenario;
  s.task = Task::Example;
  s.example_id = "hyperbolic-ex1";
  const Report r = run(s);
  ASSERT_EQ(r.verdict, Verdict::Solution);
  int differing = 0;
  for (const Discrepancy& d : r.discrepancies) {
    if (!d.agrees) {
      ++differing;
      EXPECT_TRUE(d.corrected.has_value()) << d.quantity;
      EXPECT_LE(d.corrected_deviation, 1e-8) << d.quantity;
    }
  }
  EXPECT_EQ(differing, 3);
}

TEST(Catalog, DriftIsLoud) {
  Scenario s = find_example("corollary45-ex2")->scenario;
  s.task = Task::Example;
  s.example_id = "corollary45-ex2";
  s.tensor->f_k = "4*x1^2-3";
  const Report r = run(s);
  EXPECT_EQ(r.verdict, Verdict::Error);
  ASSERT_TRUE(r.error.has_value());
  EXPECT_NE(r.error->find("drift"), std::string::npos);
}

TEST(Catalog, CurvatureQuantityNames) {
  const ConformalMetric m = ConformalMetric::euclidean(Field(ScalarExpr::parse("1+x1^2+x2^2+x3^2", 3)));
  const std::vector<double> p{0.1, 0.2, 0.3};
  EXPECT_NEAR(curvature_quantity(m, p, "K_12"), 4.0, 1e-12);
  EXPECT_NEAR(curvature_quantity(m, p, "K_2_3"), 4.0, 1e-12);
  EXPECT_NEAR(curvature_quantity(m, p, "scalar"), 24.0, 1e-10);
  EXPECT_THROW(curvature_quantity(m, p, "K_14"), std::invalid_argument);
  EXPECT_EQ(pair_label(0, 1, 3), "12");
  EXPECT_EQ(pair_label(9, 10, 11), "10_11");
}
