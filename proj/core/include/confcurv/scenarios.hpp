#pragma once

// Scenario files, task dispatch, reports and the built-in example catalog.
//
// A scenario is a JSON document (see docs/scenario-schema.md). It names a
// task, the dimension, a diagonal tensor in one of four forms, optional
// factor and background expressions, a sampling grid and tolerances.
// Axis indices are 1-based in files and reports, 0-based in the C++ API.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confcurv/prescribed.hpp"

namespace confcurv {

enum class Task { Verify, Solve, Classify, Curvature, Example };
const char* to_string(Task t);
/// Throws SchemaError for unknown names.
Task task_from_string(const std::string& s);

struct TensorSpec {
  enum class Form { List, SingleVariable, Generator, Quadratic };
  Form form = Form::List;
  std::vector<std::string> components;  // List
  std::string f, f_k;                   // SingleVariable
  std::string h;                        // Generator
  int axis = 0;                         // SingleVariable and Generator, 0-based
  double scale = 1.0;                   // Generator C
  double a = 0.0, c = 0.0;              // Quadratic
  std::vector<double> b;
};

struct GridSpec {
  std::optional<std::vector<double>> center;  // default: origin
  double half_width = 2.0;
  int points_per_axis = 9;
  std::optional<std::vector<int>> axes;  // 0-based active axes; default all
};

struct Scenario {
  int schema_version = 1;
  Task task = Task::Verify;
  int n = 3;
  std::string background = "1";
  std::optional<TensorSpec> tensor;
  std::optional<std::string> phi;
  std::optional<std::vector<double>> base_point;  // default: grid center
  GridSpec grid;
  Tolerances tol;
  std::optional<std::string> example_id;

  Grid make_grid() const;
  std::vector<double> base() const;
};

/// Strict parse: unknown keys, wrong types, malformed expressions and
/// missing task-specific fields raise SchemaError with a JSON-pointer path.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

enum class Verdict { Solution, Nonexistent, Mismatch, Indeterminate, Ok, Error };
const char* to_string(Verdict v);
/// 0 OK/SOLUTION, 2 NONEXISTENT/MISMATCH, 3 INDETERMINATE, 1 ERROR.
int exit_code(Verdict v);

struct Witness {
  std::string name;
  std::string detail;
  std::vector<double> location;
  double magnitude = 0.0;
};

/// A check with a reference value (catalog expectations, reconstruction
/// accuracy). Binding only for the example task.
struct Check {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// A formula displayed in the source of a catalog entry, compared with the
/// value computed from the metric over the grid.
struct Discrepancy {
  std::string quantity;
  std::string displayed;
  double max_deviation = 0.0;  // relative
  std::vector<double> argmax;
  bool agrees = false;
  std::optional<bool> expected_agreement;
  std::optional<std::string> corrected;
  double corrected_deviation = 0.0;
};

struct CurvatureTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Report {
  Task task = Task::Verify;
  std::optional<std::string> example_id;
  std::optional<std::string> source;
  int n = 0;
  Verdict verdict = Verdict::Error;
  std::optional<Witness> witness;
  std::optional<double> recovered_C;
  std::optional<QuadraticFamily> family;
  std::optional<SingularSet> singular_set;
  std::vector<ResidualStat> residuals;
  std::vector<Check> checks;
  std::vector<Discrepancy> discrepancies;
  std::vector<std::string> notes;
  std::optional<std::string> error;
  std::optional<CurvatureTable> table;
};

/// Never throws for module errors: they become verdict ERROR with the
/// message in `error`.
Report run(const Scenario& s);

enum class Format { Json, Csv };
/// Fixed key order and float formatting, so equal reports give equal bytes.
std::string to_json(const Report& r);
/// Curvature table: x1..xn, scalar, ric_11..ric_nn, K_ij (i<j), 17
/// significant digits. Throws std::invalid_argument without a table.
std::string to_csv(const Report& r);
/// Throws std::runtime_error naming the path on I/O failure.
void emit(const Report& r, Format f, const std::filesystem::path& path);

// --- catalog ---------------------------------------------------------------

struct DisplayedFormula {
  std::string quantity;  // "scalar", "ric_ij", "K_ij" (1-based)
  std::string text;      // expression as displayed, with C = 1
  bool expected_agreement = true;
  /// Recomputed formula, set when the displayed one disagrees.
  std::optional<std::string> corrected;
};

struct PointValue {
  std::string quantity;
  std::vector<double> point;
  double value = 0.0;
  double tolerance = 0.0;
};

struct CatalogEntry {
  std::string id;
  std::string source;  // location tag in the source text
  std::string summary;
  Scenario scenario;   // task run by `example`
  std::vector<DisplayedFormula> displayed;
  /// Displayed diagonal tensor, compared under both pairings.
  std::optional<std::vector<std::string>> displayed_tensor;
  bool displayed_tensor_background_agrees = false;
  bool displayed_tensor_euclidean_agrees = false;
  std::vector<PointValue> point_values;
  Verdict expected_verdict = Verdict::Ok;
  std::optional<std::string> expected_witness;
  std::optional<double> expected_C;
  std::optional<SingularSet::Kind> expected_singular_set;
  std::optional<QuadraticFamily> expected_family;
};

const std::vector<CatalogEntry>& catalog();
/// nullptr when unknown.
const CatalogEntry* find_example(const std::string& id);

/// "scalar", "ric_ij" or "K_ij" (1-based; "ric_i_j" / "K_i_j" also accepted).
double curvature_quantity(const ConformalMetric& m, std::span<const double> p, const std::string& quantity);
/// Column label for (i, j), 0-based: "11", or "10_10" once n > 9.
std::string pair_label(int i, int j, int n);

}  // namespace confcurv
