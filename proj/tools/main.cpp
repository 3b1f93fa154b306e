#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "confcurv/errors.hpp"
#include "confcurv/scenarios.hpp"

namespace {

struct Options {
  std::string scenario;
  std::string out;
  std::string format = "json";
  std::optional<int> grid_points;
  std::optional<double> tol_accept;
  std::optional<double> tol_reject;
  bool quiet = false;
  std::string id;
  bool list = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "scenario JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "write the report here instead of stdout");
  cmd->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--grid-points", o.grid_points, "points per grid axis (odd, >= 3)");
  cmd->add_option("--tol-accept", o.tol_accept, "accept threshold")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-reject", o.tol_reject, "reject threshold")->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", o.quiet, "no summary on stderr");
}

void list_examples() {
  for (const confcurv::CatalogEntry& e : confcurv::catalog()) {
    std::printf("%-18s %-13s %-12s %s\n", e.id.c_str(), e.source.c_str(), confcurv::to_string(e.expected_verdict),
                e.summary.c_str());
  }
}

int execute(confcurv::Task task, const Options& o) {
  using namespace confcurv;
  Scenario s;
  if (!o.scenario.empty()) {
    s = load_scenario(o.scenario);
  } else if (task == Task::Example && !o.id.empty()) {
    const CatalogEntry* e = find_example(o.id);
    if (e == nullptr) throw SchemaError("/example_id", "unknown example '" + o.id + "'");
    s = e->scenario;
  } else {
    throw std::invalid_argument("--scenario is required" +
                                std::string(task == Task::Example ? " (or --id)" : ""));
  }
  if (task == Task::Example && !o.id.empty()) {
    const CatalogEntry* e = find_example(o.id);
    if (e == nullptr) throw SchemaError("/example_id", "unknown example '" + o.id + "'");
    if (s.example_id && *s.example_id != o.id) throw std::invalid_argument("--id disagrees with the scenario file");
    if (!s.example_id) {
      const GridSpec grid = o.scenario.empty() ? e->scenario.grid : s.grid;
      const Tolerances tol = o.scenario.empty() ? e->scenario.tol : s.tol;
      s = e->scenario;
      s.grid = grid;
      s.tol = tol;
    }
    s.example_id = o.id;
  }
  s.task = task;
  if (o.grid_points) {
    if (*o.grid_points < 3 || *o.grid_points % 2 == 0) throw SchemaError("/grid/points_per_axis", "expected an odd integer >= 3");
    s.grid.points_per_axis = *o.grid_points;
  }
  if (o.tol_accept) s.tol.accept = *o.tol_accept;
  if (o.tol_reject) s.tol.reject = *o.tol_reject;
  if (!(s.tol.accept < s.tol.reject)) throw SchemaError("/tolerances", "accept must be smaller than reject");

  const Report r = run(s);
  const Format fmt = o.format == "csv" ? Format::Csv : Format::Json;
  if (o.out.empty()) {
    std::cout << (fmt == Format::Json ? to_json(r) : to_csv(r));
    std::cout.flush();
  } else {
    emit(r, fmt, o.out);
  }
  if (!o.quiet) {
    std::cerr << to_string(r.task) << ": " << to_string(r.verdict);
    if (r.witness) std::cerr << " (" << r.witness->name << ", magnitude " << r.witness->magnitude << ")";
    if (r.recovered_C) std::cerr << " C = " << *r.recovered_C;
    if (r.error) std::cerr << "\n  " << *r.error;
    std::cerr << "\n";
  }
  return exit_code(r.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  using confcurv::Task;
  CLI::App app{"Prescribed curvature workbench for conformally flat metrics"};
  app.require_subcommand(1);
  Options o;
  std::optional<Task> chosen;
  const std::pair<const char*, Task> commands[] = {
      {"verify", Task::Verify},       {"solve", Task::Solve},         {"classify", Task::Classify},
      {"curvature", Task::Curvature}, {"example", Task::Example},
  };
  const char* help[] = {
      "check a tensor against a given conformal factor",
      "reconstruct the conformal factor or prove there is none",
      "fit and classify an isotropic tensor of quadratic type",
      "tabulate scalar, Ricci and sectional curvature",
      "run a built-in catalog example",
  };
  for (std::size_t i = 0; i < 5; ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i].first, help[i]);
    add_common(cmd, o);
    if (commands[i].second == Task::Example) {
      cmd->add_option("--id", o.id, "catalog example id");
      cmd->add_flag("--list", o.list, "list catalog examples and exit");
    }
    cmd->callback([&chosen, task = commands[i].second] { chosen = task; });
  }
  CLI11_PARSE(app, argc, argv);

  if (o.list) {
    list_examples();
    return 0;
  }
  try {
    return execute(*chosen, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
