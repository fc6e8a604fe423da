// esscoord command-line front end. Everything goes through the C interface.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esscoord/esscoord.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Exit codes beyond 0/2/3 are not part of any contract; they just keep
// failures distinguishable.
int exit_code(esc_status s) {
  switch (s) {
    case ESC_OK: return 0;
    case ESC_ERR_PARSE:
    case ESC_ERR_VALIDATION: return 2;
    case ESC_ERR_SOLVER: return 3;
    case ESC_ERR_ARGUMENT: return 4;
    case ESC_ERR_IO: return 5;
    case ESC_ERR_INTERNAL: return 6;
  }
  return 6;
}

struct Failure {
  esc_status status;
};

void check(esc_status s, const std::string& context) {
  if (s == ESC_OK) return;
  std::cerr << "esscoord: " << context << ": " << esc_last_error() << "\n";
  throw Failure{s};
}

struct ScenarioDeleter {
  void operator()(esc_scenario* s) const { esc_scenario_free(s); }
};
struct ResultDeleter {
  void operator()(esc_result* r) const { esc_result_free(r); }
};
using ScenarioPtr = std::unique_ptr<esc_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<esc_result, ResultDeleter>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { esc_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

ScenarioPtr load(const std::string& path) {
  esc_scenario* s = nullptr;
  check(esc_scenario_load(path.c_str(), &s), "loading " + path);
  return ScenarioPtr(s);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "esscoord: cannot write " << path.string() << "\n";
    throw Failure{ESC_ERR_IO};
  }
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct TuningFlags {
  double rho = 0.0;
  double descent_floor = 0.0;
  std::size_t max_iters = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--rho", rho, "Largest per-entry plan change per iteration (default 0.02*min(c_max,d_max))");
    cmd->add_option("--descent-floor", descent_floor, "Smallest accepted first-order decrease per user");
    cmd->add_option("--max-iters", max_iters, "Iteration limit of the selfish loop");
  }

  esc_coord_params resolve(const esc_scenario* s) const {
    esc_coord_params p{};
    check(esc_coord_params_default(s, &p), "default parameters");
    if (rho != 0.0) p.step_rho = rho;
    if (descent_floor != 0.0) p.descent_floor = descent_floor;
    if (max_iters != 0) p.max_iters = max_iters;
    return p;
  }
};

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  std::string mode = "selfish";
  std::string out = ".";
  TuningFlags tuning;
};

int cmd_run(const RunArgs& a) {
  const auto s = load(a.scenario);
  const esc_mode mode = a.mode == "no-ess" ? ESC_MODE_NO_ESS : a.mode == "selfish" ? ESC_MODE_SELFISH : ESC_MODE_COOPERATIVE;
  const auto params = a.tuning.resolve(s.get());
  esc_result* raw = nullptr;
  check(esc_run(s.get(), mode, &params, &raw), a.mode + " run");
  const ResultPtr r(raw);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  check(esc_result_write_json(r.get(), (dir / "result.json").c_str()), "writing result.json");
  if (mode == ESC_MODE_SELFISH) check(esc_result_write_trace_csv(r.get(), (dir / "trace.csv").c_str()), "writing trace.csv");

  ordered_json meta;
  meta["created_utc"] = utc_now();
  meta["version"] = esc_version();
  meta["scenario"] = a.scenario;
  meta["mode"] = a.mode;
  meta["params"] = {{"step_rho", params.step_rho},
                    {"descent_floor", params.descent_floor},
                    {"max_iters", params.max_iters},
                    {"accept_tol", params.accept_tol}};
  write_text(dir / "run_meta.json", meta.dump(2) + "\n");

  std::cout << a.mode << ": total cost " << esc_result_total_cost(r.get());
  if (mode == ESC_MODE_SELFISH) std::cout << " after " << esc_result_num_iterations(r.get()) << " iterations";
  std::cout << "\n";
  if (esc_result_hit_iteration_limit(r.get()))
    std::cerr << "esscoord: warning: iteration limit reached; the plan is the best found so far\n";
  return 0;
}

// ---- compare --------------------------------------------------------------

struct Sweep {
  std::string param;  // "s_max" or "n0"
  std::vector<double> values;
};

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw CLI::ValidationError("--sweep", "expected name=from:to[:step]");
  Sweep sw;
  sw.param = text.substr(0, eq);
  if (sw.param != "s_max" && sw.param != "n0") throw CLI::ValidationError("--sweep", "unknown parameter '" + sw.param + "'");
  std::vector<double> parts;
  std::stringstream in(text.substr(eq + 1));
  std::string item;
  while (std::getline(in, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--sweep", "'" + item + "' is not a number");
    }
  }
  if (parts.size() < 2 || parts.size() > 3) throw CLI::ValidationError("--sweep", "expected name=from:to[:step]");
  const double step = parts.size() == 3 ? parts[2] : 1.0;
  if (!(step > 0.0) || parts[1] < parts[0]) throw CLI::ValidationError("--sweep", "empty or backwards range");
  const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) sw.values.push_back(parts[0] + static_cast<double>(k) * step);
  if (sw.param == "n0")
    for (double v : sw.values)
      if (v < 0.0 || v != std::floor(v)) throw CLI::ValidationError("--sweep", "n0 takes whole numbers of slots");
  return sw;
}

struct CompareArgs {
  std::string scenario;
  std::vector<std::string> sweeps;
  std::string out = ".";
  TuningFlags tuning;
};

ordered_json compare_one(const esc_scenario* s, const TuningFlags& tuning, const std::string& label) {
  const auto params = tuning.resolve(s);
  OwnedString json;
  check(esc_compare(s, &params, &json.p), "comparison at " + label);
  return ordered_json::parse(json.str());
}

std::string number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void append_rows(std::ostream& csv, const std::string& param, double value, const ordered_json& report) {
  for (const char* mode : {"no_ess", "selfish", "cooperative"}) {
    const auto& section = report.at(mode);
    const std::string mode_name = std::string(mode) == "no_ess" ? "no-ess" : mode;
    for (const auto& [user, cost] : section.at("per_user").items())
      csv << param << ',' << number(value) << ',' << mode_name << ',' << user << ',' << number(cost.get<double>()) << '\n';
    csv << param << ',' << number(value) << ',' << mode_name << ",total," << number(section.at("total").get<double>()) << '\n';
  }
}

int cmd_compare(const CompareArgs& a) {
  const auto s = load(a.scenario);
  std::vector<Sweep> sweeps;
  for (const auto& text : a.sweeps) sweeps.push_back(parse_sweep(text));

  ordered_json doc;
  doc["scenario"] = a.scenario;
  doc["base"] = compare_one(s.get(), a.tuning, "the base scenario");

  const fs::path dir(a.out);
  fs::create_directories(dir);
  if (!sweeps.empty()) {
    std::ostringstream csv;
    csv << "param,value,mode,user,cost\n";
    ordered_json all = ordered_json::object();
    for (const auto& sw : sweeps) {
      ordered_json points = ordered_json::array();
      for (double v : sw.values) {
        esc_scenario* raw = nullptr;
        const std::string label = sw.param + "=" + number(v);
        if (sw.param == "s_max") check(esc_scenario_with_capacity(s.get(), v, &raw), label);
        else check(esc_scenario_with_deadline_extension(s.get(), static_cast<std::size_t>(v), &raw), label);
        const ScenarioPtr point(raw);
        auto report = compare_one(point.get(), a.tuning, label);
        append_rows(csv, sw.param, v, report);
        points.push_back({{"value", v}, {"report", std::move(report)}});
      }
      all[sw.param] = std::move(points);
    }
    doc["sweeps"] = std::move(all);
    write_text(dir / "sweep.csv", csv.str());
  }
  write_text(dir / "compare.json", doc.dump(2) + "\n");

  const auto& base = doc["base"];
  std::cout << "no-ess " << base["no_ess"]["total"] << ", selfish " << base["selfish"]["total"] << ", cooperative "
            << base["cooperative"]["total"] << "\n";
  return 0;
}

// ---- oracle / check-plan / dump-lp -----------------------------------------

int cmd_oracle(const std::string& scenario, double grid_step, const std::string& out) {
  const auto s = load(scenario);
  OwnedString json;
  check(esc_oracle_brute_force(s.get(), grid_step, &json.p), "plan enumeration");
  if (out.empty()) std::cout << json.str();
  else write_text(out, json.str());
  return 0;
}

int cmd_check_plan(const std::string& scenario, const std::string& result_path, double tol) {
  const auto s = load(scenario);
  std::ifstream in(result_path, std::ios::binary);
  if (!in) {
    std::cerr << "esscoord: cannot open " << result_path << "\n";
    return exit_code(ESC_ERR_IO);
  }
  std::stringstream text;
  text << in.rdbuf();
  int feasible = 0;
  OwnedString report;
  check(esc_check_plan_json(s.get(), text.str().c_str(), tol, &feasible, &report.p), "checking " + result_path);
  if (feasible) {
    std::cout << "plan is feasible\n";
    return 0;
  }
  std::cout << "plan is infeasible:\n" << report.str();
  return 1;
}

int cmd_dump_lp(const std::string& scenario, const std::string& out) {
  const auto s = load(scenario);
  check(esc_dump_cooperative_lp(s.get(), out.c_str()), "writing " + out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead scheduling of a battery shared by several users"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one mode and write result.json (and trace.csv for selfish)");
  run_cmd->add_option("--scenario", run.scenario, "Scenario document")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--mode", run.mode, "no-ess | selfish | cooperative")
      ->check(CLI::IsMember({"no-ess", "selfish", "cooperative"}));
  run_cmd->add_option("--out", run.out, "Output directory");
  run.tuning.add_to(run_cmd);

  CompareArgs compare;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare all modes, optionally over parameter sweeps");
  cmp_cmd->add_option("--scenario", compare.scenario, "Scenario document")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--sweep", compare.sweeps, "s_max=A:B:step or n0=A:B (repeatable)");
  cmp_cmd->add_option("--out", compare.out, "Output directory");
  compare.tuning.add_to(cmp_cmd);

  std::string oracle_scenario, oracle_out;
  double grid_step = 0.0;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive plan search on a tiny scenario");
  oracle_cmd->add_option("--scenario", oracle_scenario, "Scenario document")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--grid-step", grid_step, "Plan grid spacing; must divide the rate limits")->required();
  oracle_cmd->add_option("--out", oracle_out, "Output file (default: stdout)");

  std::string check_scenario, check_result;
  double check_tol = 1e-9;
  auto* check_cmd = app.add_subcommand("check-plan", "Re-check the plan stored in a result.json");
  check_cmd->add_option("--scenario", check_scenario, "Scenario document")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--result", check_result, "result.json to check")->required();
  check_cmd->add_option("--tol", check_tol, "Tolerance for bounds and complementarity");

  std::string dump_scenario, dump_out;
  auto* dump_cmd = app.add_subcommand("dump-lp", "Write the joint LP in plain text");
  dump_cmd->add_option("--scenario", dump_scenario, "Scenario document")->required()->check(CLI::ExistingFile);
  dump_cmd->add_option("--out", dump_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*cmp_cmd) return cmd_compare(compare);
    if (*oracle_cmd) return cmd_oracle(oracle_scenario, grid_step, oracle_out);
    if (*check_cmd) return cmd_check_plan(check_scenario, check_result, check_tol);
    if (*dump_cmd) return cmd_dump_lp(dump_scenario, dump_out);
  } catch (const Failure& f) {
    return exit_code(f.status);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "esscoord: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "esscoord: " << e.what() << "\n";
    return 6;
  }
  return 0;
}
