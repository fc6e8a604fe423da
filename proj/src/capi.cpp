#include "esscoord/esscoord.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "esscoord/errors.hpp"
#include "esscoord/oracle.hpp"
#include "esscoord/report_io.hpp"

struct esc_scenario {
  esscoord::Scenario value;
};

struct esc_result {
  esscoord::RunResult value;
};

namespace {

thread_local std::string last_error;

esc_status fail(esc_status code, std::string message) {
  last_error = std::move(message);
  return code;
}

// Maps the exception hierarchy onto status codes. Order matters: the most
// derived types first.
template <typename F>
esc_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const esscoord::ParseError& e) {
    return fail(ESC_ERR_PARSE, e.what());
  } catch (const esscoord::ValidationError& e) {
    return fail(ESC_ERR_VALIDATION, e.what());
  } catch (const esscoord::SolverError& e) {
    return fail(ESC_ERR_SOLVER, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ESC_ERR_ARGUMENT, e.what());
  } catch (const std::length_error& e) {
    return fail(ESC_ERR_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(ESC_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ESC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ESC_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

esc_status write_file(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return fail(ESC_ERR_IO, std::string("cannot open ") + path + " for writing");
  out << text;
  out.close();
  if (!out) return fail(ESC_ERR_IO, std::string("failed writing ") + path);
  return ESC_OK;
}

esscoord::CoordinatorParams to_params(const esscoord::Scenario& s, const esc_coord_params* p) {
  if (!p) return esscoord::CoordinatorParams::defaults_for(s.ess);
  esscoord::CoordinatorParams out;
  out.step_rho = p->step_rho;
  out.descent_floor = p->descent_floor;
  out.max_iters = p->max_iters;
  out.accept_tol = p->accept_tol;
  return out;
}

esscoord::lp::ToleranceSet tolerances() { return esscoord::lp::ToleranceSet::from_env(); }

#define ESC_REQUIRE(cond, what) \
  if (!(cond)) return fail(ESC_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* esc_version(void) { return "0.1.0"; }

const char* esc_last_error(void) { return last_error.c_str(); }

void esc_string_free(char* s) { std::free(s); }

esc_status esc_scenario_load(const char* path, esc_scenario** out) {
  ESC_REQUIRE(path && out, "path and out must not be null");
  return guarded([&] {
    *out = new esc_scenario{esscoord::load_scenario(path)};
    return ESC_OK;
  });
}

esc_status esc_scenario_from_json(const char* text, const char* base_dir, esc_scenario** out) {
  ESC_REQUIRE(text && out, "text and out must not be null");
  return guarded([&] {
    *out = new esc_scenario{esscoord::parse_scenario(text, base_dir ? base_dir : "")};
    return ESC_OK;
  });
}

void esc_scenario_free(esc_scenario* s) { delete s; }

size_t esc_scenario_num_users(const esc_scenario* s) { return s ? s->value.num_users() : 0; }

size_t esc_scenario_num_slots(const esc_scenario* s) { return s ? s->value.num_slots() : 0; }

esc_status esc_scenario_with_capacity(const esc_scenario* s, double s_max, esc_scenario** out) {
  ESC_REQUIRE(s && out, "scenario and out must not be null");
  return guarded([&] {
    auto scaled = esscoord::with_capacity(s->value, s_max);
    esscoord::ensure_valid(scaled);
    *out = new esc_scenario{std::move(scaled)};
    return ESC_OK;
  });
}

esc_status esc_scenario_with_deadline_extension(const esc_scenario* s, size_t extra_slots, esc_scenario** out) {
  ESC_REQUIRE(s && out, "scenario and out must not be null");
  return guarded([&] {
    auto extended = esscoord::with_deadline_extension(s->value, extra_slots);
    esscoord::ensure_valid(extended);
    *out = new esc_scenario{std::move(extended)};
    return ESC_OK;
  });
}

esc_status esc_coord_params_default(const esc_scenario* s, esc_coord_params* out) {
  ESC_REQUIRE(s && out, "scenario and out must not be null");
  const auto p = esscoord::CoordinatorParams::defaults_for(s->value.ess);
  *out = {p.step_rho, p.descent_floor, p.max_iters, p.accept_tol};
  return ESC_OK;
}

esc_status esc_run(const esc_scenario* s, esc_mode mode, const esc_coord_params* params, esc_result** out) {
  ESC_REQUIRE(s && out, "scenario and out must not be null");
  ESC_REQUIRE(mode == ESC_MODE_NO_ESS || mode == ESC_MODE_SELFISH || mode == ESC_MODE_COOPERATIVE, "unknown mode");
  return guarded([&] {
    const auto p = to_params(s->value, params);
    if (auto issues = p.validate(s->value.ess); !issues.empty()) throw esscoord::ValidationError(std::move(issues));
    *out = new esc_result{esscoord::run_mode(s->value, static_cast<esscoord::Mode>(mode), p, tolerances())};
    return ESC_OK;
  });
}

void esc_result_free(esc_result* r) { delete r; }

double esc_result_total_cost(const esc_result* r) { return r ? r->value.total_cost : 0.0; }

esc_status esc_result_user_cost(const esc_result* r, size_t user, double* out) {
  ESC_REQUIRE(r && out, "result and out must not be null");
  ESC_REQUIRE(user < r->value.dispatch.size(), "user index out of range");
  *out = r->value.dispatch[user].cost;
  return ESC_OK;
}

esc_status esc_result_plan(const esc_result* r, double* charge, double* discharge, size_t capacity) {
  ESC_REQUIRE(r && charge && discharge, "arguments must not be null");
  const auto& plan = r->value.plan;
  const std::size_t m = plan.num_users();
  const std::size_t n = plan.num_slots();
  ESC_REQUIRE(capacity >= m * n, "output buffers are too small");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      charge[i * n + j] = plan.charge(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      discharge[i * n + j] = plan.discharge(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  return ESC_OK;
}

esc_status esc_result_soc(const esc_result* r, double* out, size_t capacity) {
  ESC_REQUIRE(r && out, "arguments must not be null");
  ESC_REQUIRE(capacity >= r->value.soc.size(), "output buffer is too small");
  std::copy(r->value.soc.begin(), r->value.soc.end(), out);
  return ESC_OK;
}

size_t esc_result_num_iterations(const esc_result* r) {
  return r && r->value.trace ? r->value.trace->records.size() : 0;
}

int esc_result_hit_iteration_limit(const esc_result* r) { return r && r->value.hit_iteration_limit ? 1 : 0; }

esc_status esc_result_json(const esc_result* r, char** out) {
  ESC_REQUIRE(r && out, "result and out must not be null");
  return guarded([&] {
    *out = copy_string(esscoord::result_json(r->value));
    return ESC_OK;
  });
}

esc_status esc_result_write_json(const esc_result* r, const char* path) {
  ESC_REQUIRE(r && path, "result and path must not be null");
  return guarded([&] { return write_file(path, esscoord::result_json(r->value)); });
}

esc_status esc_result_write_trace_csv(const esc_result* r, const char* path) {
  ESC_REQUIRE(r && path, "result and path must not be null");
  ESC_REQUIRE(r->value.trace.has_value(), "only selfish runs carry an iteration trace");
  return guarded([&] {
    std::ostringstream text;
    esscoord::write_trace_csv(text, *r->value.trace);
    return write_file(path, text.str());
  });
}

esc_status esc_compare(const esc_scenario* s, const esc_coord_params* params, char** json_out) {
  ESC_REQUIRE(s && json_out, "scenario and out must not be null");
  return guarded([&] {
    const auto p = to_params(s->value, params);
    if (auto issues = p.validate(s->value.ess); !issues.empty()) throw esscoord::ValidationError(std::move(issues));
    *json_out = copy_string(esscoord::comparison_json(esscoord::compare_modes(s->value, p, tolerances())));
    return ESC_OK;
  });
}

esc_status esc_oracle_brute_force(const esc_scenario* s, double grid_step, char** json_out) {
  ESC_REQUIRE(s && json_out, "scenario and out must not be null");
  return guarded([&] {
    const auto best = esscoord::brute_force_cooperative(s->value, grid_step, 5'000'000, tolerances());
    nlohmann::ordered_json doc;
    doc["grid_step"] = grid_step;
    doc["total_cost"] = best.total_cost;
    doc["plans_checked"] = best.plans_checked;
    doc["plans_feasible"] = best.plans_feasible;
    std::vector<std::vector<double>> c, d;
    for (std::size_t m = 0; m < best.plan.num_users(); ++m) {
      const auto row = best.plan.row(m);
      c.push_back(row.charge);
      d.push_back(row.discharge);
    }
    doc["plan"] = {{"charge", c}, {"discharge", d}};
    *json_out = copy_string(doc.dump(2) + "\n");
    return ESC_OK;
  });
}

esc_status esc_check_plan_json(const esc_scenario* s, const char* result_text, double tol, int* feasible,
                               char** report_out) {
  ESC_REQUIRE(s && result_text && feasible, "arguments must not be null");
  return guarded([&] {
    const auto plan = esscoord::plan_from_result_json(result_text);
    if (plan.num_users() != s->value.num_users() || plan.num_slots() != s->value.num_slots())
      throw std::invalid_argument("plan shape does not match the scenario");
    const auto report = esscoord::check_plan_feasible(plan, s->value.ess, tol);
    *feasible = report.feasible ? 1 : 0;
    if (report_out) {
      std::string text;
      for (const auto& v : report.violations) text += v.describe() + "\n";
      *report_out = copy_string(text);
    }
    return ESC_OK;
  });
}

esc_status esc_dump_cooperative_lp(const esc_scenario* s, const char* path) {
  ESC_REQUIRE(s && path, "scenario and path must not be null");
  return guarded([&] {
    std::ostringstream text;
    esscoord::lp::dump(esscoord::build_cooperative_lp(s->value).problem, text);
    return write_file(path, text.str());
  });
}

}  // extern "C"
