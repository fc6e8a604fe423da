#include "esscoord/report_io.hpp"

#include <array>
#include <charconv>

#include <json.hpp>

#include "esscoord/errors.hpp"

namespace esscoord {

namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const Matrix& a) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json costs_json(const std::vector<std::string>& names, const std::vector<double>& costs) {
  ordered_json out = ordered_json::object();
  for (std::size_t m = 0; m < names.size(); ++m) out[names[m]] = costs[m];
  return out;
}

}  // namespace

const char* to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::no_ess: return "no-ess";
    case Mode::selfish: return "selfish";
    case Mode::cooperative: return "cooperative";
  }
  return "unknown";
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

RunResult run_mode(const Scenario& s, Mode mode, const CoordinatorParams& params, const lp::ToleranceSet& tol) {
  RunResult r;
  r.mode = mode;
  for (const auto& u : s.users) r.user_names.push_back(u.name);
  switch (mode) {
    case Mode::no_ess:
      r.plan = ChargePlan::zero(s.num_users(), s.num_slots());
      r.dispatch = baseline_no_ess(s, tol);
      break;
    case Mode::selfish: {
      auto sr = run_selfish(s, params, tol);
      r.plan = std::move(sr.plan);
      r.dispatch = std::move(sr.dispatch);
      r.trace = std::move(sr.trace);
      r.hit_iteration_limit = sr.hit_iteration_limit;
      break;
    }
    case Mode::cooperative: {
      auto cs = solve_cooperative(s, tol);
      r.plan = std::move(cs.plan);
      r.dispatch = std::move(cs.dispatch);
      break;
    }
  }
  r.soc = soc_trajectory(r.plan, s.ess);
  for (const auto& d : r.dispatch) r.total_cost += d.cost;
  return r;
}

std::string result_json(const RunResult& r) {
  ordered_json doc;
  doc["mode"] = to_string(r.mode);
  doc["total_cost"] = r.total_cost;
  ordered_json users = ordered_json::array();
  for (std::size_t m = 0; m < r.dispatch.size(); ++m) {
    const auto& d = r.dispatch[m];
    ordered_json u;
    u["name"] = r.user_names[m];
    u["cost"] = d.cost;
    u["grid_energy"] = d.grid_energy;
    u["load_alloc"] = d.load_alloc;
    u["duals"] = d.duals;
    users.push_back(std::move(u));
  }
  doc["users"] = std::move(users);
  doc["plan"] = {{"charge", matrix_json(r.plan.charge)}, {"discharge", matrix_json(r.plan.discharge)}};
  doc["soc"] = r.soc;
  if (r.trace) {
    doc["iterations"] = r.trace->records.size();
    doc["termination"] = to_string(r.trace->termination());
    doc["hit_iteration_limit"] = r.hit_iteration_limit;
  }
  return doc.dump(2) + "\n";
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "iter,user,cost,predicted_drop,realized_drop,rho,flag\n";
  for (const auto& r : trace.records)
    for (std::size_t m = 0; m < r.costs.size(); ++m)
      out << r.iter << ',' << m + 1 << ',' << format_number(r.costs[m]) << ','
          << format_number(r.predicted_drop[m]) << ',' << format_number(r.realized_drop[m]) << ','
          << format_number(r.rho) << ',' << to_string(r.flag) << '\n';
}

std::string comparison_json(const ComparisonReport& c) {
  ordered_json doc;
  doc["users"] = c.user_names;
  doc["no_ess"] = {{"total", c.baseline_total}, {"per_user", costs_json(c.user_names, c.baseline)}};
  doc["selfish"] = {{"total", c.selfish_total},
                    {"per_user", costs_json(c.user_names, c.selfish)},
                    {"iterations", c.selfish_iterations},
                    {"termination", to_string(c.selfish_termination)}};
  doc["cooperative"] = {{"total", c.cooperative_total}, {"per_user", costs_json(c.user_names, c.cooperative)}};
  doc["checks"] = {{"cooperative_le_selfish", c.cooperative_le_selfish},
                   {"selfish_le_no_ess", c.selfish_le_baseline},
                   {"selfish_each_le_no_ess", c.selfish_each_le_baseline}};
  doc["cooperative_above_selfish"] = c.cooperative_above_selfish;
  return doc.dump(2) + "\n";
}

ChargePlan plan_from_result_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text.begin(), text.end());
    const auto& plan = doc.at("plan");
    const auto charge = plan.at("charge").get<std::vector<std::vector<double>>>();
    const auto discharge = plan.at("discharge").get<std::vector<std::vector<double>>>();
    const std::size_t m = charge.size();
    const std::size_t n = m ? charge.front().size() : 0;
    if (discharge.size() != m) throw ParseError("plan: charge and discharge disagree in shape");
    ChargePlan out = ChargePlan::zero(m, n);
    for (std::size_t i = 0; i < m; ++i) {
      if (charge[i].size() != n || discharge[i].size() != n)
        throw ParseError("plan: rows must all have " + std::to_string(n) + " entries");
      for (std::size_t j = 0; j < n; ++j) {
        out.charge(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = charge[i][j];
        out.discharge(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = discharge[i][j];
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("result document: ") + e.what());
  }
}

}  // namespace esscoord
