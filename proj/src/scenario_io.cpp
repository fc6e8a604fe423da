// Scenario document reader. The document is JSON with comments allowed:
//
// {
//   "horizon": 24,
//   "ess": { "s_min": 20, "s_max": 200, "s_initial": 20, "c_max": 30, "d_max": 30,
//            "eff_charge": 0.87, "eff_discharge": 0.87,
//            "sell_price": 20,            // scalar broadcast or M x N array
//            "buy_price": [[...], ...] },
//   "users": [
//     { "name": "office",
//       "net_energy_csv": "office.csv",  // or inline "net_energy": [...]
//       "grid_cost": { "price": 45 },    // or "segments": [{"from":0,"slope":45}, ...]
//                                        // or "per_slot": [[segments], ...]
//       "loads": [ { "name": "ac", "start": 7, "end": 19,
//                    "l_min": 35, "l_max": 70, "energy": 600 } ] } ]
// }

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "esscoord/errors.hpp"
#include "esscoord/scenario.hpp"

namespace esscoord {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw ParseError(where + ": expected an integer");
  const auto value = v.get<long long>();
  if (value < 0) throw ParseError(where + ": expected a non-negative integer");
  return static_cast<std::size_t>(value);
}

Matrix price_matrix(const json& v, std::size_t m, std::size_t n, const std::string& where) {
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(n);
  if (v.is_number()) return Matrix::Constant(rows, cols, v.get<double>());
  if (!v.is_array() || v.size() != m) throw ParseError(where + ": expected a number or an array of " + std::to_string(m) + " rows");
  Matrix out(rows, cols);
  for (std::size_t u = 0; u < m; ++u) {
    const auto& row = v[u];
    const auto row_where = where + "[" + std::to_string(u + 1) + "]";
    if (row.is_number()) {
      out.row(static_cast<Eigen::Index>(u)).setConstant(row.get<double>());
      continue;
    }
    if (!row.is_array() || row.size() != n)
      throw ParseError(row_where + ": expected " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) out(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(k)) = number(row[k], row_where);
  }
  return out;
}

std::vector<GridSegment> segments(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ParseError(where + ": expected a non-empty array of segments");
  std::vector<GridSegment> out;
  for (const auto& s : v)
    out.push_back({number(require(s, "from", where), where + ".from"), number(require(s, "slope", where), where + ".slope")});
  return out;
}

GridCostModel grid_cost(const json& v, std::size_t n, const std::string& where) {
  if (v.contains("price")) return GridCostModel::linear(n, number(v.at("price"), where + ".price"));
  if (v.contains("segments")) return GridCostModel::uniform(n, segments(v.at("segments"), where + ".segments"));
  if (v.contains("per_slot")) {
    const auto& slots = v.at("per_slot");
    if (!slots.is_array() || slots.size() != n)
      throw ParseError(where + ".per_slot: expected " + std::to_string(n) + " slot entries");
    GridCostModel model;
    for (std::size_t k = 0; k < n; ++k)
      model.per_slot.push_back(segments(slots[k], where + ".per_slot[" + std::to_string(k + 1) + "]"));
    return model;
  }
  throw ParseError(where + ": expected one of 'price', 'segments', 'per_slot'");
}

ControllableLoad load(const json& v, const std::string& where) {
  ControllableLoad l;
  if (v.contains("name")) l.name = v.at("name").get<std::string>();
  l.start_slot = count(require(v, "start", where), where + ".start");
  l.end_slot = count(require(v, "end", where), where + ".end");
  l.l_min = number(require(v, "l_min", where), where + ".l_min");
  l.l_max = number(require(v, "l_max", where), where + ".l_max");
  l.energy_total = number(require(v, "energy", where), where + ".energy");
  return l;
}

Scenario from_json(const json& doc, const std::filesystem::path& base_dir) {
  Scenario s;
  s.grid.num_slots = count(require(doc, "horizon", "scenario"), "horizon");
  const auto& users = require(doc, "users", "scenario");
  if (!users.is_array()) throw ParseError("users: expected an array");
  const std::size_t m = users.size();
  const std::size_t n = s.grid.num_slots;

  const auto& ess = require(doc, "ess", "scenario");
  s.ess.s_min = number(require(ess, "s_min", "ess"), "ess.s_min");
  s.ess.s_max = number(require(ess, "s_max", "ess"), "ess.s_max");
  s.ess.s_initial = ess.contains("s_initial") ? number(ess.at("s_initial"), "ess.s_initial") : s.ess.s_min;
  s.ess.c_max = number(require(ess, "c_max", "ess"), "ess.c_max");
  s.ess.d_max = number(require(ess, "d_max", "ess"), "ess.d_max");
  s.ess.eff_charge = number(require(ess, "eff_charge", "ess"), "ess.eff_charge");
  s.ess.eff_discharge = number(require(ess, "eff_discharge", "ess"), "ess.eff_discharge");
  s.ess.sell_price = price_matrix(require(ess, "sell_price", "ess"), m, n, "ess.sell_price");
  s.ess.buy_price = price_matrix(require(ess, "buy_price", "ess"), m, n, "ess.buy_price");

  for (std::size_t u = 0; u < m; ++u) {
    const auto& uj = users[u];
    const auto where = "users[" + std::to_string(u + 1) + "]";
    UserProfile p;
    p.name = uj.contains("name") ? uj.at("name").get<std::string>() : "user" + std::to_string(u + 1);
    if (uj.contains("net_energy_csv")) {
      p.net_energy = read_net_energy_csv(base_dir / uj.at("net_energy_csv").get<std::string>());
    } else {
      const auto& inline_values = require(uj, "net_energy", where);
      if (!inline_values.is_array()) throw ParseError(where + ".net_energy: expected an array");
      for (const auto& v : inline_values) p.net_energy.push_back(number(v, where + ".net_energy"));
    }
    p.grid_cost = grid_cost(require(uj, "grid_cost", where), n, where + ".grid_cost");
    if (uj.contains("loads")) {
      const auto& loads = uj.at("loads");
      if (!loads.is_array()) throw ParseError(where + ".loads: expected an array");
      for (std::size_t q = 0; q < loads.size(); ++q)
        p.loads.push_back(load(loads[q], where + ".loads[" + std::to_string(q + 1) + "]"));
    }
    s.users.push_back(std::move(p));
  }
  return s;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<double> read_net_energy_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open net-energy file " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "slot,net_kwh")
    throw ParseError(path.string() + ": expected header 'slot,net_kwh'");
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError(where + ": expected exactly two fields");
    const std::string slot_text = trim(line.substr(0, comma));
    const std::string value_text = trim(line.substr(comma + 1));
    char* end = nullptr;
    const long slot = std::strtol(slot_text.c_str(), &end, 10);
    if (slot_text.empty() || *end != '\0') throw ParseError(where + ": slot is not an integer");
    if (slot != static_cast<long>(values.size()) + 1)
      throw ParseError(where + ": expected slot " + std::to_string(values.size() + 1));
    const double value = std::strtod(value_text.c_str(), &end);
    if (value_text.empty() || *end != '\0' || !std::isfinite(value))
      throw ParseError(where + ": net_kwh is not a finite decimal number");
    values.push_back(value);
  }
  return values;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario document: ") + e.what());
  }
  Scenario s;
  try {
    s = from_json(doc, base_dir);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario document: ") + e.what());
  }
  ensure_valid(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.parent_path());
}

}  // namespace esscoord
