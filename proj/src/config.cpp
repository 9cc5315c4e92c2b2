#include "wkg/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wkg {

double RunConfig::required_t_max() const {
  if (run.s_list.empty()) return 2.0;
  double smax = run.s_list.back();
  return (smax * smax + 1.0) / 2.0;  // rim crossing time of the last slice
}

void RunConfig::validate() const {
  coeffs.validate();
  if (!(grid.h > 0.0) || !(grid.L > 0.0))
    throw std::invalid_argument("grid: h and L must be positive");
  if (!(grid.cfl > 0.0) || grid.cfl > 0.5)
    throw std::invalid_argument("grid: cfl must lie in (0, 1/2]");
  if (!(run.epsilon >= 0.0) || !std::isfinite(run.epsilon))
    throw std::invalid_argument("run: epsilon must be finite and >= 0");
  if (!(run.delta >= 0.0))
    throw std::invalid_argument("run: delta must be >= 0");
  if (run.s_list.empty())
    throw std::invalid_argument("run: s_list must not be empty");
  for (size_t i = 0; i < run.s_list.size(); ++i) {
    if (run.s_list[i] < 2.0)
      throw std::invalid_argument("run: every slice must have s >= 2");
    if (i > 0 && run.s_list[i] <= run.s_list[i - 1])
      throw std::invalid_argument("run: s_list must be strictly increasing");
  }
  double need = required_t_max();
  if (run.t_max != 0.0 && run.t_max < need)
    throw std::invalid_argument(
        "run: t_max too small for the last slice (needs >= " +
        std::to_string(need) + ")");
}

namespace {

double parse_double(const std::string& text, int line) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got `" + text + "`");
  }
  while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  if (pos != text.size())
    throw ConfigError(line, "trailing characters after number: `" + text + "`");
  return v;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw, section;
  std::string coeff_body;
  int lineno = 0;
  bool saw_tmax = false;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(lineno, "unterminated section header: " + raw);
      section = line.substr(1, line.size() - 2);
      if (section != "coefficients" && section != "grid" && section != "run" &&
          section != "outputs")
        throw ConfigError(lineno, "unknown section [" + section + "]");
      continue;
    }
    if (section.empty())
      throw ConfigError(lineno, "key-value line before any section: " + raw);
    if (section == "coefficients") {
      // validate the line in isolation so errors carry the file line
      try {
        parse_coefficients(line);
      } catch (const std::exception& e) {
        throw ConfigError(lineno, e.what());
      }
      coeff_body += line;
      coeff_body += '\n';
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(lineno, "expected `key = value`, got: " + raw);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError(lineno, "expected `key = value`, got: " + raw);
    if (section == "grid") {
      if (key == "h")
        cfg.grid.h = parse_double(val, lineno);
      else if (key == "L")
        cfg.grid.L = parse_double(val, lineno);
      else if (key == "cfl")
        cfg.grid.cfl = parse_double(val, lineno);
      else
        throw ConfigError(lineno, "unknown [grid] key: " + key);
    } else if (section == "run") {
      if (key == "epsilon")
        cfg.run.epsilon = parse_double(val, lineno);
      else if (key == "delta")
        cfg.run.delta = parse_double(val, lineno);
      else if (key == "t_max") {
        cfg.run.t_max = parse_double(val, lineno);
        saw_tmax = true;
      } else if (key == "profile")
        cfg.run.profile = val;
      else if (key == "seed")
        cfg.run.seed = (unsigned)parse_double(val, lineno);
      else if (key == "s_list") {
        cfg.run.s_list.clear();
        std::istringstream vs(val);
        std::string tok;
        while (std::getline(vs, tok, ','))
          cfg.run.s_list.push_back(parse_double(trim(tok), lineno));
      } else
        throw ConfigError(lineno, "unknown [run] key: " + key);
    } else {  // outputs
      if (key == "csv")
        cfg.outputs.csv = val;
      else if (key == "json")
        cfg.outputs.json = val;
      else if (key == "checkpoint")
        cfg.outputs.checkpoint = val;
      else if (key == "checkpoint_cadence")
        cfg.outputs.checkpoint_cadence = (int)parse_double(val, lineno);
      else
        throw ConfigError(lineno, "unknown [outputs] key: " + key);
    }
  }
  cfg.coeffs = parse_coefficients(coeff_body);
  if (!saw_tmax || cfg.run.t_max == 0.0) cfg.run.t_max = cfg.required_t_max();
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(lineno, e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace wkg
