#include "ddbh/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ddbh/errors.hpp"

namespace ddbh {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "section.key" -> line number of its definition, for diagnostics only.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  for (int no = 1; std::getline(in, line); ++no) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
    } else if (const auto eq = t.find('='); eq != std::string::npos) {
      lines[section + "." + trim(t.substr(0, eq))] = no;
    }
  }
  return lines;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"chain",
       {"N", "J", "phi", "U", "kappa", "delta_base", "epsilon_base", "N0", "profile", "gauge"}},
      {"integrator",
       {"dt_init", "rel_tol", "abs_tol", "t_max", "sample_dt", "tol_ss", "ss_window",
        "divergence_guard", "tail_window", "oscillation_band", "ansatz"}},
      {"sweep",
       {"delta_min", "delta_max", "delta_points", "epsilon_min", "epsilon_max", "epsilon_points",
        "workers", "critical_scan", "coarse_step", "fine_step", "refine_sites", "warm_start",
        "scale_border", "sizes"}},
      {"oracle", {"dim", "tail_tol", "u_values"}},
      {"topology", {"k_points", "omega"}},
      {"output", {"directory", "dump_matrices"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string source, std::map<std::string, int> lines)
      : tree_(tree), source_(std::move(source)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::string where = source_;
    if (auto it = lines_.find(key); it != lines_.end()) where += ":" + std::to_string(it->second);
    throw ConfigError(where + ": " + key + ": " + msg);
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.')))
      return trim(*v);
    return std::nullopt;
  }

  std::string require(const std::string& key) const {
    auto v = raw(key);
    if (!v || v->empty()) fail(key, "required key is missing");
    return *v;
  }

  double to_double(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) fail(key, "expected a number, got '" + s + "'");
    return v;
  }

  int to_int(const std::string& key, const std::string& s) const {
    int v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) fail(key, "expected an integer, got '" + s + "'");
    return v;
  }

  bool to_bool(const std::string& key, const std::string& s) const {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    fail(key, "expected a boolean, got '" + s + "'");
  }

  void get(const std::string& key, double& out) const {
    if (auto v = raw(key)) out = to_double(key, *v);
  }
  void get(const std::string& key, int& out) const {
    if (auto v = raw(key)) out = to_int(key, *v);
  }
  void get(const std::string& key, bool& out) const {
    if (auto v = raw(key)) out = to_bool(key, *v);
  }
  void get(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }
  template <class T>
  void get_list(const std::string& key, std::vector<T>& out) const {
    auto v = raw(key);
    if (!v) return;
    out.clear();
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list entry");
      if constexpr (std::is_same_v<T, int>) out.push_back(to_int(key, item));
      else out.push_back(to_double(key, item));
    }
  }
  template <class F>
  void get_with(const std::string& key, F&& convert) const {
    if (auto v = raw(key)) {
      try {
        convert(*v);
      } catch (const std::exception& e) {
        fail(key, e.what());
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::string source_;
  std::map<std::string, int> lines_;
};

std::vector<double> linspace(double lo, double hi, int n) {
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

std::vector<double> SweepConfig::delta_grid() const {
  return linspace(delta_min, delta_max, delta_points);
}
std::vector<double> SweepConfig::epsilon_grid() const {
  return linspace(epsilon_min, epsilon_max, epsilon_points);
}

double parse_angle(const std::string& text) {
  const std::string s = trim(text);
  static const std::regex re(R"(^([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$)");
  std::smatch m;
  if (std::regex_match(s, m, re)) {
    double coef = 1.0;
    const std::string c = m[1].str();
    if (c == "-") coef = -1.0;
    else if (!c.empty() && c != "+") coef = std::stod(c);
    const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (den == 0.0) throw ConfigError("division by zero in angle '" + text + "'");
    return coef * M_PI / den;
  }
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end)
    throw ConfigError("expected an angle such as 1.047 or pi/3, got '" + text + "'");
  return v;
}

void RunConfig::validate() const {
  chain.validate();
  integrator.validate();
  oracle.fock.validate();
  if (sweep.delta_points < 1 || sweep.epsilon_points < 1)
    throw ConfigError("sweep grid sizes must be >= 1");
  if (sweep.delta_max < sweep.delta_min || sweep.epsilon_max < sweep.epsilon_min)
    throw ConfigError("sweep ranges must be ordered (min <= max)");
  if (sweep.workers < 1) throw ConfigError("sweep.workers must be >= 1");
  if (!(sweep.scan.coarse_step > 0.0) || !(sweep.scan.fine_step > 0.0))
    throw ConfigError("sweep steps must be positive");
  if (topology.k_points < 8) throw ConfigError("topology.k_points must be >= 8");
  if (output.directory.empty()) throw ConfigError("output.directory must not be empty");
}

RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  auto lines = key_lines(text);

  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("override '" + ov + "': expected section.key=value");
    const std::string key = trim(ov.substr(0, eq));
    tree.put(pt::ptree::path_type(key, '.'), trim(ov.substr(eq + 1)));
    lines.erase(key);
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError(source + ": unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        const std::string full = section + "." + key;
        std::string where = source;
        if (auto l = lines.find(full); l != lines.end()) where += ":" + std::to_string(l->second);
        throw ConfigError(where + ": " + full + ": unknown key");
      }
    }
  }

  const Reader r(tree, source, lines);
  RunConfig cfg;
  ChainParams& c = cfg.chain;
  c.N = r.to_int("chain.N", r.require("chain.N"));
  c.delta_base = r.to_double("chain.delta_base", r.require("chain.delta_base"));
  c.epsilon_base = r.to_double("chain.epsilon_base", r.require("chain.epsilon_base"));
  c.N0 = ChainParams::default_border(c.N);
  r.get("chain.J", c.J);
  r.get_with("chain.phi", [&](const std::string& s) { c.phi = parse_angle(s); });
  r.get("chain.U", c.U);
  r.get("chain.kappa", c.kappa);
  r.get("chain.N0", c.N0);
  r.get_with("chain.profile", [&](const std::string& s) { c.profile = profile_from_string(s); });
  r.get_with("chain.gauge", [&](const std::string& s) { c.gauge = gauge_from_string(s); });

  IntegratorOptions& o = cfg.integrator;
  r.get("integrator.dt_init", o.dt_init);
  r.get("integrator.rel_tol", o.rel_tol);
  r.get("integrator.abs_tol", o.abs_tol);
  r.get("integrator.t_max", o.t_max);
  r.get("integrator.sample_dt", o.sample_dt);
  r.get("integrator.tol_ss", o.tol_ss);
  r.get("integrator.ss_window", o.ss_window);
  r.get("integrator.divergence_guard", o.divergence_guard);
  r.get("integrator.tail_window", o.tail_window);
  r.get("integrator.oscillation_band", o.oscillation_band);
  r.get_with("integrator.ansatz", [&](const std::string& s) {
    if (s == "gaussian") o.ansatz = Ansatz::Gaussian;
    else if (s == "meanfield") o.ansatz = Ansatz::MeanField;
    else throw ConfigError("expected 'gaussian' or 'meanfield', got '" + s + "'");
  });

  SweepConfig& s = cfg.sweep;
  s.delta_min = s.delta_max = c.delta_base;
  s.epsilon_min = s.epsilon_max = c.epsilon_base;
  s.epsilon_points = 1;
  r.get("sweep.delta_min", s.delta_min);
  r.get("sweep.delta_max", s.delta_max);
  r.get("sweep.delta_points", s.delta_points);
  r.get("sweep.epsilon_min", s.epsilon_min);
  r.get("sweep.epsilon_max", s.epsilon_max);
  r.get("sweep.epsilon_points", s.epsilon_points);
  r.get("sweep.workers", s.workers);
  r.get("sweep.critical_scan", s.critical_scan);
  r.get("sweep.coarse_step", s.scan.coarse_step);
  r.get("sweep.fine_step", s.scan.fine_step);
  r.get_list("sweep.refine_sites", s.scan.refine_sites);
  for (int& j : s.scan.refine_sites) --j;  // 1-based in the file
  r.get("sweep.warm_start", s.scan.warm_start);
  r.get("sweep.scale_border", s.scan.scale_border);
  r.get_list("sweep.sizes", s.sizes);

  r.get("oracle.dim", cfg.oracle.fock.dim);
  r.get("oracle.tail_tol", cfg.oracle.fock.tail_tol);
  r.get_list("oracle.u_values", cfg.oracle.u_values);

  r.get("topology.k_points", cfg.topology.k_points);
  r.get("topology.omega", cfg.topology.omega);

  r.get("output.directory", cfg.output.directory);
  r.get("output.dump_matrices", cfg.output.dump_matrices);

  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  cfg.sweep.scan.workers = cfg.sweep.workers;
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, overrides);
}

nlohmann::json to_json(const RunConfig& cfg) {
  const ChainParams& c = cfg.chain;
  const IntegratorOptions& o = cfg.integrator;
  const SweepConfig& s = cfg.sweep;
  std::vector<int> refine;
  for (int j : s.scan.refine_sites) refine.push_back(j + 1);
  return {
      {"chain",
       {{"N", c.N}, {"J", c.J}, {"phi", c.phi}, {"U", c.U}, {"kappa", c.kappa},
        {"delta_base", c.delta_base}, {"epsilon_base", c.epsilon_base}, {"N0", c.N0},
        {"profile", to_string(c.profile)}, {"gauge", to_string(c.gauge)}}},
      {"integrator",
       {{"dt_init", o.dt_init}, {"rel_tol", o.rel_tol}, {"abs_tol", o.abs_tol},
        {"t_max", o.t_max}, {"sample_dt", o.sample_dt}, {"tol_ss", o.tol_ss},
        {"ss_window", o.ss_window}, {"divergence_guard", o.divergence_guard},
        {"tail_window", o.tail_window}, {"oscillation_band", o.oscillation_band},
        {"ansatz", o.ansatz == Ansatz::Gaussian ? "gaussian" : "meanfield"}}},
      {"sweep",
       {{"delta_min", s.delta_min}, {"delta_max", s.delta_max}, {"delta_points", s.delta_points},
        {"epsilon_min", s.epsilon_min}, {"epsilon_max", s.epsilon_max},
        {"epsilon_points", s.epsilon_points}, {"workers", s.workers},
        {"critical_scan", s.critical_scan}, {"coarse_step", s.scan.coarse_step},
        {"fine_step", s.scan.fine_step}, {"refine_sites", refine},
        {"warm_start", s.scan.warm_start}, {"scale_border", s.scan.scale_border},
        {"sizes", s.sizes}}},
      {"oracle",
       {{"dim", cfg.oracle.fock.dim}, {"tail_tol", cfg.oracle.fock.tail_tol},
        {"u_values", cfg.oracle.u_values}}},
      {"topology", {{"k_points", cfg.topology.k_points}, {"omega", cfg.topology.omega}}},
      {"output",
       {{"directory", cfg.output.directory}, {"dump_matrices", cfg.output.dump_matrices}}},
  };
}

}  // namespace ddbh
