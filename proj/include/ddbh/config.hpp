#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ddbh/dynamics.hpp"
#include "ddbh/model.hpp"
#include "ddbh/oracle.hpp"
#include "ddbh/sweep.hpp"

namespace ddbh {

struct SweepConfig {
  double delta_min = 0.5, delta_max = 0.5;
  int delta_points = 1;
  double epsilon_min = 20.0, epsilon_max = 70.0;
  int epsilon_points = 11;
  int workers = 1;
  bool critical_scan = false;
  ScanOptions scan;
  std::vector<int> sizes{30, 40, 50, 60};

  std::vector<double> delta_grid() const;
  std::vector<double> epsilon_grid() const;
};

struct OracleConfig {
  FockConfig fock;
  std::vector<double> u_values{0.0, -1e-3, -1e-2, -2e-2};
};

struct TopologyConfig {
  int k_points = 1024;
  double omega = 0.0;
};

struct OutputConfig {
  std::string directory = "out";
  /// Also write the full final G and F matrices into final_state.json.
  bool dump_matrices = false;
};

struct RunConfig {
  ChainParams chain;
  IntegratorOptions integrator;
  SweepConfig sweep;
  OracleConfig oracle;
  TopologyConfig topology;
  OutputConfig output;

  void validate() const;
};

/// Parses an INI document with sections chain, integrator, sweep, oracle,
/// topology and output.  chain.N, chain.delta_base and chain.epsilon_base are
/// required.  `overrides` are "section.key=value" strings applied on top of
/// the file.  Errors are ConfigError with "<source>:<line>: <section.key>: ..."
/// diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Accepts plain numbers and multiples of pi such as "pi/3", "-2pi/3", "0.5*pi".
double parse_angle(const std::string& text);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace ddbh
