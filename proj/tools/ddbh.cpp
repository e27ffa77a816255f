// Command-line driver: simulate | sweep | winding | green | oracle | scaling.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddbh/config.hpp"
#include "ddbh/errors.hpp"
#include "ddbh/io.hpp"
#include "ddbh/oracle.hpp"
#include "ddbh/sweep.hpp"
#include "ddbh/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ddbh;

namespace {

struct Output {
  fs::path dir;
  std::vector<std::string> files;

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    files.push_back(name);
    return f;
  }
  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
};

Output prepare_output(const RunConfig& cfg) {
  Output out{cfg.output.directory, {}};
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec || !fs::is_directory(out.dir))
    throw ConfigError("output.directory: cannot create '" + cfg.output.directory + "'");
  return out;
}

void write_manifest(Output& out, const std::string& command, const RunConfig& cfg,
                    const json& results) {
  json m{{"command", command}, {"config", to_json(cfg)}, {"results", results}};
  m["files"] = out.files;
  out.write_json("manifest.json", m);
}

// Steady state in the hopping gauge, where all downstream analysis runs.
struct SteadyPoint {
  ChainParams params;
  SiteProfiles profiles;
  SteadyStateReport report;
};

SteadyPoint steady_point(const RunConfig& cfg) {
  auto [profiles, params] =
      gauge_transform(build_profiles(cfg.chain), cfg.chain, Gauge::HoppingPhase);
  SteadyStateReport rep = find_steady_state(params, profiles, cfg.integrator);
  return {params, profiles, std::move(rep)};
}

int cmd_simulate(const RunConfig& cfg) {
  const auto profiles = build_profiles(cfg.chain);
  const SteadyStateReport rep = find_steady_state(cfg.chain, profiles, cfg.integrator);
  Output out = prepare_output(cfg);
  {
    auto f = out.open("trajectory.csv");
    write_trajectory_csv(f, rep.trajectory);
  }
  out.write_json("final_state.json", to_json(rep.state, cfg.output.dump_matrices));
  out.write_json("report.json", to_json(rep));
  write_manifest(out, "simulate", cfg, to_json(rep));
  std::cout << "outcome " << to_string(rep.outcome) << ", residual "
            << format_number(rep.residual) << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  const PhaseDiagram pd = phase_diagram(cfg.sweep.delta_grid(), cfg.sweep.epsilon_grid(),
                                        cfg.chain, cfg.integrator, cfg.sweep.workers);
  std::optional<CriticalScan> scan;
  if (cfg.sweep.critical_scan)
    scan = critical_drive_scan(cfg.chain.delta_base, cfg.sweep.epsilon_min,
                               cfg.sweep.epsilon_max, cfg.chain, cfg.integrator, cfg.sweep.scan);
  Output out = prepare_output(cfg);
  {
    auto f = out.open("phase_diagram.csv");
    write_phase_csv(f, pd);
  }
  {
    auto f = out.open("winding_profiles.csv");
    write_winding_csv(f, pd.points);
  }
  json results{{"points", pd.points.size()}};
  if (scan) {
    auto f = out.open("critical_scan.csv");
    write_critical_csv(f, *scan);
    results["eps_c1"] = format_number(scan->eps_c1);
    results["eps_c2"] = format_number(scan->eps_c2);
  }
  write_manifest(out, "sweep", cfg, results);
  std::cout << pd.points.size() << " points\n";
  return 0;
}

int cmd_winding(const RunConfig& cfg) {
  const SteadyPoint sp = steady_point(cfg);
  if (sp.report.outcome != Outcome::Converged) {
    std::cerr << "no steady state (" << to_string(sp.report.outcome)
              << "); winding profile undefined\n";
    return 1;
  }
  const EffectiveQuadratic q = effective_quadratic(sp.params, sp.profiles, sp.report.state.alpha);
  PhasePoint pt;
  pt.delta = cfg.chain.delta_base;
  pt.epsilon = cfg.chain.epsilon_base;
  pt.nu_profile = local_winding_profile(q, sp.params, cfg.topology.k_points);
  const SVDAnalysis svd = svd_analysis(build_nambu(q, sp.params));
  Output out = prepare_output(cfg);
  {
    auto f = out.open("winding_profiles.csv");
    write_winding_csv(f, {pt});
  }
  json results{{"svd", to_json(svd)}, {"steady_state", to_json(sp.report)}};
  out.write_json("svd.json", to_json(svd));
  write_manifest(out, "winding", cfg, results);
  return 0;
}

int cmd_green(const RunConfig& cfg) {
  const SteadyPoint sp = steady_point(cfg);
  if (sp.report.outcome != Outcome::Converged) {
    std::cerr << "no steady state (" << to_string(sp.report.outcome)
              << "); Green's function undefined\n";
    return 1;
  }
  const EffectiveQuadratic q = effective_quadratic(sp.params, sp.profiles, sp.report.state.alpha);
  const NambuMatrix nambu = build_nambu(q, sp.params);
  const Eigen::MatrixXcd green = greens_function(nambu, cfg.topology.omega);
  const SVDAnalysis svd = svd_analysis(nambu);
  Output out = prepare_output(cfg);
  {
    auto f = out.open("green.csv");
    write_matrix_csv(f, green);
  }
  out.write_json("svd.json", to_json(svd));
  write_manifest(out, "green", cfg, {{"svd", to_json(svd)}});
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  const auto& us = cfg.oracle.u_values;
  std::vector<AnsatzError> errs(us.size());
  parallel_for(us.size(), cfg.sweep.workers, [&](size_t i) {
    errs[i] = compare_ansatz_error(cfg.chain.epsilon_base, cfg.chain.delta_base, cfg.chain.kappa,
                                   us[i], cfg.oracle.fock, cfg.integrator);
  });
  Output out = prepare_output(cfg);
  {
    auto f = out.open("oracle.csv");
    write_oracle_csv(f, us, errs);
  }
  write_manifest(out, "oracle", cfg, {{"points", us.size()}});
  return 0;
}

int cmd_scaling(const RunConfig& cfg) {
  const ScalingFit fit = finite_size_scaling(cfg.sweep.sizes, cfg.chain.delta_base,
                                             cfg.sweep.epsilon_min, cfg.sweep.epsilon_max,
                                             cfg.chain, cfg.integrator, cfg.sweep.scan);
  Output out = prepare_output(cfg);
  {
    auto f = out.open("scaling.csv");
    write_scaling_csv(f, fit);
  }
  write_manifest(out, "scaling", cfg,
                 {{"exponent_a", fit.exponent_a},
                  {"exponent_err", format_number(fit.exponent_err)},
                  {"eps_c", fit.eps_c}});
  std::cout << "a = " << format_number(fit.exponent_a) << " +- "
            << format_number(fit.exponent_err) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-state simulator for the chiral driven-dissipative Bose-Hubbard chain"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  app.add_option("-c,--config", config_path, "INI configuration file")->required();
  app.add_option("-s,--set", overrides, "Override a config key: section.key=value");
  app.add_option("-o,--out", out_dir, "Output directory (overrides output.directory)");

  const std::vector<std::pair<std::string, std::function<int(const RunConfig&)>>> commands{
      {"simulate", cmd_simulate}, {"sweep", cmd_sweep},   {"winding", cmd_winding},
      {"green", cmd_green},       {"oracle", cmd_oracle}, {"scaling", cmd_scaling}};
  const std::map<std::string, std::string> help{
      {"simulate", "Integrate one point to its steady state"},
      {"sweep", "Phase diagram over the configured (delta, epsilon) grid"},
      {"winding", "Local winding profile and singular values at one point"},
      {"green", "Zero-frequency Green's function at one point"},
      {"oracle", "Gaussian and mean-field errors against the exact single mode"},
      {"scaling", "Finite-size scaling of the mid-chain transition"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

  CLI11_PARSE(app, argc, argv);

  try {
    if (!out_dir.empty()) overrides.push_back("output.directory=" + out_dir);
    if (const char* w = std::getenv("DDBH_WORKERS")) overrides.push_back(std::string("sweep.workers=") + w);
    const RunConfig cfg = load_config(config_path, overrides);
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
