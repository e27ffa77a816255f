#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ddbh/config.hpp"
#include "ddbh/errors.hpp"
#include "ddbh/io.hpp"

using namespace ddbh;

namespace {

const char* kMinimal =
    "[chain]\n"
    "N = 40\n"
    "delta_base = 0.5\n"
    "epsilon_base = 40\n";

std::string error_of(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config(text, "test.ini", ov);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("angles") {
  CHECK(parse_angle("pi/3") == doctest::Approx(M_PI / 3));
  CHECK(parse_angle("-pi/4") == doctest::Approx(-M_PI / 4));
  CHECK(parse_angle("2pi/3") == doctest::Approx(2 * M_PI / 3));
  CHECK(parse_angle("0.5*pi") == doctest::Approx(M_PI / 2));
  CHECK(parse_angle("pi") == doctest::Approx(M_PI));
  CHECK(parse_angle(" 1.25 ") == 1.25);
  CHECK_THROWS_AS(parse_angle("pi/0"), ConfigError);
  CHECK_THROWS_AS(parse_angle("tau"), ConfigError);
}

TEST_CASE("defaults and required keys") {
  const RunConfig cfg = parse_config(kMinimal);
  CHECK(cfg.chain.N == 40);
  CHECK(cfg.chain.N0 == 5);
  CHECK(cfg.chain.J == 1.0);
  CHECK(cfg.chain.kappa == 1.0);
  CHECK(cfg.chain.profile == Profile::TanhBorder);
  CHECK(cfg.integrator.tol_ss == 1e-6);
  CHECK(cfg.integrator.t_max == 200.0);
  CHECK(cfg.sweep.delta_grid() == std::vector<double>{0.5});
  CHECK(cfg.sweep.epsilon_grid() == std::vector<double>{40.0});

  const std::string missing = error_of("[chain]\nN = 40\ndelta_base = 0.5\n");
  CHECK(missing.find("chain.epsilon_base") != std::string::npos);
  CHECK(missing.find("missing") != std::string::npos);
}

TEST_CASE("diagnostics carry line and field") {
  const std::string bad = std::string(kMinimal) + "U = -2e-4x\n";
  const std::string msg = error_of(bad);
  CHECK(msg.find("test.ini:5") != std::string::npos);
  CHECK(msg.find("chain.U") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "Nx = 3\n").find("chain.Nx: unknown key") !=
        std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[plots]\nx = 1\n").find("unknown section") !=
        std::string::npos);
  CHECK(error_of("[chain\nN = 3\n").find("test.ini:1") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "profile = flat\n").find("chain.profile") !=
        std::string::npos);
  CHECK(!error_of(std::string(kMinimal) + "N0 = 20\n").empty());
  CHECK(!error_of(std::string(kMinimal) + "[sweep]\nepsilon_min = 5\nepsilon_max = 1\n").empty());
  CHECK(!error_of(std::string(kMinimal) + "[integrator]\ntol_ss = 0\n").empty());
}

TEST_CASE("overrides and lists") {
  const RunConfig cfg = parse_config(
      std::string(kMinimal) + "phi = pi/3\n[sweep]\nsizes = 30, 40\nrefine_sites = 20\n[oracle]\nu_values = 0, -1e-3\n",
      "test.ini", {"chain.N=60", "sweep.workers=4", "integrator.ansatz=meanfield"});
  CHECK(cfg.chain.N == 60);
  CHECK(cfg.chain.N0 == 8);
  CHECK(cfg.chain.phi == doctest::Approx(M_PI / 3));
  CHECK(cfg.sweep.workers == 4);
  CHECK(cfg.sweep.scan.workers == 4);
  CHECK(cfg.sweep.sizes == std::vector<int>{30, 40});
  CHECK(cfg.sweep.scan.refine_sites == std::vector<int>{19});
  CHECK(cfg.oracle.u_values == std::vector<double>{0.0, -1e-3});
  CHECK(cfg.integrator.ansatz == Ansatz::MeanField);
  CHECK(error_of(kMinimal, {"chainN=3"}).find("section.key=value") != std::string::npos);
  CHECK(error_of(kMinimal, {"sweep.workers=two"}).find("sweep.workers") != std::string::npos);
}

TEST_CASE("manifest records every setting") {
  const RunConfig cfg = parse_config(kMinimal);
  const nlohmann::json j = to_json(cfg);
  CHECK(j["chain"]["N"] == 40);
  CHECK(j["integrator"]["tol_ss"] == 1e-6);
  CHECK(j["sweep"]["fine_step"] == 0.02);
  CHECK(j["oracle"]["dim"] == 40);
  CHECK(j.contains("topology"));
  CHECK(j.contains("output"));
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2e-4) == "-2e-04");
  CHECK(format_number(1e300) == "1e+300");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(std::stod(format_number(M_PI)) == M_PI);
}

TEST_CASE("CSV schemas") {
  PhaseDiagram pd{{0.0, 1.0}, {10.0, 20.0}, {}};
  for (double d : pd.delta_grid)
    for (double e : pd.epsilon_grid) {
      PhasePoint pt;
      pt.delta = d;
      pt.epsilon = e;
      pt.outcome = Outcome::Converged;
      pt.phase = Phase::I;
      pt.nu_profile = {0, std::nullopt, 1};
      pd.points.push_back(pt);
    }
  std::ostringstream phase, wind;
  write_phase_csv(phase, pd);
  write_winding_csv(wind, pd.points);
  const std::string ps = phase.str();
  CHECK(ps.rfind("delta,epsilon,phase,mean_density,max_fluct,outcome\n", 0) == 0);
  CHECK(std::count(ps.begin(), ps.end(), '\n') == 5);
  CHECK(ps.find('\r') == std::string::npos);
  CHECK(ps.find("1,20,I,0,0,converged\n") != std::string::npos);
  const std::string ws = wind.str();
  CHECK(ws.rfind("delta,epsilon,j,nu_j\n", 0) == 0);
  CHECK(ws.find("0,10,2,NA\n") != std::string::npos);
  CHECK(ws.find("0,10,3,1\n") != std::string::npos);

  Trajectory tr;
  GaussianState s = GaussianState::vacuum(2);
  s.alpha[1] = cplx(1.5, -0.25);
  s.G(1, 1) = 0.125;
  tr.samples.push_back(s);
  std::ostringstream t;
  write_trajectory_csv(t, tr);
  CHECK(t.str() == "t,j,re_alpha,im_alpha,G_jj\n0,1,0,0,0\n0,2,1.5,-0.25,0.125\n");

  std::ostringstream m;
  write_matrix_csv(m, Eigen::MatrixXcd::Identity(2, 2));
  CHECK(m.str() == "row,col,re,im\n1,1,1,0\n1,2,0,0\n2,1,0,0\n2,2,1,0\n");

  std::ostringstream o;
  AnsatzError e;
  e.err_gaussian = 1e-11;
  e.err_meanfield = 1e-6;
  write_oracle_csv(o, {-1e-3}, {e});
  CHECK(o.str() == "U,err_gaussian,err_meanfield\n-0.001,1e-11,1e-06\n");

  ScalingFit fit;
  fit.sizes = {30, 60};
  fit.derivatives = {1.0, 8.0};
  fit.exponent_a = 3.0;
  fit.intercept = -3.0 * std::log(30.0);
  std::ostringstream sc;
  write_scaling_csv(sc, fit);
  CHECK(sc.str().rfind("N,derivative,fit\n30,1,", 0) == 0);

  CriticalScan cs;
  cs.eps_c_per_site = Eigen::VectorXd::Constant(2, 40.5);
  std::ostringstream c;
  write_critical_csv(c, cs);
  CHECK(c.str() == "j,eps_c_j\n1,40.5\n2,40.5\n");
}

TEST_CASE("report JSON") {
  SteadyStateReport r;
  r.outcome = Outcome::Oscillating;
  r.envelope = {1.0, 2.0};
  r.state = GaussianState::vacuum(1);
  const nlohmann::json j = to_json(r);
  CHECK(j["outcome"] == "oscillating");
  CHECK(j["t_converged"].is_null());
  const nlohmann::json st = to_json(r.state, true);
  CHECK(st.contains("G"));
  CHECK(!to_json(r.state, false).contains("F"));
}
