#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ddbh/errors.hpp"
#include "ddbh/sweep.hpp"

using namespace ddbh;

namespace {

ChainParams chain(int n) {
  ChainParams p;
  p.N = n;
  p.N0 = ChainParams::default_border(n);
  p.phi = M_PI / 3;
  p.U = -2e-4;
  p.kappa = 1.0;
  return p;
}

std::vector<std::optional<int>> nu_of(const std::string& s) {
  std::vector<std::optional<int>> v;
  for (char c : s) v.push_back(c == '?' ? std::nullopt : std::optional<int>(c - '0'));
  return v;
}

bool same(const PhasePoint& a, const PhasePoint& b) {
  return a.outcome == b.outcome && a.phase == b.phase && a.mean_density == b.mean_density &&
         a.max_fluct == b.max_fluct && a.nu_profile == b.nu_profile && a.alpha == b.alpha;
}

}  // namespace

TEST_CASE("bulk range excludes the border regions") {
  ChainParams p = chain(40);
  const auto [first, last] = bulk_range(p);
  CHECK(first == 5);   // site 6
  CHECK(last == 34);   // up to site 34
}

TEST_CASE("density split lies between the two turning points") {
  const ChainParams p = chain(40);
  const double d = 0.5 - 2e-4 + 2.0 * std::cos(M_PI / 3);
  const double disc = d * d - 0.75;
  const double n1 = (-2 * d + std::sqrt(disc)) / 3 / (2 * p.U);
  const double n2 = (-2 * d - std::sqrt(disc)) / 3 / (2 * p.U);
  CHECK(density_split(0.5, p) == doctest::Approx(std::sqrt(n1 * n2)));
  CHECK(density_split(0.5, p) > 1400.0);
  CHECK(density_split(0.5, p) < 3600.0);
  ChainParams lin = p;
  lin.U = 0.0;
  CHECK(std::isinf(density_split(0.5, lin)));
}

TEST_CASE("classification rules") {
  const ChainParams p = chain(12);  // N0 = 2, bulk sites 3..9
  PhasePoint pt;
  pt.outcome = Outcome::Converged;
  pt.rho_split = 100.0;
  pt.mean_density = 10.0;
  pt.nu_profile = nu_of("000000000000");
  CHECK(classify_phase(pt, p) == Phase::I);
  pt.mean_density = 1000.0;
  CHECK(classify_phase(pt, p) == Phase::III);
  pt.nu_profile = nu_of("100000000001");  // border sites only
  CHECK(classify_phase(pt, p) == Phase::III);
  pt.nu_profile = nu_of("000010000000");
  CHECK(classify_phase(pt, p) == Phase::II);
  pt.outcome = Outcome::Oscillating;
  CHECK(classify_phase(pt, p) == Phase::Unstable);
}

TEST_CASE("interface site") {
  const ChainParams p = chain(12);
  CHECK(interface_site(nu_of("000111100000"), p) == 8);
  CHECK(interface_site(nu_of("000111111111"), p) == 10);
  CHECK(interface_site(nu_of("000000000000"), p) == std::nullopt);
  CHECK(interface_site(nu_of("00011?110000"), p) == 9);
  CHECK(interface_site(nu_of("0001"), p) == std::nullopt);
}

TEST_CASE("line fit") {
  const LineFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_err == doctest::Approx(0.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(std::isinf(fit_line({1, 2}, {1, 3}).slope_err));
  CHECK_THROWS_AS(fit_line({1}, {1}), ParameterError);
}

TEST_CASE("parallel_for covers every index and propagates failures") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("phase diagram is deterministic and independent of the worker count") {
  const ChainParams p = chain(12);
  IntegratorOptions opts;
  opts.t_max = 150;
  const std::vector<double> dg{0.0, 0.5}, eg{20.0, 45.0};
  const PhaseDiagram a = phase_diagram(dg, eg, p, opts, 1);
  const PhaseDiagram b = phase_diagram(dg, eg, p, opts, 3);
  REQUIRE(a.points.size() == 4);
  for (size_t i = 0; i < a.points.size(); ++i) CHECK(same(a.points[i], b.points[i]));
  CHECK(a.at(1, 0).delta == 0.5);
  CHECK(a.at(1, 0).epsilon == 20.0);
  const PhasePoint again = phase_point(0.5, 45.0, p, opts);
  CHECK(same(again, a.at(1, 1)));
  for (const auto& pt : a.points) {
    if (pt.phase == Phase::II) {
      bool bulk_topo = false;
      const auto [f, l] = bulk_range(p);
      for (int j = f; j < l; ++j) bulk_topo |= pt.nu_profile[j] == 1;
      CHECK(bulk_topo);
    }
  }
  CHECK_THROWS_AS(phase_diagram({}, eg, p, opts, 1), ParameterError);
}

TEST_CASE("critical scan on a short chain") {
  const ChainParams p = chain(20);
  IntegratorOptions opts;
  opts.t_max = 300;
  ScanOptions scan;
  scan.coarse_step = 1.0;
  scan.fine_step = 0.25;
  scan.refine_sites = {9};
  const CriticalScan cs = critical_drive_scan(0.5, 36.0, 46.0, p, opts, scan);
  CHECK(cs.epsilon_grid.size() == cs.points.size());
  CHECK(cs.epsilon_grid.size() > 11);
  CHECK(std::is_sorted(cs.epsilon_grid.begin(), cs.epsilon_grid.end()));
  CHECK(cs.resolved[9]);
  CHECK(cs.eps_c_per_site[9] > 36.0);
  CHECK(cs.eps_c_per_site[9] < 46.0);
  CHECK(cs.eps_c1 <= cs.eps_c_per_site[9] + 1.0);
  CHECK_THROWS_AS(critical_drive_scan(0.5, 40.0, 39.0, p, opts, scan), ParameterError);
}

TEST_CASE("linear chain has no critical point") {
  ChainParams p = chain(20);
  p.U = 0.0;
  IntegratorOptions opts;
  ScanOptions scan;
  scan.coarse_step = 1.0;
  scan.fine_step = 0.5;
  scan.refine_sites = {9};
  CHECK_THROWS_AS(critical_drive_scan(0.5, 10.0, 14.0, p, opts, scan), ResolutionError);
  // The response slope of the mid site does not depend on the length.
  std::vector<double> slopes, logs, logn;
  for (int n : {40, 60, 80}) {
    ChainParams q = p;
    q.N = n;
    q.N0 = 3;
    const double a1 = std::abs(phase_point(0.5, 10.0, q, opts).alpha[n / 2 - 1]);
    const double a2 = std::abs(phase_point(0.5, 11.0, q, opts).alpha[n / 2 - 1]);
    slopes.push_back(a2 - a1);
    logs.push_back(std::log(a2 - a1));
    logn.push_back(std::log(n));
  }
  CHECK(slopes[2] == doctest::Approx(slopes[1]).epsilon(1e-2));
  CHECK(std::abs(fit_line(logn, logs).slope) < 0.05);
}

TEST_CASE("edge scaling of the smallest singular value") {
  const ChainParams p = chain(20);
  const EdgeScaling es = edge_scaling({10, 20, 30}, 0.5 - 2e-4 - 0.8 * 2000 * 1e-3 * 1.0, cplx(-0.4, 0.0), p);
  CHECK(es.fit.slope < 0.0);
  CHECK(es.xi > 0.0);
  CHECK(es.s_min[2] < es.s_min[0]);
}
