#include "ddbh/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "ddbh/errors.hpp"
#include "ddbh/topology.hpp"

namespace ddbh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ChainParams at_point(const ChainParams& params, double delta, double epsilon) {
  ChainParams p = params;
  p.delta_base = delta;
  p.epsilon_base = epsilon;
  p.gauge = Gauge::HoppingPhase;
  return p;
}

bool bulk_has(const std::vector<std::optional<int>>& nu, const ChainParams& params, int value) {
  const auto [first, last] = bulk_range(params);
  for (int j = first; j < last && j < static_cast<int>(nu.size()); ++j)
    if (nu[j] && *nu[j] == value) return true;
  return false;
}

bool bulk_trivial(const std::vector<std::optional<int>>& nu, const ChainParams& params) {
  const auto [first, last] = bulk_range(params);
  if (static_cast<int>(nu.size()) < last) return false;
  for (int j = first; j < last; ++j)
    if (!nu[j] || *nu[j] != 0) return false;
  return true;
}

PhasePoint evaluate(double delta, double epsilon, const ChainParams& params,
                    const IntegratorOptions& opts) {
  const ChainParams p = at_point(params, delta, epsilon);
  const SiteProfiles prof = build_profiles(p);
  PhasePoint pt;
  pt.delta = delta;
  pt.epsilon = epsilon;
  pt.rho_split = density_split(delta, p);

  const SteadyStateReport rep = find_steady_state(p, prof, opts);
  pt.outcome = rep.outcome;
  pt.residual = rep.residual;
  pt.t_converged = rep.t_converged;
  pt.state = rep.state;
  pt.alpha = rep.state.alpha;
  pt.fluct = rep.state.G.diagonal().real();
  pt.mean_density = pt.alpha.cwiseAbs2().mean();
  pt.max_fluct = pt.fluct.maxCoeff();
  if (rep.outcome == Outcome::Converged) {
    const EffectiveQuadratic q = effective_quadratic(p, prof, pt.alpha);
    pt.nu_profile = local_winding_profile(q, p);
  }
  pt.phase = classify_phase(pt, p);
  return pt;
}

// Midpoint of the interval where |alpha_j| grows fastest, plus whether that
// maximum stands out against the median coarse-grid gradient.  Comparing with
// the refined grid would let a well-sampled jump set its own reference.
std::pair<double, bool> max_gradient(const std::vector<double>& eps, const std::vector<double>& amp,
                                     const std::vector<double>& coarse_eps,
                                     const std::vector<double>& coarse_amp) {
  if (eps.size() < 2 || coarse_eps.size() < 2) return {kNaN, false};
  auto gradients = [](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> g(x.size() - 1);
    for (size_t i = 0; i + 1 < x.size(); ++i) g[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    return g;
  };
  const std::vector<double> grad = gradients(eps, amp);
  const auto it = std::max_element(grad.begin(), grad.end());
  const size_t i = static_cast<size_t>(it - grad.begin());
  std::vector<double> mag = gradients(coarse_eps, coarse_amp);
  for (double& g : mag) g = std::abs(g);
  std::nth_element(mag.begin(), mag.begin() + mag.size() / 2, mag.end());
  const double median = mag[mag.size() / 2];
  return {0.5 * (eps[i] + eps[i + 1]), *it > 0.0 && *it > 2.0 * median};
}

}  // namespace

std::string to_string(Phase p) {
  switch (p) {
    case Phase::I: return "I";
    case Phase::II: return "II";
    case Phase::III: return "III";
    case Phase::Unstable: return "unstable";
  }
  return "unknown";
}

std::pair<int, int> bulk_range(const ChainParams& params) {
  // 1-based N0 < j < N - N0  ->  0-based [N0, N - N0 - 1).
  return {params.N0, std::max(params.N0, params.N - params.N0 - 1)};
}

double density_split(double delta, const ChainParams& params) {
  const double U = params.U;
  const double kappa = params.kappa;
  const double d = delta + U + 2.0 * params.J * std::cos(params.phi);
  if (U == 0.0) return std::numeric_limits<double>::infinity();
  // Turning points of f(n) = n[(d + x)^2 + kappa^2/4], x = 2Un:
  //   3x^2 + 4 d x + d^2 + kappa^2/4 = 0.
  const double disc = d * d - 0.75 * kappa * kappa;
  if (disc <= 0.0) return std::abs((-2.0 * d / 3.0) / (2.0 * U));
  const double x1 = (-2.0 * d + std::sqrt(disc)) / 3.0;
  const double x2 = (-2.0 * d - std::sqrt(disc)) / 3.0;
  const double n1 = x1 / (2.0 * U), n2 = x2 / (2.0 * U);
  if (n1 <= 0.0 || n2 <= 0.0) return std::abs((-2.0 * d / 3.0) / (2.0 * U));
  return std::sqrt(n1 * n2);
}

Phase classify_phase(const PhasePoint& point, const ChainParams& params) {
  if (point.outcome != Outcome::Converged) return Phase::Unstable;
  if (bulk_has(point.nu_profile, params, 1)) return Phase::II;
  return point.mean_density < point.rho_split ? Phase::I : Phase::III;
}

PhasePoint phase_point(double delta, double epsilon, const ChainParams& params,
                       const IntegratorOptions& opts) {
  return evaluate(delta, epsilon, params, opts);
}

void parallel_for(size_t count, int workers, const std::function<void(size_t)>& fn) {
  const size_t nthreads = std::min<size_t>(std::max(1, workers), std::max<size_t>(count, 1));
  if (nthreads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (size_t w = 0; w < nthreads; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

PhaseDiagram phase_diagram(const std::vector<double>& delta_grid,
                           const std::vector<double>& epsilon_grid, const ChainParams& params,
                           const IntegratorOptions& opts, int workers) {
  if (delta_grid.empty() || epsilon_grid.empty())
    throw ParameterError("phase_diagram needs non-empty grids");
  params.validate();
  PhaseDiagram pd{delta_grid, epsilon_grid, {}};
  const size_t ne = epsilon_grid.size();
  pd.points.resize(delta_grid.size() * ne);
  parallel_for(pd.points.size(), workers, [&](size_t i) {
    pd.points[i] = evaluate(delta_grid[i / ne], epsilon_grid[i % ne], params, opts);
  });
  return pd;
}

std::optional<int> interface_site(const std::vector<std::optional<int>>& nu,
                                  const ChainParams& params) {
  const auto [first, last] = bulk_range(params);
  if (static_cast<int>(nu.size()) < last) return std::nullopt;
  bool seen_top = false;
  for (int j = first; j < last; ++j) {
    if (nu[j] && *nu[j] == 1) seen_top = true;
    else if (seen_top && nu[j] && *nu[j] == 0) return j + 1;
  }
  if (seen_top) return params.N - params.N0;
  return std::nullopt;
}

CriticalScan critical_drive_scan(double delta, double eps_lo, double eps_hi,
                                 const ChainParams& params, const IntegratorOptions& opts,
                                 const ScanOptions& scan) {
  params.validate();
  if (!(eps_hi > eps_lo)) throw ParameterError("critical scan needs eps_hi > eps_lo");
  if (!(scan.coarse_step > 0.0) || !(scan.fine_step > 0.0) || scan.fine_step > scan.coarse_step)
    throw ParameterError("scan steps must satisfy 0 < fine_step <= coarse_step");
  const int n = params.N;

  // Keyed on the rounded drive so coarse and fine grids merge cleanly.
  std::map<long long, PhasePoint> done;
  auto key = [](double e) { return std::llround(e * 1e9); };

  auto run_batch = [&](const std::vector<double>& eps, const GaussianState* seed) {
    std::vector<PhasePoint> out(eps.size());
    if (scan.warm_start) {
      std::optional<GaussianState> prev;
      if (seed) prev = *seed;
      for (size_t i = 0; i < eps.size(); ++i) {
        IntegratorOptions o = opts;
        if (prev) {
          o.initial = *prev;
          o.initial->t = 0.0;
        }
        out[i] = evaluate(delta, eps[i], params, o);
        prev = out[i].state;
      }
    } else {
      parallel_for(eps.size(), scan.workers,
                   [&](size_t i) { out[i] = evaluate(delta, eps[i], params, opts); });
    }
    for (auto& pt : out) done.emplace(key(pt.epsilon), std::move(pt));
  };

  std::vector<double> coarse;
  for (int m = 0;; ++m) {
    const double e = eps_lo + m * scan.coarse_step;
    if (e > eps_hi + 1e-9) break;
    coarse.push_back(e);
  }
  run_batch(coarse, nullptr);

  std::vector<int> sites = scan.refine_sites;
  if (sites.empty()) {
    const auto [first, last] = bulk_range(params);
    for (int j = first; j < last; ++j) sites.push_back(j);
  }

  std::set<long long> coarse_keys;
  for (double e : coarse) coarse_keys.insert(key(e));

  // Non-converged points carry a transient state and are left out.
  auto amplitudes = [&](int j, std::vector<double>& eps, std::vector<double>& amp,
                        bool coarse_only) {
    eps.clear();
    amp.clear();
    for (const auto& [k, pt] : done) {
      if (pt.outcome != Outcome::Converged) continue;
      if (coarse_only && !coarse_keys.count(k)) continue;
      eps.push_back(pt.epsilon);
      amp.push_back(std::abs(pt.alpha[j]));
    }
  };

  // Brackets of the coarse maximum-gradient intervals, refined in one batch.
  std::map<long long, double> fine;
  std::map<long long, long long> fine_seed;  // fine key -> coarse key of bracket start
  std::vector<double> eps, amp;
  for (int j : sites) {
    if (j < 0 || j >= n) throw ParameterError("refine site out of range");
    amplitudes(j, eps, amp, true);
    if (eps.size() < 2) throw ResolutionError("fewer than two converged points in the coarse scan");
    size_t best = 0;
    double best_grad = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < eps.size(); ++i) {
      const double g = (amp[i + 1] - amp[i]) / (eps[i + 1] - eps[i]);
      if (g > best_grad) {
        best_grad = g;
        best = i;
      }
    }
    const double width = eps[best + 1] - eps[best];
    const int sub = std::max(1, static_cast<int>(std::lround(width / scan.fine_step)));
    for (int s = 1; s < sub; ++s) {
      const double e = eps[best] + s * width / sub;
      if (!done.count(key(e))) {
        fine.emplace(key(e), e);
        fine_seed.emplace(key(e), key(eps[best]));
      }
    }
  }
  if (scan.warm_start) {
    // Chain each bracket from its lower coarse point.
    std::map<long long, std::vector<double>> by_seed;
    for (const auto& [k, e] : fine) by_seed[fine_seed[k]].push_back(e);
    for (auto& [seed, list] : by_seed) {
      const GaussianState start = done.at(seed).state;
      run_batch(list, &start);
    }
  } else {
    std::vector<double> list;
    for (const auto& [k, e] : fine) list.push_back(e);
    run_batch(list, nullptr);
  }

  CriticalScan out;
  const ChainParams p0 = at_point(params, delta, eps_lo);
  out.bulk = {params.N0, params.N - params.N0};
  for (auto& [k, pt] : done) {
    out.epsilon_grid.push_back(pt.epsilon);
    out.points.push_back(pt);
  }
  out.eps_c_per_site = Eigen::VectorXd::Constant(n, kNaN);
  out.resolved.assign(n, false);
  std::vector<double> ceps, camp;
  for (int j = 0; j < n; ++j) {
    amplitudes(j, eps, amp, false);
    amplitudes(j, ceps, camp, true);
    const auto [ec, ok] = max_gradient(eps, amp, ceps, camp);
    out.eps_c_per_site[j] = ec;
    out.resolved[j] = ok;
  }
  for (int j : sites) {
    if (!out.resolved[j])
      throw ResolutionError("no distinct transition for site " + std::to_string(j + 1) +
                            " in [" + std::to_string(eps_lo) + ", " + std::to_string(eps_hi) +
                            "]; widen the range or reduce the step");
  }

  out.eps_c1 = kNaN;
  out.eps_c2 = kNaN;
  for (const auto& pt : out.points) {
    if (pt.outcome != Outcome::Converged) continue;
    if (std::isnan(out.eps_c1)) {
      if (bulk_has(pt.nu_profile, p0, 1)) out.eps_c1 = pt.epsilon;
    } else if (bulk_trivial(pt.nu_profile, p0)) {
      out.eps_c2 = pt.epsilon;
      break;
    }
  }
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_line needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.rms_residual = std::sqrt(ssr / n);
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.slope_err = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx)
                             : std::numeric_limits<double>::infinity();
  return f;
}

ScalingFit finite_size_scaling(const std::vector<int>& sizes, double delta, double eps_lo,
                               double eps_hi, const ChainParams& params,
                               const IntegratorOptions& opts, const ScanOptions& scan) {
  if (sizes.size() < 2) throw ParameterError("finite_size_scaling needs at least two sizes");
  ScalingFit fit;
  std::vector<double> lx, ly;
  for (int N : sizes) {
    ChainParams p = params;
    p.N = N;
    if (scan.scale_border) p.N0 = ChainParams::default_border(N);
    const int mid = N / 2 - 1;  // site j = N/2
    ScanOptions s = scan;
    s.refine_sites = {mid};
    const CriticalScan cs = critical_drive_scan(delta, eps_lo, eps_hi, p, opts, s);

    // Central difference about the midpoint of the steepest interval.
    double best = -std::numeric_limits<double>::infinity();
    const PhasePoint* prev = nullptr;
    for (const auto& pt : cs.points) {
      if (pt.outcome != Outcome::Converged) continue;
      if (prev) {
        const double g = (std::abs(pt.alpha[mid]) - std::abs(prev->alpha[mid])) /
                         (pt.epsilon - prev->epsilon);
        best = std::max(best, g);
      }
      prev = &pt;
    }
    fit.sizes.push_back(N);
    fit.eps_c.push_back(cs.eps_c_per_site[mid]);
    fit.derivatives.push_back(best);
    lx.push_back(std::log(static_cast<double>(N)));
    ly.push_back(std::log(best));
  }
  const LineFit lf = fit_line(lx, ly);
  fit.exponent_a = lf.slope;
  fit.exponent_err = lf.slope_err;
  fit.intercept = lf.intercept;
  fit.residual = lf.rms_residual;
  return fit;
}

EdgeScaling edge_scaling(const std::vector<int>& sizes, double delta_tilde, cplx g,
                         const ChainParams& params) {
  EdgeScaling out;
  std::vector<double> xs, ys;
  for (int N : sizes) {
    ChainParams p = params;
    p.N = N;
    EffectiveQuadratic q{Eigen::VectorXd::Constant(N, delta_tilde), Eigen::VectorXcd::Constant(N, g)};
    const SVDAnalysis sv = svd_analysis(build_nambu(q, p));
    out.sizes.push_back(N);
    out.s_min.push_back(sv.s_min);
    out.frobenius_G.push_back(sv.frobenius_G);
    xs.push_back(N);
    ys.push_back(std::log(sv.s_min));
  }
  out.fit = fit_line(xs, ys);
  out.xi = out.fit.slope < 0.0 ? -1.0 / out.fit.slope : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace ddbh
