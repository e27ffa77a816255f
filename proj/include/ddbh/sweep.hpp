#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddbh/dynamics.hpp"
#include "ddbh/model.hpp"

namespace ddbh {

enum class Phase { I, II, III, Unstable };
std::string to_string(Phase p);

struct PhasePoint {
  double delta = 0.0;
  double epsilon = 0.0;
  Outcome outcome = Outcome::TimedOut;
  double mean_density = 0.0;
  double max_fluct = 0.0;
  std::vector<std::optional<int>> nu_profile;
  Phase phase = Phase::Unstable;
  /// Low/high density threshold used to separate I from III.
  double rho_split = 0.0;
  double residual = 0.0;
  std::optional<double> t_converged;
  Eigen::VectorXcd alpha;
  Eigen::VectorXd fluct;  // G_jj
  GaussianState state;
};

struct PhaseDiagram {
  std::vector<double> delta_grid;
  std::vector<double> epsilon_grid;
  /// Row-major: index = i_delta * epsilon_grid.size() + i_epsilon.
  std::vector<PhasePoint> points;
  const PhasePoint& at(size_t i_delta, size_t i_epsilon) const {
    return points[i_delta * epsilon_grid.size() + i_epsilon];
  }
};

/// Bulk sites N0 < j < N - N0 as a 0-based half-open range [first, last).
std::pair<int, int> bulk_range(const ChainParams& params);

/// Geometric mean of the two turning-point densities of the homogeneous
/// single-mode Kerr response n[(d + 2Un)^2 + kappa^2/4] = eps^2, with
/// d = Delta + U + 2J cos(phi) (the inflection point when not bistable).
double density_split(double delta, const ChainParams& params);

PhasePoint phase_point(double delta, double epsilon, const ChainParams& params,
                       const IntegratorOptions& opts);

Phase classify_phase(const PhasePoint& point, const ChainParams& params);

/// Evaluates phase_point on the Cartesian grid using `workers` threads.  The
/// result does not depend on the number of workers.
PhaseDiagram phase_diagram(const std::vector<double>& delta_grid,
                           const std::vector<double>& epsilon_grid, const ChainParams& params,
                           const IntegratorOptions& opts, int workers);

/// Runs `fn(i)` for i in [0, count) on a pool of `workers` threads.
void parallel_for(size_t count, int workers, const std::function<void(size_t)>& fn);

struct ScanOptions {
  double coarse_step = 0.5;
  double fine_step = 0.02;
  /// Sites (0-based) whose max-gradient bracket is refined; empty = bulk.
  std::vector<int> refine_sites;
  bool warm_start = false;
  int workers = 1;
  /// finite_size_scaling: border size max(2, round(N/8)) per chain instead
  /// of the fixed params.N0.
  bool scale_border = true;
};

struct CriticalScan {
  Eigen::VectorXd eps_c_per_site;
  std::vector<bool> resolved;
  double eps_c1 = 0.0;
  double eps_c2 = 0.0;
  std::pair<int, int> bulk;  // 1-based (N0, N - N0)
  std::vector<double> epsilon_grid;
  std::vector<PhasePoint> points;  // one per epsilon_grid entry
};

/// Upward drive sweep at fixed delta.  eps_c^j maximizes the finite
/// difference gradient of |alpha_j| in epsilon; eps_c1 is the first drive with
/// a bulk site at nu = 1, eps_c2 the first later drive where the whole bulk
/// is back at nu = 0 (NaN when not reached).  Throws ResolutionError when a
/// refined site shows no distinct gradient maximum.
CriticalScan critical_drive_scan(double delta, double eps_lo, double eps_hi,
                                 const ChainParams& params, const IntegratorOptions& opts,
                                 const ScanOptions& scan);

/// 1-based position of the nu = 1 -> 0 interface in the bulk: the first bulk
/// site with nu = 0 to the right of a nu = 1 site, or N - N0 when the bulk
/// ends in the topological segment.  nullopt when the bulk has no nu = 1 site.
std::optional<int> interface_site(const std::vector<std::optional<int>>& nu,
                                  const ChainParams& params);

struct ScalingFit {
  std::vector<int> sizes;
  std::vector<double> eps_c;
  std::vector<double> derivatives;
  double exponent_a = 0.0;
  double exponent_err = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::optional<double> xi;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_err = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares; slope_err is infinite with fewer than 3 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// d|alpha_{N/2}|/d eps at the mid-site critical drive for each size, and the
/// power-law exponent of its growth with N.
ScalingFit finite_size_scaling(const std::vector<int>& sizes, double delta, double eps_lo,
                               double eps_hi, const ChainParams& params,
                               const IntegratorOptions& opts, const ScanOptions& scan);

struct EdgeScaling {
  std::vector<int> sizes;
  std::vector<double> s_min;
  std::vector<double> frobenius_G;
  LineFit fit;  // log s_min vs N
  double xi = 0.0;
};

/// Smallest singular value of the homogeneous open chain vs N; xi = -1/slope.
EdgeScaling edge_scaling(const std::vector<int>& sizes, double delta_tilde, cplx g,
                         const ChainParams& params);

}  // namespace ddbh
