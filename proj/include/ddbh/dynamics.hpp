#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddbh/model.hpp"

namespace ddbh {

/// Variational Gaussian state: mean fields and the two fluctuation correlators
/// G_jk = <b_j^dag b_k>, F_jk = <b_j b_k>.
struct GaussianState {
  double t = 0.0;
  Eigen::VectorXcd alpha;
  Eigen::MatrixXcd G;
  Eigen::MatrixXcd F;

  static GaussianState vacuum(int n);
  int size() const { return static_cast<int>(alpha.size()); }
};

/// Flat layout [alpha; vec(G); vec(F)] used by the integrator.
Eigen::VectorXcd pack(const GaussianState& s);
GaussianState unpack(const Eigen::VectorXcd& y, int n, double t = 0.0);

/// Time derivative of the Gaussian equations of motion.  The returned object
/// holds d(alpha)/dt, dG/dt, dF/dt; its `t` is copied from `state`.
GaussianState gaussian_rhs(const GaussianState& state, const ChainParams& params,
                           const SiteProfiles& profiles);

/// Coherent-state (G = F = 0) reduction of the alpha equation.
Eigen::VectorXcd meanfield_rhs(const Eigen::VectorXcd& alpha, const ChainParams& params,
                               const SiteProfiles& profiles);

/// Applies a_j -> a_j e^{-i psi_j} (psi_j = j phi) to a state, matching
/// `gauge_transform` on the parameters.  `from` is the state's current gauge.
GaussianState gauge_transform_state(const GaussianState& state, const ChainParams& from,
                                    Gauge target);

enum class Ansatz { Gaussian, MeanField };

struct IntegratorOptions {
  double dt_init = 1e-3;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t_max = 200.0;
  /// Spacing of stored trajectory samples; <= 0 keeps only the endpoints.
  double sample_dt = 0.0;

  double tol_ss = 1e-6;
  /// Duration over which the convergence test has to hold, in units of 1/J.
  double ss_window = 1.0;
  double divergence_guard = 1e12;
  /// Tail of the run used for the density envelope.
  double tail_window = 40.0;
  /// Relative spread of the tail envelope above which a non-converged run is
  /// called oscillating.
  double oscillation_band = 1e-3;

  Ansatz ansatz = Ansatz::Gaussian;
  /// Optional start state (default: vacuum).  Must be in the gauge of params.
  std::optional<GaussianState> initial;

  void validate() const;
};

struct Trajectory {
  std::vector<GaussianState> samples;
};

/// Adaptive integration from `initial` up to opts.t_max.  Throws
/// DivergenceError once sum_j |alpha_j|^2 exceeds the guard and
/// StiffnessError on step underflow.
Trajectory integrate(const GaussianState& initial, const ChainParams& params,
                     const SiteProfiles& profiles, const IntegratorOptions& opts);

enum class Outcome { Converged, Oscillating, Diverged, TimedOut };
std::string to_string(Outcome o);

struct SteadyStateReport {
  Outcome outcome = Outcome::TimedOut;
  GaussianState state;
  double residual = 0.0;
  std::optional<double> t_converged;
  std::pair<double, double> envelope{0.0, 0.0};
  /// Samples recorded when opts.sample_dt > 0.
  Trajectory trajectory;
};

SteadyStateReport find_steady_state(const ChainParams& params, const SiteProfiles& profiles,
                                    const IntegratorOptions& opts);

/// Sup norm of the RHS at `state`, and the convergence scale 1 + sup|state|.
double rhs_sup_norm(const GaussianState& state, const ChainParams& params,
                    const SiteProfiles& profiles, Ansatz ansatz = Ansatz::Gaussian);
double state_sup_norm(const GaussianState& state);

/// Newton refinement of an (approximately) stationary state; intended for the
/// few-site benchmark problems where the dense real Jacobian is cheap.
GaussianState polish_steady_state(const GaussianState& state, const ChainParams& params,
                                  const SiteProfiles& profiles, Ansatz ansatz,
                                  double tol = 1e-13, int max_iter = 30);

/// r_j = G_jj / |alpha_j|^2 (+inf where alpha_j = 0).
Eigen::VectorXd fluctuation_ratio(const GaussianState& state);

}  // namespace ddbh
