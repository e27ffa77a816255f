#include "ddbh/dynamics.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "ddbh/errors.hpp"
#include "ddbh/integrator.hpp"

namespace ddbh {

namespace {

constexpr cplx I{0.0, 1.0};

// Coefficients of the equations of motion, frozen for one chain.
struct Flow {
  int n = 0;
  double U = 0.0;
  double kappa = 0.0;
  cplx hop_up;    // h_{j,j+1} = J e^{-i theta}
  cplx hop_down;  // h_{j+1,j} = J e^{+i theta}
  Eigen::VectorXd delta;
  Eigen::VectorXcd drive;  // eps_j e^{-i psi_j}
  // scratch
  mutable Eigen::VectorXd d;
  mutable Eigen::VectorXcd P;

  Flow(const ChainParams& params, const SiteProfiles& profiles)
      : n(params.N),
        U(params.U),
        kappa(params.kappa),
        hop_up(params.J * std::exp(-I * params.hopping_phase())),
        hop_down(params.J * std::exp(I * params.hopping_phase())),
        delta(profiles.delta),
        drive(params.N),
        d(params.N),
        P(params.N) {
    if (profiles.epsilon.size() != n || profiles.delta.size() != n || profiles.psi.size() != n)
      throw DimensionError("site profiles do not match N=" + std::to_string(n));
    for (int j = 0; j < n; ++j) drive[j] = profiles.epsilon[j] * std::exp(-I * profiles.psi[j]);
  }

  Eigen::Index dim(Ansatz a) const {
    return a == Ansatz::Gaussian ? n + 2 * static_cast<Eigen::Index>(n) * n : n;
  }

  void alpha_rhs(const cplx* a, const cplx* G, const cplx* F, cplx* da) const {
    for (int j = 0; j < n; ++j) {
      cplx nb = 0.0;
      if (j + 1 < n) nb += hop_up * a[j + 1];
      if (j > 0) nb += hop_down * a[j - 1];
      cplx nl = std::norm(a[j]) * a[j];
      if (G != nullptr) {
        const cplx gjj = G[j + static_cast<Eigen::Index>(j) * n];
        const cplx fjj = F[j + static_cast<Eigen::Index>(j) * n];
        nl += 2.0 * a[j] * gjj + std::conj(a[j]) * fjj;
      }
      da[j] = -I * (drive[j] + (delta[j] + U) * a[j] + 2.0 * U * nl + nb) - 0.5 * kappa * a[j];
    }
  }

  void operator()(const Eigen::VectorXcd& y, Eigen::VectorXcd& dy, Ansatz ansatz) const {
    const cplx* a = y.data();
    if (ansatz == Ansatz::MeanField) {
      alpha_rhs(a, nullptr, nullptr, dy.data());
      return;
    }
    const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
    const cplx* G = a + n;
    const cplx* F = G + nn;
    cplx* dG = dy.data() + n;
    cplx* dF = dG + nn;
    alpha_rhs(a, G, F, dy.data());

    // Self-consistent quadratic generator: L = h + diag(d), pairing P.
    for (int j = 0; j < n; ++j) {
      const Eigen::Index jj = j + static_cast<Eigen::Index>(j) * n;
      d[j] = delta[j] + U + 4.0 * U * (std::norm(a[j]) + G[jj].real());
      P[j] = 2.0 * U * (a[j] * a[j] + F[jj]);
    }
    const cplx cu = std::conj(hop_up);    // (L*)_{j,j+1}
    const cplx cd = std::conj(hop_down);  // (L*)_{j+1,j}
    const double hk = 0.5 * kappa;
    for (int k = 0; k < n; ++k) {
      const Eigen::Index col = static_cast<Eigen::Index>(k) * n;
      const cplx* Gk = G + col;
      const cplx* Fk = F + col;
      const cplx* Gkm = k > 0 ? Gk - n : nullptr;
      const cplx* Gkp = k + 1 < n ? Gk + n : nullptr;
      const cplx* Fkm = k > 0 ? Fk - n : nullptr;
      const cplx* Fkp = k + 1 < n ? Fk + n : nullptr;
      for (int j = 0; j < n; ++j) {
        // dG = i(L* G - G L*) + i(P* o F - F* o P) - kappa G
        cplx lg = d[j] * Gk[j];
        if (j + 1 < n) lg += cu * Gk[j + 1];
        if (j > 0) lg += cd * Gk[j - 1];
        cplx gl = Gk[j] * d[k];
        if (Gkm) gl += Gkm[j] * cu;
        if (Gkp) gl += Gkp[j] * cd;
        dG[col + j] = I * (lg - gl) + I * (std::conj(P[j]) * Fk[j] - std::conj(Fk[j]) * P[k]) -
                      2.0 * hk * Gk[j];

        // dF = -i(L F + F L^T) - i(P o G + G^T o P + delta P) - kappa F
        cplx lf = (d[j] + d[k]) * Fk[j];
        if (j + 1 < n) lf += hop_up * Fk[j + 1];
        if (j > 0) lf += hop_down * Fk[j - 1];
        if (Fkp) lf += hop_up * Fkp[j];
        if (Fkm) lf += hop_down * Fkm[j];
        cplx src = P[j] * Gk[j] + G[k + static_cast<Eigen::Index>(j) * n] * P[k];
        if (j == k) src += P[k];
        dF[col + j] = -I * (lf + src) - 2.0 * hk * Fk[j];
      }
    }
  }
};

void project_structure(Eigen::VectorXcd& y, int n) {
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  Eigen::Map<Eigen::MatrixXcd> G(y.data() + n, n, n);
  Eigen::Map<Eigen::MatrixXcd> F(y.data() + n + nn, n, n);
  for (int k = 0; k < n; ++k) {
    G(k, k).imag(0.0);
    for (int j = k + 1; j < n; ++j) {
      const cplx g = 0.5 * (G(j, k) + std::conj(G(k, j)));
      G(j, k) = g;
      G(k, j) = std::conj(g);
      const cplx f = 0.5 * (F(j, k) + F(k, j));
      F(j, k) = f;
      F(k, j) = f;
    }
  }
}

double density(const Eigen::VectorXcd& y, int n) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += std::norm(y[j]);
  return s;
}

double sup_abs(const Eigen::VectorXcd& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

StepControl step_control(const IntegratorOptions& o) {
  StepControl c;
  c.dt_init = o.dt_init;
  c.rel_tol = o.rel_tol;
  c.abs_tol = o.abs_tol;
  return c;
}

GaussianState from_flat(const Eigen::VectorXcd& y, int n, double t, Ansatz a) {
  if (a == Ansatz::Gaussian) return unpack(y, n, t);
  GaussianState s = GaussianState::vacuum(n);
  s.alpha = y.head(n);
  s.t = t;
  return s;
}

Eigen::VectorXcd to_flat(const GaussianState& s, Ansatz a) {
  return a == Ansatz::Gaussian ? pack(s) : Eigen::VectorXcd(s.alpha);
}

}  // namespace

GaussianState GaussianState::vacuum(int n) {
  GaussianState s;
  s.alpha = Eigen::VectorXcd::Zero(n);
  s.G = Eigen::MatrixXcd::Zero(n, n);
  s.F = Eigen::MatrixXcd::Zero(n, n);
  return s;
}

Eigen::VectorXcd pack(const GaussianState& s) {
  const Eigen::Index n = s.alpha.size();
  if (s.G.rows() != n || s.G.cols() != n || s.F.rows() != n || s.F.cols() != n)
    throw DimensionError("GaussianState blocks have inconsistent dimensions");
  Eigen::VectorXcd y(n + 2 * n * n);
  y.head(n) = s.alpha;
  y.segment(n, n * n) = s.G.reshaped();
  y.tail(n * n) = s.F.reshaped();
  return y;
}

GaussianState unpack(const Eigen::VectorXcd& y, int n, double t) {
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  if (y.size() != n + 2 * nn) throw DimensionError("flat state has wrong length");
  GaussianState s;
  s.t = t;
  s.alpha = y.head(n);
  s.G = y.segment(n, nn).reshaped(n, n);
  s.F = y.tail(nn).reshaped(n, n);
  return s;
}

GaussianState gaussian_rhs(const GaussianState& state, const ChainParams& params,
                           const SiteProfiles& profiles) {
  if (state.size() != params.N)
    throw DimensionError("gaussian_rhs: state has " + std::to_string(state.size()) +
                         " sites, expected N=" + std::to_string(params.N));
  const Flow flow(params, profiles);
  const Eigen::VectorXcd y = pack(state);
  Eigen::VectorXcd dy(y.size());
  flow(y, dy, Ansatz::Gaussian);
  return unpack(dy, params.N, state.t);
}

Eigen::VectorXcd meanfield_rhs(const Eigen::VectorXcd& alpha, const ChainParams& params,
                               const SiteProfiles& profiles) {
  if (alpha.size() != params.N)
    throw DimensionError("meanfield_rhs: alpha has length " + std::to_string(alpha.size()) +
                         ", expected N=" + std::to_string(params.N));
  const Flow flow(params, profiles);
  Eigen::VectorXcd da(params.N);
  flow(alpha, da, Ansatz::MeanField);
  return da;
}

GaussianState gauge_transform_state(const GaussianState& state, const ChainParams& from,
                                    Gauge target) {
  if (from.gauge == target) return state;
  // Drive -> hopping gauge multiplies a_j by e^{+i j phi}; the reverse undoes it.
  const double sign = target == Gauge::HoppingPhase ? 1.0 : -1.0;
  const int n = state.size();
  Eigen::VectorXcd ph(n);
  for (int j = 0; j < n; ++j) ph[j] = std::exp(I * (sign * (j + 1) * from.phi));
  GaussianState out = state;
  for (int j = 0; j < n; ++j) {
    out.alpha[j] *= ph[j];
    for (int k = 0; k < n; ++k) {
      out.G(j, k) *= std::conj(ph[j]) * ph[k];
      out.F(j, k) *= ph[j] * ph[k];
    }
  }
  return out;
}

void IntegratorOptions::validate() const {
  if (!(t_max > 0.0)) throw ParameterError("t_max must be > 0");
  for (double v : {dt_init, rel_tol, abs_tol, tol_ss, ss_window, divergence_guard})
    if (!(v > 0.0)) throw ParameterError("integrator tolerances must be > 0");
}

Trajectory integrate(const GaussianState& initial, const ChainParams& params,
                     const SiteProfiles& profiles, const IntegratorOptions& opts) {
  opts.validate();
  if (initial.size() != params.N) throw DimensionError("initial state does not match N");
  const Flow flow(params, profiles);
  const int n = params.N;
  const Ansatz ansatz = opts.ansatz;
  Eigen::VectorXcd y = to_flat(initial, ansatz);

  Trajectory traj;
  double next_sample = initial.t;
  auto rhs = [&](double, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) { flow(x, dx, ansatz); };
  auto project = [&](Eigen::VectorXcd& x) {
    if (ansatz == Ansatz::Gaussian) project_structure(x, n);
  };
  auto observe = [&](double t, const Eigen::VectorXcd& x, const Eigen::VectorXcd&) {
    if (density(x, n) > opts.divergence_guard)
      throw DivergenceError("sum |alpha|^2 exceeded divergence guard at t=" + std::to_string(t));
    if (opts.sample_dt > 0.0 && t >= next_sample) {
      traj.samples.push_back(from_flat(x, n, t, ansatz));
      next_sample += opts.sample_dt * std::max(1.0, std::floor((t - next_sample) / opts.sample_dt) + 1.0);
    } else if (traj.samples.empty()) {
      traj.samples.push_back(from_flat(x, n, t, ansatz));
    }
    return true;
  };
  const double tf = integrate_dopri5(rhs, project, observe, initial.t, y,
                                     initial.t + opts.t_max, step_control(opts));
  if (traj.samples.empty() || traj.samples.back().t < tf)
    traj.samples.push_back(from_flat(y, n, tf, ansatz));
  return traj;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "converged";
    case Outcome::Oscillating: return "oscillating";
    case Outcome::Diverged: return "diverged";
    case Outcome::TimedOut: return "timed_out";
  }
  return "unknown";
}

double state_sup_norm(const GaussianState& s) {
  return std::max({s.alpha.cwiseAbs().maxCoeff(), s.G.cwiseAbs().maxCoeff(),
                   s.F.cwiseAbs().maxCoeff()});
}

double rhs_sup_norm(const GaussianState& state, const ChainParams& params,
                    const SiteProfiles& profiles, Ansatz ansatz) {
  const Flow flow(params, profiles);
  const Eigen::VectorXcd y = to_flat(state, ansatz);
  Eigen::VectorXcd dy(y.size());
  flow(y, dy, ansatz);
  return sup_abs(dy);
}

SteadyStateReport find_steady_state(const ChainParams& params, const SiteProfiles& profiles,
                                    const IntegratorOptions& opts) {
  opts.validate();
  const Flow flow(params, profiles);
  const int n = params.N;
  const Ansatz ansatz = opts.ansatz;
  const GaussianState init = opts.initial ? *opts.initial : GaussianState::vacuum(n);
  if (init.size() != n) throw DimensionError("initial state does not match N");
  Eigen::VectorXcd y = to_flat(init, ansatz);

  SteadyStateReport report;
  double next_sample = init.t;
  double held_since = -1.0;
  double last_residual = 0.0;
  bool converged = false;
  bool diverged = false;
  std::deque<std::pair<double, double>> tail;
  const double t_end = init.t + opts.t_max;

  auto rhs = [&](double, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) { flow(x, dx, ansatz); };
  auto project = [&](Eigen::VectorXcd& x) {
    if (ansatz == Ansatz::Gaussian) project_structure(x, n);
  };
  auto observe = [&](double t, const Eigen::VectorXcd& x, const Eigen::VectorXcd& dx) {
    const double dens = density(x, n);
    if (!(dens <= opts.divergence_guard)) {
      diverged = true;
      return false;
    }
    if (opts.sample_dt > 0.0 && t >= next_sample) {
      report.trajectory.samples.push_back(from_flat(x, n, t, ansatz));
      next_sample += opts.sample_dt * (std::floor((t - next_sample) / opts.sample_dt) + 1.0);
    }
    tail.emplace_back(t, dens);
    while (!tail.empty() && tail.front().first < t - opts.tail_window) tail.pop_front();

    last_residual = sup_abs(dx);
    if (last_residual <= opts.tol_ss * (1.0 + sup_abs(x))) {
      if (held_since < 0.0) held_since = t;
      if (t - held_since >= opts.ss_window) {
        converged = true;
        return false;
      }
    } else {
      held_since = -1.0;
    }
    return true;
  };

  double tf = init.t;
  try {
    tf = integrate_dopri5(rhs, project, observe, init.t, y, t_end, step_control(opts));
  } catch (const DivergenceError&) {
    diverged = true;
  }

  report.state = from_flat(y, n, tf, ansatz);
  if (opts.sample_dt > 0.0 &&
      (report.trajectory.samples.empty() || report.trajectory.samples.back().t < tf))
    report.trajectory.samples.push_back(report.state);
  report.residual = last_residual;
  if (!tail.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [t, v] : tail) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    report.envelope = {lo, hi};
  }

  if (diverged) {
    report.outcome = Outcome::Diverged;
  } else if (converged) {
    report.outcome = Outcome::Converged;
    report.t_converged = held_since;
  } else {
    const auto [lo, hi] = report.envelope;
    const bool bounded = std::isfinite(hi);
    report.outcome = (bounded && hi - lo > opts.oscillation_band * std::max(hi, 1.0))
                         ? Outcome::Oscillating
                         : Outcome::TimedOut;
  }
  return report;
}

GaussianState polish_steady_state(const GaussianState& state, const ChainParams& params,
                                  const SiteProfiles& profiles, Ansatz ansatz, double tol,
                                  int max_iter) {
  const Flow flow(params, profiles);
  const int n = params.N;
  Eigen::VectorXcd y = to_flat(state, ansatz);
  const Eigen::Index m = y.size();
  Eigen::VectorXcd f(m), fp(m);

  auto eval = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& out) { flow(x, out, ansatz); };
  auto to_real = [](const Eigen::VectorXcd& v) {
    Eigen::VectorXd r(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      r[2 * i] = v[i].real();
      r[2 * i + 1] = v[i].imag();
    }
    return r;
  };

  for (int it = 0; it < max_iter; ++it) {
    eval(y, f);
    const double scale = 1.0 + sup_abs(y);
    if (sup_abs(f) <= tol * scale) break;
    Eigen::MatrixXd jac(2 * m, 2 * m);
    for (Eigen::Index i = 0; i < 2 * m; ++i) {
      Eigen::VectorXcd yp = y;
      const double h = 1e-7 * std::max(1.0, std::abs(y[i / 2]));
      yp[i / 2] += (i % 2 == 0) ? cplx(h, 0.0) : cplx(0.0, h);
      eval(yp, fp);
      jac.col(i) = to_real(fp - f) / h;
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-to_real(f));
    for (Eigen::Index i = 0; i < m; ++i) y[i] += cplx(step[2 * i], step[2 * i + 1]);
    if (ansatz == Ansatz::Gaussian) project_structure(y, n);
  }
  return from_flat(y, n, state.t, ansatz);
}

Eigen::VectorXd fluctuation_ratio(const GaussianState& state) {
  const int n = state.size();
  Eigen::VectorXd r(n);
  for (int j = 0; j < n; ++j) {
    const double a2 = std::norm(state.alpha[j]);
    r[j] = a2 > 0.0 ? state.G(j, j).real() / a2 : std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace ddbh
