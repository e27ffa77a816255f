#include "ddbh/model.hpp"

#include <cmath>

#include "ddbh/errors.hpp"

namespace ddbh {

std::string to_string(Profile p) {
  return p == Profile::Homogeneous ? "homogeneous" : "tanh";
}

std::string to_string(Gauge g) {
  return g == Gauge::DrivePhase ? "drive" : "hopping";
}

Profile profile_from_string(const std::string& s) {
  if (s == "homogeneous") return Profile::Homogeneous;
  if (s == "tanh" || s == "tanh_border") return Profile::TanhBorder;
  throw ParameterError("unknown profile '" + s + "' (expected homogeneous|tanh)");
}

Gauge gauge_from_string(const std::string& s) {
  if (s == "drive") return Gauge::DrivePhase;
  if (s == "hopping") return Gauge::HoppingPhase;
  throw ParameterError("unknown gauge '" + s + "' (expected drive|hopping)");
}

int ChainParams::default_border(int N) {
  return std::max(2, static_cast<int>(std::lround(N / 8.0)));
}

void ChainParams::validate() const {
  if (N < 1) throw ParameterError("N must be >= 1");
  if (!(kappa >= 0.0)) throw ParameterError("kappa must be >= 0");
  if (N0 < 1) throw ParameterError("N0 must be >= 1");
  if (profile == Profile::TanhBorder && 2 * N0 >= N)
    throw ParameterError("tanh border profile needs 2*N0 < N (N=" + std::to_string(N) +
                         ", N0=" + std::to_string(N0) + ")");
  for (double v : {J, phi, U, kappa, delta_base, epsilon_base})
    if (!std::isfinite(v)) throw ParameterError("chain parameters must be finite");
}

SiteProfiles build_profiles(const ChainParams& params) {
  params.validate();
  const int n = params.N;
  SiteProfiles out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int idx = 0; idx < n; ++idx) {
    const int j = idx + 1;
    if (params.profile == Profile::Homogeneous) {
      out.epsilon[idx] = params.epsilon_base;
      out.delta[idx] = params.delta_base;
    } else {
      // Sites past the midpoint mirror their partner N+1-j.
      const int m = (2 * j <= n) ? j : n + 1 - j;
      const double t = std::tanh(static_cast<double>(m) / params.N0);
      out.epsilon[idx] = params.epsilon_base * t;
      out.delta[idx] = params.delta_base * t * t;
    }
    out.psi[idx] = params.gauge == Gauge::DrivePhase ? j * params.phi : 0.0;
  }
  return out;
}

std::pair<SiteProfiles, ChainParams> gauge_transform(const SiteProfiles& profiles,
                                                     const ChainParams& params,
                                                     Gauge target) {
  SiteProfiles p = profiles;
  ChainParams c = params;
  if (params.gauge == target) return {p, c};
  c.gauge = target;
  for (Eigen::Index idx = 0; idx < p.psi.size(); ++idx) {
    const double j = static_cast<double>(idx + 1);
    p.psi[idx] = target == Gauge::DrivePhase ? j * params.phi : 0.0;
  }
  return {p, c};
}

EffectiveQuadratic effective_quadratic(const ChainParams& params,
                                       const SiteProfiles& profiles,
                                       const Eigen::VectorXcd& alpha) {
  if (alpha.size() != params.N || profiles.delta.size() != params.N)
    throw DimensionError("effective_quadratic: alpha has length " +
                         std::to_string(alpha.size()) + ", expected N=" +
                         std::to_string(params.N));
  EffectiveQuadratic q{Eigen::VectorXd(params.N), Eigen::VectorXcd(params.N)};
  for (int j = 0; j < params.N; ++j) {
    q.delta_tilde[j] = profiles.delta[j] + 4.0 * params.U * std::norm(alpha[j]) + params.U;
    q.g[j] = params.U * alpha[j] * alpha[j];
  }
  return q;
}

EffectiveQuadratic effective_quadratic(const ChainParams& params,
                                       const Eigen::VectorXcd& alpha) {
  if (alpha.size() != params.N)
    throw DimensionError("effective_quadratic: alpha has length " +
                         std::to_string(alpha.size()) + ", expected N=" +
                         std::to_string(params.N));
  return effective_quadratic(params, build_profiles(params), alpha);
}

}  // namespace ddbh
