#pragma once

#include <complex>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace ddbh {

using cplx = std::complex<double>;

enum class Profile { Homogeneous, TanhBorder };

/// Where the chiral phase lives: (i) in the drive phases psi_j = j*phi, or
/// (ii) in the hopping amplitude J e^{i phi}.  Dynamics always run in (ii).
enum class Gauge { DrivePhase, HoppingPhase };

std::string to_string(Profile p);
std::string to_string(Gauge g);
Profile profile_from_string(const std::string& s);
Gauge gauge_from_string(const std::string& s);

struct ChainParams {
  int N = 40;
  double J = 1.0;
  double phi = 0.0;
  double U = 0.0;
  double kappa = 1.0;
  double delta_base = 0.0;
  double epsilon_base = 0.0;
  int N0 = 5;
  Profile profile = Profile::TanhBorder;
  Gauge gauge = Gauge::HoppingPhase;

  /// Throws ParameterError when an invariant is violated.
  void validate() const;

  /// Phase carried by the hopping term in the current gauge.
  double hopping_phase() const { return gauge == Gauge::HoppingPhase ? phi : 0.0; }

  /// max(2, round(N/8)); equals 5 at N = 40.
  static int default_border(int N);
};

struct SiteProfiles {
  Eigen::VectorXd epsilon;
  Eigen::VectorXd delta;
  Eigen::VectorXd psi;
};

/// Linearization of the Kerr chain about a mean-field configuration.
struct EffectiveQuadratic {
  Eigen::VectorXd delta_tilde;
  Eigen::VectorXcd g;
};

SiteProfiles build_profiles(const ChainParams& params);

/// Moves the phase gradient between drive and hopping.  Identity when the
/// source gauge already equals `target`.
std::pair<SiteProfiles, ChainParams> gauge_transform(const SiteProfiles& profiles,
                                                     const ChainParams& params,
                                                     Gauge target);

/// delta_tilde_j = Delta_j + 4U|alpha_j|^2 + U,  g_j = U alpha_j^2.
EffectiveQuadratic effective_quadratic(const ChainParams& params,
                                       const Eigen::VectorXcd& alpha);

/// Same, with the detunings taken from precomputed profiles.
EffectiveQuadratic effective_quadratic(const ChainParams& params,
                                       const SiteProfiles& profiles,
                                       const Eigen::VectorXcd& alpha);

}  // namespace ddbh
