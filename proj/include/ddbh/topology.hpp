#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddbh/model.hpp"

namespace ddbh {

/// Non-Hermitian Nambu dynamical matrix
///   H = [[D - i k/2, K], [-K*, -D* - i k/2]],
/// D_jk = dt_j d_jk + J(d_{j,k-1} e^{i phi} + d_{j,k+1} e^{-i phi}),  K = diag(2 g).
struct NambuMatrix {
  Eigen::MatrixXcd H;
  Eigen::MatrixXcd D;
  Eigen::MatrixXcd K;
  int n() const { return static_cast<int>(D.rows()); }
};

struct SVDAnalysis {
  Eigen::VectorXd singular_values;  // descending
  double s_min = 0.0;
  double frobenius_G = 0.0;
  double gap_ratio = 0.0;  // second-smallest / smallest
};

struct WindingResult {
  int value = 0;
  double raw = 0.0;     // accumulated phase / 2 pi before rounding
  double defect = 0.0;  // |raw - value|
  int grid = 0;         // number of k-points used
};

NambuMatrix build_nambu(const EffectiveQuadratic& effq, const ChainParams& params);

/// Largest imaginary part of the spectrum of H (< 0: linearly stable).
double max_growth_rate(const NambuMatrix& nambu);

Eigen::Matrix2cd bloch_matrix(double delta_tilde, cplx g, const ChainParams& params, double k);

/// Winding of det H(k) over k in [-pi, pi] by phase unwrapping on a uniform
/// grid, doubling the grid from `n_k` until every step turns by less than
/// pi/4 and the total is within 1e-3 of an integer.  Throws GapClosingError
/// when det H(k) touches zero or refinement hits 2^20 points.
WindingResult winding_unwrap(double delta_tilde, cplx g, const ChainParams& params,
                             int n_k = 1024);

/// Same invariant by periodic trapezoid quadrature of Im d/dk log det H(k),
/// with the analytic k-derivative of the determinant.
WindingResult winding_quadrature(double delta_tilde, cplx g, const ChainParams& params,
                                 int n_k = 1024);

int winding_number(double delta_tilde, cplx g, const ChainParams& params, int n_k = 1024);

/// Per-site invariant with each site's (dt_j, g_j) inserted in the
/// homogeneous formula; nullopt marks sites where the contour closes the gap.
std::vector<std::optional<int>> local_winding_profile(const EffectiveQuadratic& effq,
                                                      const ChainParams& params,
                                                      int n_k = 1024);

/// G(omega) = (omega - H)^{-1}.  Throws SingularityError for a singular system.
Eigen::MatrixXcd greens_function(const NambuMatrix& nambu, double omega = 0.0);

SVDAnalysis svd_analysis(const NambuMatrix& nambu);

struct PairingCheck {
  double max_pairing_defect = 0.0;
  double chiral_defect = 0.0;
};

/// Spectrum of [[0, H], [H^dag, 0]]: +-pairing and agreement of |E| with the
/// singular values of H.
PairingCheck extended_hermitian_check(const NambuMatrix& nambu);

/// Steady (G, F) of the linear fluctuation equations frozen at the effective
/// quadratic parameters (Wick closure terms dropped).  Throws StabilityError
/// when the linear dynamics has a non-decaying mode.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> quadratic_steady_correlations(
    const EffectiveQuadratic& effq, const ChainParams& params);

/// Residual sup-norm of the frozen linear (G, F) equations; zero at the
/// fixed point returned by quadratic_steady_correlations.
double quadratic_correlation_residual(const EffectiveQuadratic& effq, const ChainParams& params,
                                      const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& F);

/// Gbar_jk = G_jk / sqrt(n_j n_k); NaN where a diagonal entry is not positive.
Eigen::MatrixXcd normalized_correlations(const Eigen::MatrixXcd& G);

struct DecayFit {
  double length = 0.0;     // -1/slope of log|Gbar| vs distance
  double r_squared = 0.0;
  std::vector<double> profile;  // mean |Gbar_{j,j+d}| for d = 0..max_distance
};

/// Distance profile of |Gbar| averaged over rows first..last (0-based,
/// inclusive), fitted by an exponential for d = 1..max_distance.
DecayFit correlation_decay(const Eigen::MatrixXcd& gbar, int first, int last, int max_distance);

}  // namespace ddbh
