#include "ddbh/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ddbh/errors.hpp"

namespace ddbh {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kPi = std::numbers::pi;
constexpr int kMaxGrid = 1 << 20;

void check_effq(const EffectiveQuadratic& effq, const ChainParams& params) {
  if (effq.delta_tilde.size() != params.N || effq.g.size() != params.N)
    throw DimensionError("effective quadratic parameters do not match N=" +
                         std::to_string(params.N));
}

// Generator of the linearized fluctuation dynamics d b/dt = -i X b in the
// Nambu basis (b, b^dag), with the hopping exactly as in the alpha equation:
// h_{j,j+1} = J e^{-i phi}.
Eigen::MatrixXcd fluctuation_generator(const EffectiveQuadratic& effq, const ChainParams& params) {
  const int n = params.N;
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    L(j, j) = effq.delta_tilde[j];
    if (j + 1 < n) {
      L(j, j + 1) = params.J * std::exp(-I * params.phi);
      L(j + 1, j) = params.J * std::exp(I * params.phi);
    }
  }
  Eigen::MatrixXcd X(2 * n, 2 * n);
  const Eigen::MatrixXcd loss = cplx(0.0, -0.5 * params.kappa) * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd K = (2.0 * effq.g).asDiagonal();
  X.topLeftCorner(n, n) = L + loss;
  X.topRightCorner(n, n) = K;
  X.bottomLeftCorner(n, n) = -K.conjugate();
  X.bottomRightCorner(n, n) = -L.conjugate() + loss;
  return X;
}

cplx bloch_det(double dt, cplx g, const ChainParams& p, double k) {
  const double a = dt + 2.0 * p.J * std::cos(k + p.phi);
  const double b = dt + 2.0 * p.J * std::cos(k - p.phi);
  const cplx loss(0.0, -0.5 * p.kappa);
  return (a + loss) * (-b + loss) + 4.0 * std::norm(g);
}

cplx bloch_det_dk(double dt, cplx g, const ChainParams& p, double k) {
  (void)g;
  const double a = dt + 2.0 * p.J * std::cos(k + p.phi);
  const double b = dt + 2.0 * p.J * std::cos(k - p.phi);
  const double da = -2.0 * p.J * std::sin(k + p.phi);
  const double db = -2.0 * p.J * std::sin(k - p.phi);
  const cplx loss(0.0, -0.5 * p.kappa);
  return da * (-b + loss) - (a + loss) * db;
}

std::string describe(double dt, cplx g, const ChainParams& p) {
  std::ostringstream os;
  os << "(delta_tilde=" << dt << ", g=" << g << ", J=" << p.J << ", phi=" << p.phi
     << ", kappa=" << p.kappa << ")";
  return os.str();
}

}  // namespace

NambuMatrix build_nambu(const EffectiveQuadratic& effq, const ChainParams& params) {
  check_effq(effq, params);
  const int n = params.N;
  NambuMatrix out;
  out.D = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    out.D(j, j) = effq.delta_tilde[j];
    if (j + 1 < n) {
      out.D(j, j + 1) = params.J * std::exp(I * params.phi);
      out.D(j + 1, j) = params.J * std::exp(-I * params.phi);
    }
  }
  out.K = (2.0 * effq.g).asDiagonal();
  const Eigen::MatrixXcd loss = cplx(0.0, -0.5 * params.kappa) * Eigen::MatrixXcd::Identity(n, n);
  out.H.resize(2 * n, 2 * n);
  out.H.topLeftCorner(n, n) = out.D + loss;
  out.H.topRightCorner(n, n) = out.K;
  out.H.bottomLeftCorner(n, n) = -out.K.conjugate();
  out.H.bottomRightCorner(n, n) = -out.D.conjugate() + loss;
  return out;
}

double max_growth_rate(const NambuMatrix& nambu) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(nambu.H, false);
  return es.eigenvalues().imag().maxCoeff();
}

Eigen::Matrix2cd bloch_matrix(double delta_tilde, cplx g, const ChainParams& params, double k) {
  const cplx loss(0.0, -0.5 * params.kappa);
  Eigen::Matrix2cd h;
  h(0, 0) = delta_tilde + 2.0 * params.J * std::cos(k + params.phi) + loss;
  h(0, 1) = 2.0 * g;
  h(1, 0) = -2.0 * std::conj(g);
  h(1, 1) = -delta_tilde - 2.0 * params.J * std::cos(k - params.phi) + loss;
  return h;
}

WindingResult winding_unwrap(double delta_tilde, cplx g, const ChainParams& params, int n_k) {
  for (int m = std::max(n_k, 4); m <= kMaxGrid; m *= 2) {
    double total = 0.0;
    double max_turn = 0.0;
    double min_abs = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    cplx prev = bloch_det(delta_tilde, g, params, -kPi);
    for (int i = 1; i <= m; ++i) {
      const double k = -kPi + 2.0 * kPi * i / m;
      const cplx cur = bloch_det(delta_tilde, g, params, k);
      min_abs = std::min(min_abs, std::abs(cur));
      max_abs = std::max(max_abs, std::abs(cur));
      const double turn = std::arg(cur / prev);
      total += turn;
      max_turn = std::max(max_turn, std::abs(turn));
      prev = cur;
    }
    if (!(min_abs > 1e-13 * std::max(max_abs, 1.0)))
      throw GapClosingError("det H(k) vanishes on the Brillouin zone " +
                            describe(delta_tilde, g, params));
    const double raw = total / (2.0 * kPi);
    const double value = std::round(raw);
    if (max_turn < 0.25 * kPi && std::abs(raw - value) < 1e-3)
      return {static_cast<int>(value), raw, std::abs(raw - value), m};
  }
  throw GapClosingError("winding did not resolve to an integer " +
                        describe(delta_tilde, g, params));
}

WindingResult winding_quadrature(double delta_tilde, cplx g, const ChainParams& params, int n_k) {
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int m = std::max(n_k, 4); m <= kMaxGrid; m *= 2) {
    double acc = 0.0;
    double min_abs = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    for (int i = 0; i < m; ++i) {
      const double k = -kPi + 2.0 * kPi * i / m;
      const cplx det = bloch_det(delta_tilde, g, params, k);
      min_abs = std::min(min_abs, std::abs(det));
      max_abs = std::max(max_abs, std::abs(det));
      acc += (bloch_det_dk(delta_tilde, g, params, k) / det).imag();
    }
    if (!(min_abs > 1e-13 * std::max(max_abs, 1.0)))
      throw GapClosingError("det H(k) vanishes on the Brillouin zone " +
                            describe(delta_tilde, g, params));
    const double raw = acc / m;  // (2 pi / m) * sum / (2 pi)
    const double value = std::round(raw);
    if (std::abs(raw - value) < 1e-3 && std::abs(raw - previous) < 1e-3)
      return {static_cast<int>(value), raw, std::abs(raw - value), m};
    previous = raw;
  }
  throw GapClosingError("quadrature winding did not converge " +
                        describe(delta_tilde, g, params));
}

int winding_number(double delta_tilde, cplx g, const ChainParams& params, int n_k) {
  return winding_unwrap(delta_tilde, g, params, n_k).value;
}

std::vector<std::optional<int>> local_winding_profile(const EffectiveQuadratic& effq,
                                                      const ChainParams& params, int n_k) {
  check_effq(effq, params);
  std::vector<std::optional<int>> nu(params.N);
  for (int j = 0; j < params.N; ++j) {
    try {
      nu[j] = winding_unwrap(effq.delta_tilde[j], effq.g[j], params, n_k).value;
    } catch (const GapClosingError&) {
      nu[j] = std::nullopt;
    }
  }
  return nu;
}

Eigen::MatrixXcd greens_function(const NambuMatrix& nambu, double omega) {
  const Eigen::Index m = nambu.H.rows();
  const Eigen::MatrixXcd A = omega * Eigen::MatrixXcd::Identity(m, m) - nambu.H;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-15))
    throw SingularityError("omega - H is singular (rcond=" + std::to_string(rc) + ")");
  return lu.solve(Eigen::MatrixXcd::Identity(m, m));
}

SVDAnalysis svd_analysis(const NambuMatrix& nambu) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(nambu.H);
  SVDAnalysis out;
  out.singular_values = svd.singularValues();
  const Eigen::Index m = out.singular_values.size();
  out.s_min = out.singular_values[m - 1];
  out.gap_ratio = m > 1 ? out.singular_values[m - 2] / out.s_min
                        : std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) acc += 1.0 / (out.singular_values[i] * out.singular_values[i]);
  out.frobenius_G = std::sqrt(acc);
  return out;
}

PairingCheck extended_hermitian_check(const NambuMatrix& nambu) {
  const Eigen::Index m = nambu.H.rows();
  Eigen::MatrixXcd ext = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  ext.topRightCorner(m, m) = nambu.H;
  ext.bottomLeftCorner(m, m) = nambu.H.adjoint();

  PairingCheck out;
  Eigen::VectorXd chiral(2 * m);
  chiral.head(m).setOnes();
  chiral.tail(m).setConstant(-1.0);
  // S^{-1} ext S + ext with S = diag(1, -1).
  const Eigen::MatrixXcd flipped = chiral.asDiagonal() * ext * chiral.asDiagonal();
  out.chiral_defect = (flipped + ext).cwiseAbs().maxCoeff();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ext, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& e = es.eigenvalues();  // ascending
  const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXcd>(nambu.H).singularValues();  // descending
  double defect = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    // Lowest m eigenvalues are -s (descending s), the top m are +s.
    defect = std::max(defect, std::abs(e[i] + e[2 * m - 1 - i]));
    defect = std::max(defect, std::abs(-e[i] - s[i]));
    defect = std::max(defect, std::abs(e[2 * m - 1 - i] - s[i]));
  }
  out.max_pairing_defect = defect;
  return out;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> quadratic_steady_correlations(
    const EffectiveQuadratic& effq, const ChainParams& params) {
  check_effq(effq, params);
  const int n = params.N;
  const Eigen::Index m = 2 * n;
  const Eigen::MatrixXcd X = fluctuation_generator(effq, params);

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(X);
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& Q = schur.matrixU();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(T(i, i).imag() < 0.0)) {
      std::ostringstream os;
      os << "linearized fluctuations are unstable: eigenvalue " << T(i, i)
         << " is not in the lower half-plane";
      throw StabilityError(os.str());
    }
  }

  // Moments Gamma_{mu nu} = <b_mu b_nu> obey X Gamma + Gamma X^T = -i kappa E,
  // with E the vacuum-noise block [[0, 1], [0, 0]].
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(m, m);
  C.topRightCorner(n, n) = cplx(0.0, -params.kappa) * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd Ct = Q.adjoint() * C * Q.conjugate();

  // Bartels-Stewart: T Y + Y T^T = Ct, solved column by column from the right.
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(m, m);
  for (Eigen::Index nu = m - 1; nu >= 0; --nu) {
    Eigen::VectorXcd rhs = Ct.col(nu);
    for (Eigen::Index rho = nu + 1; rho < m; ++rho) rhs -= T(nu, rho) * Y.col(rho);
    Eigen::MatrixXcd A = T;
    A.diagonal().array() += T(nu, nu);
    Y.col(nu) = A.triangularView<Eigen::Upper>().solve(rhs);
  }
  const Eigen::MatrixXcd Gamma = Q * Y * Q.transpose();

  Eigen::MatrixXcd G = Gamma.bottomLeftCorner(n, n);
  Eigen::MatrixXcd F = Gamma.topLeftCorner(n, n);
  G = 0.5 * (G + G.adjoint()).eval();
  F = 0.5 * (F + F.transpose()).eval();
  return {G, F};
}

double quadratic_correlation_residual(const EffectiveQuadratic& effq, const ChainParams& params,
                                      const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& F) {
  check_effq(effq, params);
  const int n = params.N;
  const cplx eu = params.J * std::exp(-I * params.phi);  // h_{j,j+1}
  const cplx ed = std::conj(eu);                          // h_{j+1,j}
  auto at = [n](const Eigen::MatrixXcd& M, int j, int k) -> cplx {
    return (j < 0 || k < 0 || j >= n || k >= n) ? cplx(0.0) : M(j, k);
  };
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const cplx pj = 2.0 * effq.g[j], pk = 2.0 * effq.g[k];
      // <b_j^dag db_k/dt> + c.c.(j<->k) and <b_j db_k/dt> + <db_j/dt b_k>.
      const cplx half_g = -I * (effq.delta_tilde[k] * G(j, k) + eu * at(G, j, k + 1) +
                                ed * at(G, j, k - 1)) -
                          I * pk * std::conj(F(j, k)) - 0.5 * params.kappa * G(j, k);
      const cplx swap_g = -I * (effq.delta_tilde[j] * G(k, j) + eu * at(G, k, j + 1) +
                                ed * at(G, k, j - 1)) -
                          I * pj * std::conj(F(k, j)) - 0.5 * params.kappa * G(k, j);
      const cplx dG = half_g + std::conj(swap_g);

      const cplx half_f = -I * (effq.delta_tilde[k] * F(j, k) + eu * at(F, j, k + 1) +
                                ed * at(F, j, k - 1)) -
                          I * pk * (G(k, j) + (j == k ? 1.0 : 0.0)) - 0.5 * params.kappa * F(j, k);
      const cplx swap_f = -I * (effq.delta_tilde[j] * F(k, j) + eu * at(F, k, j + 1) +
                                ed * at(F, k, j - 1)) -
                          I * pj * G(j, k) - 0.5 * params.kappa * F(k, j);
      const cplx dF = half_f + swap_f;
      worst = std::max({worst, std::abs(dG), std::abs(dF)});
    }
  }
  return worst;
}

Eigen::MatrixXcd normalized_correlations(const Eigen::MatrixXcd& G) {
  const Eigen::Index n = G.rows();
  Eigen::MatrixXcd out(n, n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double nj = G(j, j).real(), nk = G(k, k).real();
      out(j, k) = (nj > 0.0 && nk > 0.0) ? G(j, k) / std::sqrt(nj * nk) : cplx(nan, nan);
    }
  }
  return out;
}

DecayFit correlation_decay(const Eigen::MatrixXcd& gbar, int first, int last, int max_distance) {
  DecayFit fit;
  fit.profile.assign(max_distance + 1, 0.0);
  for (int d = 0; d <= max_distance; ++d) {
    double acc = 0.0;
    int cnt = 0;
    for (int j = first; j + d <= last; ++j) {
      const double v = std::abs(gbar(j, j + d));
      if (std::isfinite(v)) {
        acc += v;
        ++cnt;
      }
    }
    fit.profile[d] = cnt > 0 ? acc / cnt : std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<double> xs, ys;
  for (int d = 1; d <= max_distance; ++d) {
    if (std::isfinite(fit.profile[d]) && fit.profile[d] > 0.0) {
      xs.push_back(d);
      ys.push_back(std::log(fit.profile[d]));
    }
  }
  if (xs.size() < 2) {
    fit.length = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double nx = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / nx;
    my += ys[i] / nx;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.length = slope < 0.0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace ddbh
