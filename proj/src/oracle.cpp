#include "ddbh/oracle.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ddbh/errors.hpp"

namespace ddbh {

namespace {

constexpr cplx I{0.0, 1.0};

using SpMat = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

// Column-major vectorization: rho_{mn} -> m + n D.
std::vector<Triplet> liouvillian_triplets(int D, double eps, double delta, double kappa, double U) {
  std::vector<double> hd(D);
  for (int m = 0; m < D; ++m) hd[m] = delta * m + U * m * m;
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(D) * D * 7);
  auto idx = [D](int m, int n) { return m + n * D; };
  for (int n = 0; n < D; ++n) {
    for (int m = 0; m < D; ++m) {
      const int row = idx(m, n);
      // -i (H rho - rho H) with H = hd + eps (a + a^dag), then loss.
      t.emplace_back(row, row, -I * (hd[m] - hd[n]) - 0.5 * kappa * (m + n));
      if (m + 1 < D) t.emplace_back(row, idx(m + 1, n), -I * eps * std::sqrt(m + 1.0));
      if (m > 0) t.emplace_back(row, idx(m - 1, n), -I * eps * std::sqrt(static_cast<double>(m)));
      if (n + 1 < D) t.emplace_back(row, idx(m, n + 1), I * eps * std::sqrt(n + 1.0));
      if (n > 0) t.emplace_back(row, idx(m, n - 1), I * eps * std::sqrt(static_cast<double>(n)));
      if (m + 1 < D && n + 1 < D)
        t.emplace_back(row, idx(m + 1, n + 1), kappa * std::sqrt((m + 1.0) * (n + 1.0)));
    }
  }
  return t;
}

// Solves L rho = 0 with row `replaced` swapped for the trace condition.
Eigen::VectorXcd solve_with_trace(const std::vector<Triplet>& base, int D, int replaced) {
  const int dim = D * D;
  std::vector<Triplet> t;
  t.reserve(base.size() + D);
  for (const auto& e : base)
    if (e.row() != replaced) t.push_back(e);
  for (int m = 0; m < D; ++m) t.emplace_back(replaced, m + m * D, 1.0);
  SpMat A(dim, dim);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw DegeneracyError("Liouvillian with trace constraint is singular: null space is not "
                          "one-dimensional");
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(dim);
  b[replaced] = 1.0;
  Eigen::VectorXcd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw DegeneracyError("sparse solve failed");
  return x;
}

}  // namespace

void FockConfig::validate() const {
  if (dim < 2) throw ParameterError("Fock dimension must be >= 2");
  if (!(tail_tol > 0.0)) throw ParameterError("tail_tol must be > 0");
}

SingleSiteSteadyState lindblad_steady_single_site(double eps, double delta, double kappa,
                                                  double U, const FockConfig& fock) {
  fock.validate();
  if (!(kappa > 0.0)) throw ParameterError("single-site steady state needs kappa > 0");
  const int D = fock.dim;
  const auto trip = liouvillian_triplets(D, eps, delta, kappa, U);

  const Eigen::VectorXcd v0 = solve_with_trace(trip, D, 0);
  // A second constraint row: for a unique steady state both solves coincide.
  const Eigen::VectorXcd v1 = solve_with_trace(trip, D, 1 + 1 * D);
  if ((v0 - v1).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, v0.cwiseAbs().maxCoeff()))
    throw DegeneracyError("Liouvillian steady state is not unique");

  SingleSiteSteadyState out;
  out.rho = v0.reshaped(D, D);
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  out.rho /= out.rho.trace().real();

  SpMat L(D * D, D * D);
  L.setFromTriplets(trip.begin(), trip.end());
  const Eigen::VectorXcd r = L * out.rho.reshaped();
  out.liouvillian_residual = r.cwiseAbs().maxCoeff();

  out.tail_population = out.rho(D - 1, D - 1).real() + (D >= 2 ? out.rho(D - 2, D - 2).real() : 0.0);
  if (out.tail_population > fock.tail_tol)
    throw TruncationError("Fock truncation D=" + std::to_string(D) +
                              " too small: top-level population " +
                              std::to_string(out.tail_population) + "; try D=" +
                              std::to_string(2 * D),
                          2 * D);

  out.alpha = 0.0;
  out.n = 0.0;
  for (int m = 0; m < D; ++m) {
    out.n += m * out.rho(m, m).real();
    if (m + 1 < D) out.alpha += std::sqrt(m + 1.0) * out.rho(m + 1, m);
  }
  return out;
}

AnsatzError compare_ansatz_error(double eps, double delta, double kappa, double U,
                                 const FockConfig& fock, const IntegratorOptions& opts) {
  const SingleSiteSteadyState exact = lindblad_steady_single_site(eps, delta, kappa, U, fock);

  ChainParams p;
  p.N = 1;
  p.J = 0.0;
  p.phi = 0.0;
  p.U = U;
  p.kappa = kappa;
  p.delta_base = delta;
  p.epsilon_base = eps;
  p.N0 = 1;
  p.profile = Profile::Homogeneous;
  p.gauge = Gauge::HoppingPhase;
  const SiteProfiles prof = build_profiles(p);

  auto solve = [&](Ansatz a) {
    IntegratorOptions o = opts;
    o.ansatz = a;
    o.initial.reset();
    const SteadyStateReport rep = find_steady_state(p, prof, o);
    if (rep.outcome != Outcome::Converged)
      throw Error("single-site " + std::string(a == Ansatz::Gaussian ? "Gaussian" : "mean-field") +
                  " integration did not converge (" + to_string(rep.outcome) + ")");
    return polish_steady_state(rep.state, p, prof, a).alpha[0];
  };

  AnsatzError out;
  out.alpha_exact = exact.alpha;
  out.alpha_gaussian = solve(Ansatz::Gaussian);
  out.alpha_meanfield = solve(Ansatz::MeanField);
  const double ref = std::abs(exact.alpha);
  out.err_gaussian = std::abs(out.alpha_gaussian - exact.alpha) / ref;
  out.err_meanfield = std::abs(out.alpha_meanfield - exact.alpha) / ref;
  return out;
}

}  // namespace ddbh
