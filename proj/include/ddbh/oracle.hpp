#pragma once

#include <Eigen/Dense>

#include "ddbh/dynamics.hpp"
#include "ddbh/model.hpp"

namespace ddbh {

struct FockConfig {
  int dim = 40;
  double tail_tol = 1e-8;
  void validate() const;
};

struct SingleSiteSteadyState {
  Eigen::MatrixXcd rho;
  cplx alpha;
  double n = 0.0;
  double tail_population = 0.0;
  /// max |L(rho)| of the full (unmodified) Liouvillian.
  double liouvillian_residual = 0.0;
};

/// Exact steady state of one driven Kerr mode with loss, in a Fock space
/// truncated at `fock.dim` levels.  Throws TruncationError when the two top
/// levels carry more than `fock.tail_tol`, DegeneracyError when the null
/// space of the Liouvillian is not one-dimensional.
SingleSiteSteadyState lindblad_steady_single_site(double eps, double delta, double kappa,
                                                  double U, const FockConfig& fock);

struct AnsatzError {
  double err_gaussian = 0.0;
  double err_meanfield = 0.0;
  cplx alpha_exact;
  cplx alpha_gaussian;
  cplx alpha_meanfield;
};

/// Relative error of the Gaussian and coherent-state steady values of <a>
/// against the exact single-site solution.
AnsatzError compare_ansatz_error(double eps, double delta, double kappa, double U,
                                 const FockConfig& fock,
                                 const IntegratorOptions& opts = IntegratorOptions{});

}  // namespace ddbh
