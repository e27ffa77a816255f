#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "ddbh/dynamics.hpp"

namespace testing {

using cplx = std::complex<double>;

inline cplx rand_c(std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  return {d(rng), d(rng)};
}

/// Random state with Hermitian G and symmetric F.
inline ddbh::GaussianState random_state(std::mt19937& rng, int n, double amp = 3.0) {
  ddbh::GaussianState s;
  s.alpha.resize(n);
  s.G.resize(n, n);
  s.F.resize(n, n);
  for (int j = 0; j < n; ++j) s.alpha[j] = rand_c(rng, amp);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      s.G(j, k) = rand_c(rng, 0.3);
      s.F(j, k) = rand_c(rng, 0.3);
    }
  s.G = (0.5 * (s.G + s.G.adjoint())).eval();
  s.F = (0.5 * (s.F + s.F.transpose())).eval();
  return s;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing
