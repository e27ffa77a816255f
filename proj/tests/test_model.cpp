#include <doctest.h>

#include <cmath>

#include "ddbh/errors.hpp"
#include "ddbh/model.hpp"

using namespace ddbh;

TEST_CASE("tanh border profile values") {
  ChainParams p;
  p.N = 40;
  p.N0 = 5;
  p.epsilon_base = 40.0;
  p.delta_base = 0.5;
  const SiteProfiles prof = build_profiles(p);
  CHECK(prof.epsilon[0] == doctest::Approx(40.0 * std::tanh(0.2)).epsilon(1e-14));
  CHECK(prof.epsilon[0] == doctest::Approx(7.895).epsilon(1e-3));
  CHECK(prof.epsilon[39] == prof.epsilon[0]);
  CHECK(prof.epsilon[19] == doctest::Approx(40.0 * std::tanh(4.0)).epsilon(1e-14));
  CHECK(prof.delta[2] == doctest::Approx(0.5 * std::pow(std::tanh(0.6), 2)).epsilon(1e-14));
  CHECK(prof.psi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("profile is mirror symmetric for even and odd N") {
  for (int n : {5, 6, 11, 40, 41, 80}) {
    for (int n0 = 1; 2 * n0 < n; ++n0) {
      ChainParams p;
      p.N = n;
      p.N0 = n0;
      p.epsilon_base = 3.0;
      p.delta_base = -1.2;
      const SiteProfiles prof = build_profiles(p);
      for (int j = 0; j < n; ++j) {
        CHECK(prof.epsilon[j] == prof.epsilon[n - 1 - j]);
        CHECK(prof.delta[j] == prof.delta[n - 1 - j]);
      }
    }
  }
}

TEST_CASE("homogeneous profile and drive gauge phases") {
  ChainParams p;
  p.N = 7;
  p.profile = Profile::Homogeneous;
  p.epsilon_base = 2.0;
  p.delta_base = 0.3;
  p.phi = M_PI / 3;
  p.gauge = Gauge::DrivePhase;
  const SiteProfiles prof = build_profiles(p);
  for (int j = 0; j < p.N; ++j) {
    CHECK(prof.epsilon[j] == 2.0);
    CHECK(prof.delta[j] == 0.3);
    CHECK(prof.psi[j] == doctest::Approx((j + 1) * M_PI / 3));
  }
  CHECK(p.hopping_phase() == 0.0);
  auto [hp, hparams] = gauge_transform(prof, p, Gauge::HoppingPhase);
  CHECK(hparams.gauge == Gauge::HoppingPhase);
  CHECK(hparams.hopping_phase() == doctest::Approx(M_PI / 3));
  CHECK(hp.psi.cwiseAbs().maxCoeff() == 0.0);
  auto [back, bparams] = gauge_transform(hp, hparams, Gauge::DrivePhase);
  CHECK((back.psi - prof.psi).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("parameter validation") {
  ChainParams p;
  p.N = 10;
  p.N0 = 5;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.N0 = 4;
  CHECK_NOTHROW(p.validate());
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.kappa = 1.0;
  p.N = 0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.N = 10;
  p.U = std::nan("");
  CHECK_THROWS_AS(p.validate(), ParameterError);
  CHECK_THROWS_AS(profile_from_string("flat"), ParameterError);
  CHECK(profile_from_string("homogeneous") == Profile::Homogeneous);
  CHECK(gauge_from_string("drive") == Gauge::DrivePhase);
}

TEST_CASE("default border size") {
  CHECK(ChainParams::default_border(40) == 5);
  CHECK(ChainParams::default_border(10) == 2);
  CHECK(ChainParams::default_border(80) == 10);
}

TEST_CASE("effective quadratic parameters") {
  ChainParams p;
  p.N = 3;
  p.profile = Profile::Homogeneous;
  p.delta_base = 0.5;
  p.U = -2e-4;
  Eigen::VectorXcd a(3);
  a << cplx(40.0, 0.0), cplx(0.0, 30.0), cplx(3.0, 4.0);
  const EffectiveQuadratic q = effective_quadratic(p, a);
  CHECK(q.delta_tilde[0] == doctest::Approx(0.5 - 2e-4 - 4 * 2e-4 * 1600));
  CHECK(std::abs(q.g[1] - cplx(2e-4 * 900, 0.0)) < 1e-14);
  CHECK(std::abs(q.g[2] - (-2e-4) * cplx(3.0, 4.0) * cplx(3.0, 4.0)) < 1e-14);
}
