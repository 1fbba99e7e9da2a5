#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "tcs/model.hpp"
#include "tcs/numeric.hpp"

using namespace tcs;

namespace {

// Mirror pair around prescribed means: positions xc +- a*e1, velocities
// vc +- b*e1, both temperatures equal. Keeps every ensemble statistic in
// closed form.
ParticleEnsemble mirror_pair(double a, double b, double Tc) {
  ParticleEnsemble s = ParticleEnsemble::zeros(2, 2);
  const double xc[2] = {0.335, 0.22};
  const double vc[2] = {-0.295, 0.055};
  s.x = {xc[0] + a, xc[1], xc[0] - a, xc[1]};
  s.v = {vc[0] + b, vc[1], vc[0] - b, vc[1]};
  s.T = {Tc, Tc};
  return s;
}

}  // namespace

TEST_CASE("kernel family evaluates c(1+r^2)^(-beta/2)") {
  const CommunicationKernel phi(2.0, 1.0);
  CHECK(phi(0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(phi(1.5) == doctest::Approx(1.1094003924504583).epsilon(1e-15));
  CHECK(phi.from_squared(2.25) == doctest::Approx(phi(1.5)).epsilon(1e-15));

  const CommunicationKernel zeta(3.0, 2.0);
  CHECK(zeta(1.5) == doctest::Approx(0.92307692307692313).epsilon(1e-15));

  const CommunicationKernel odd(1.7, 3.2);
  CHECK(odd(0.9) == doctest::Approx(0.6579050221040682).epsilon(1e-15));
  CHECK(odd.lipschitz_bound() == doctest::Approx(1.7 * 3.2 / 2.0));
  CHECK(odd.is_power_law());
}

TEST_CASE("kernel is nonincreasing and Lipschitz with its stated constant") {
  const CommunicationKernel k(1.3, 2.5);
  const double L = k.lipschitz_bound();
  double prev = k(0.0);
  for (int i = 1; i <= 400; ++i) {
    const double r = 0.05 * i;
    const double cur = k(r);
    CHECK(cur <= prev + 1e-15);
    CHECK(std::abs(cur - prev) <= L * 0.05 + 1e-15);
    CHECK(cur > 0.0);
    prev = cur;
  }
}

TEST_CASE("kernel construction rejects bad parameters and arguments") {
  CHECK_THROWS_AS(CommunicationKernel(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CommunicationKernel(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CommunicationKernel(1.0, -0.5), std::invalid_argument);

  const CommunicationKernel k(1.0, 1.0);
  CHECK_THROWS_AS(k(-0.1), std::domain_error);
  CHECK_THROWS_AS(k(std::nan("")), std::domain_error);

  // Exponent zero is the constant kernel, a legal member of the family.
  const CommunicationKernel flat(0.5, 0.0);
  CHECK(flat(10.0) == doctest::Approx(0.5));
  CHECK(flat.lipschitz_bound() == 0.0);
}

TEST_CASE("custom kernels are spot-checked at construction") {
  const auto good = CommunicationKernel::custom(
      [](double r) { return std::exp(-r); });
  CHECK(good(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK_FALSE(good.is_power_law());

  CHECK_THROWS_AS(CommunicationKernel::custom([](double r) { return r; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      CommunicationKernel::custom([](double r) { return r - 1.0; }),
      std::invalid_argument);
}

TEST_CASE("params validation demands positive couplings") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.kappa1 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.kappa1 = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.kappa1 = 1.0;
  p.kappa2 = -2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.kappa2 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.kappa2 = 1.0;
  p.dim = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("ensemble validation catches layout and sign errors") {
  ParticleEnsemble s = ParticleEnsemble::zeros(3, 2);
  s.T = {1.0, 1.0, 1.0};
  CHECK_NOTHROW(s.validate());

  SUBCASE("size mismatch") {
    s.x.pop_back();
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("nonfinite coordinate") {
    s.v[2] = std::nan("");
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("nonpositive temperature") {
    s.T[1] = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
}

TEST_CASE("means and initial stats of a mirror pair are exact") {
  const ParticleEnsemble s = mirror_pair(0.1, 0.2, 3.0);
  const Mean m = center_of_mass(s);
  CHECK(m.x_c[0] == doctest::Approx(0.335).epsilon(1e-15));
  CHECK(m.x_c[1] == doctest::Approx(0.22).epsilon(1e-15));
  CHECK(m.v_c[0] == doctest::Approx(-0.295).epsilon(1e-15));
  CHECK(m.v_c[1] == doctest::Approx(0.055).epsilon(1e-15));
  CHECK(m.T_c == doctest::Approx(3.0).epsilon(1e-15));

  const InitialStats st = initial_stats(s);
  CHECK(st.T_c0 == doctest::Approx(3.0).epsilon(1e-15));
  const double mean_sq = 0.5 * ((-0.095) * (-0.095) + 0.055 * 0.055 +
                                (-0.495) * (-0.495) + 0.055 * 0.055);
  CHECK(st.half_mean_sq_speed == doctest::Approx(0.5 * mean_sq).epsilon(1e-15));
  CHECK(st.energy0 == doctest::Approx(total_energy(s)).epsilon(1e-15));
}

TEST_CASE("asymptotic temperature and its extreme bounds match closed forms") {
  // Offsets and common temperature chosen so T_M lands exactly on 10.8955.
  const ParticleEnsemble s =
      mirror_pair(0.10033845225037108, 0.38678740930904149, 10.77567275);
  const InitialStats st = initial_stats(s);

  const auto [T_m, T_M] = extreme_temperature_bounds(s);
  CHECK(T_M == doctest::Approx(10.8955).epsilon(1e-14));
  CHECK(T_m == doctest::Approx(10.644825000000001).epsilon(1e-14));

  const double tinf0 = asymptotic_temperature(st, st.v_c0);
  CHECK(tinf0 == doctest::Approx(10.850474999999999).epsilon(1e-14));

  // At zero mean velocity the target reaches its upper bound.
  const std::vector<double> rest(2, 0.0);
  CHECK(asymptotic_temperature(st, rest) ==
        doctest::Approx(10.8955).epsilon(1e-14));
}

TEST_CASE("inadmissible initial data is rejected") {
  ParticleEnsemble s = ParticleEnsemble::zeros(2, 2);
  s.x = {30.0, 0.0, 30.0, 0.0};  // |x_c|^2 far above the temperature scale
  s.v = {0.0, 0.0, 0.0, 0.0};
  s.T = {1.0, 1.0};
  CHECK_THROWS_AS(extreme_temperature_bounds(s), std::domain_error);
}

TEST_CASE("rhs matches a hand-evaluated two-particle system") {
  ParticleEnsemble s = ParticleEnsemble::zeros(2, 1);
  s.x = {0.0, 1.5};
  s.v = {0.3, -0.2};
  s.T = {2.0, 5.0};
  ModelParams p;
  p.kappa1 = 0.7;
  p.kappa2 = 1.3;
  p.phi = CommunicationKernel(2.0, 1.0);
  p.zeta = CommunicationKernel(3.0, 2.0);
  p.dim = 1;

  const Derivative d = rhs(s, p);
  CHECK(d.dx[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(d.dx[1] == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(d.dv[0] == doctest::Approx(-0.067950774037590561).epsilon(1e-14));
  CHECK(d.dv[1] == doctest::Approx(-1.4320492259624094).epsilon(1e-14));
  CHECK(d.dT[0] == doctest::Approx(0.19698769350939765).epsilon(1e-13));
  CHECK(d.dT[1] == doctest::Approx(-0.46301230649060232).epsilon(1e-13));
}

TEST_CASE("rhs conserves total energy and total momentum-like sums") {
  ParticleEnsemble s = ParticleEnsemble::zeros(5, 3);
  // Deterministic scattered data, nothing special about the values.
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    s.x[i] = 0.3 * std::sin(1.0 + 2.7 * static_cast<double>(i));
    s.v[i] = 0.2 * std::cos(0.4 + 1.9 * static_cast<double>(i));
  }
  for (std::size_t a = 0; a < 5; ++a) {
    s.T[a] = 2.0 + 0.3 * static_cast<double>(a);
  }
  ModelParams p;
  p.kappa1 = 1.4;
  p.kappa2 = 2.3;
  p.phi = CommunicationKernel(1.0, 1.0);
  p.zeta = CommunicationKernel(4.0, 1.0);
  p.dim = 3;

  const Derivative d = rhs(s, p);

  // d/dt sum(T + |v|^2/2) = 0: the heat exchange and the alignment force
  // both sum to zero over the ensemble.
  CompensatedSum de;
  for (std::size_t a = 0; a < 5; ++a) {
    de.add(d.dT[a]);
    for (std::size_t k = 0; k < 3; ++k) {
      de.add(s.v[a * 3 + k] * d.dv[a * 3 + k]);
    }
  }
  CHECK(std::abs(de.value()) < 1e-14);

  // sum dv = -sum x: pairwise forces cancel, the confining field remains.
  for (std::size_t k = 0; k < 3; ++k) {
    CompensatedSum dv_sum, x_sum;
    for (std::size_t a = 0; a < 5; ++a) {
      dv_sum.add(d.dv[a * 3 + k]);
      x_sum.add(s.x[a * 3 + k]);
    }
    CHECK(std::abs(dv_sum.value() + x_sum.value()) < 1e-14);
  }
}

TEST_CASE("temperatures at the collapse threshold abort the evaluation") {
  ParticleEnsemble s = ParticleEnsemble::zeros(2, 1);
  s.x = {0.0, 1.0};
  s.v = {0.0, 0.0};
  s.T = {1.0, 1e-13};
  const ModelParams p{1.0, 1.0, CommunicationKernel(1.0, 1.0),
                      CommunicationKernel(1.0, 1.0), 1};
  CHECK_THROWS_AS(rhs(s, p), CollapseError);
  try {
    rhs(s, p);
  } catch (const CollapseError& e) {
    CHECK(std::string(e.what()).find("particle 1") != std::string::npos);
  }
}

TEST_CASE("self-interaction cancels for a single particle") {
  ParticleEnsemble s = ParticleEnsemble::zeros(1, 2);
  s.x = {1.0, 0.0};
  s.v = {0.0, 0.0};
  s.T = {5.0};
  ModelParams p;
  p.dim = 2;
  p.kappa1 = 3.0;
  p.kappa2 = 7.0;

  const Derivative d = rhs(s, p);
  CHECK(d.dx[0] == 0.0);
  CHECK(d.dx[1] == 0.0);
  CHECK(d.dv[0] == -1.0);
  CHECK(d.dv[1] == 0.0);
  CHECK(d.dT[0] == 0.0);
}

TEST_CASE("identical particles keep zero fluctuations") {
  const std::size_t n = 6;
  ParticleEnsemble s = ParticleEnsemble::zeros(n, 2);
  for (std::size_t a = 0; a < n; ++a) {
    s.x[a * 2] = 0.3;
    s.x[a * 2 + 1] = -0.1;
    s.v[a * 2] = 0.4;
    s.v[a * 2 + 1] = 0.2;
    s.T[a] = 1.7;
  }
  ModelParams p;
  p.dim = 2;
  p.kappa1 = 2.0;
  p.kappa2 = 5.0;

  // All coupling differences vanish, so dv = -x and dT = -v.dv per particle.
  const Derivative d = rhs(s, p);
  for (std::size_t a = 0; a < n; ++a) {
    CHECK(d.dv[a * 2] == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(d.dv[a * 2 + 1] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(d.dT[a] ==
          doctest::Approx(0.4 * 0.3 + 0.2 * (-0.1)).epsilon(1e-15));
  }
}
