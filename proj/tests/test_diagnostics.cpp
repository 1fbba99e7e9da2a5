#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "tcs/diagnostics.hpp"
#include "tcs/model.hpp"
#include "tcs/numeric.hpp"

using namespace tcs;

namespace {

// Deterministic scattered ensemble; values are arbitrary but fixed.
ParticleEnsemble scattered(std::size_t n, std::size_t dim) {
  ParticleEnsemble s = ParticleEnsemble::zeros(n, dim);
  std::uint64_t z = 88172645463325252ull;
  auto next = [&z]() {
    z ^= z << 13;
    z ^= z >> 7;
    z ^= z << 17;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  for (std::size_t i = 0; i < n * dim; ++i) {
    s.x[i] = 0.4 * next() - 0.2;
    s.v[i] = 0.3 * next() - 0.15;
  }
  for (std::size_t a = 0; a < n; ++a) s.T[a] = 5.0 + next();
  return s;
}

ParticleEnsemble mirror_pair() {
  ParticleEnsemble s = ParticleEnsemble::zeros(2, 2);
  const double a = 0.10033845225037108;
  const double b = 0.38678740930904149;
  s.x = {0.335 + a, 0.22, 0.335 - a, 0.22};
  s.v = {-0.295 + b, 0.055, -0.295 - b, 0.055};
  s.T = {10.77567275, 10.77567275};
  return s;
}

}  // namespace

TEST_CASE("fluctuations subtract the means and the target temperature") {
  const ParticleEnsemble s = mirror_pair();
  const InitialStats st = initial_stats(s);
  const double tinf = asymptotic_temperature(st, st.v_c0);

  const FluctuationState f = fluctuations(s, tinf);
  CHECK(f.xhat[0] == doctest::Approx(0.10033845225037108).epsilon(1e-14));
  CHECK(f.xhat[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f.xhat[2] == doctest::Approx(-0.10033845225037108).epsilon(1e-14));
  CHECK(f.vhat[0] == doctest::Approx(0.38678740930904149).epsilon(1e-14));
  CHECK(f.That[0] == doctest::Approx(10.77567275 - 10.850474999999999)
                         .epsilon(1e-12));
  CHECK(f.That[0] == doctest::Approx(f.That[1]).epsilon(1e-15));
}

TEST_CASE("norms of the mirror pair hit their closed forms") {
  const ParticleEnsemble s = mirror_pair();
  const InitialStats st = initial_stats(s);
  const Norms nm = norms(fluctuations(s, asymptotic_temperature(st, st.v_c0)));
  CHECK(nm.X == doctest::Approx(0.1419).epsilon(1e-13));
  CHECK(nm.V == doctest::Approx(0.5470).epsilon(1e-13));
  CHECK(nm.Tnorm == doctest::Approx(0.10578635644602201).epsilon(1e-12));
}

TEST_CASE("position and velocity fluctuations sum to zero") {
  const ParticleEnsemble s = scattered(37, 3);
  const InitialStats st = initial_stats(s);
  const FluctuationState f =
      fluctuations(s, asymptotic_temperature(st, st.v_c0));
  CHECK(mean_residual(f) < 37 * 3 * 1e-16);
}

TEST_CASE("lyapunov value carries the cross term and the range flag") {
  FluctuationState f;
  f.n = 2;
  f.dim = 1;
  f.xhat = {0.3, -0.3};
  f.vhat = {-0.1, 0.1};
  f.That = {0.0, 0.0};

  // L = (X^2 + V^2) / 2 + eps sum xhat.vhat with X^2 = 0.18, V^2 = 0.02.
  const LyapunovValue l = lyapunov(f, 0.25);
  CHECK(l.value == doctest::Approx(0.1 + 0.25 * (-0.06)).epsilon(1e-14));
  CHECK(l.eps_in_range);

  CHECK_FALSE(lyapunov(f, 0.75).eps_in_range);
  CHECK_FALSE(lyapunov(f, 0.0).eps_in_range);
  CHECK(lyapunov(f, 0.5).eps_in_range);
}

TEST_CASE("lyapunov stays within the equivalence band for eps <= 1/2") {
  const ParticleEnsemble s = scattered(25, 2);
  const InitialStats st = initial_stats(s);
  const FluctuationState f =
      fluctuations(s, asymptotic_temperature(st, st.v_c0));
  const Norms nm = norms(f);
  const double z_sq = nm.X * nm.X + nm.V * nm.V;
  for (double eps : {0.01, 0.1, 0.25, 0.5}) {
    const double L = lyapunov(f, eps).value;
    CHECK(L >= 3.0 / 16.0 * z_sq - 1e-15);
    CHECK(L <= 3.0 / 4.0 * z_sq + 1e-15);
  }
}

TEST_CASE("fluctuation dynamics agree with the full system minus the mean") {
  const ParticleEnsemble s = scattered(12, 2);
  ModelParams p;
  p.kappa1 = 0.8;
  p.kappa2 = 6.0;
  p.phi = CommunicationKernel(1.0, 1.0);
  p.zeta = CommunicationKernel(4.0, 1.0);
  p.dim = 2;

  const InitialStats st = initial_stats(s);
  const Mean m = center_of_mass(s);
  const double tinf = asymptotic_temperature(st, m.v_c);

  const Derivative full = rhs(s, p);
  const FluctuationState f = fluctuations(s, tinf);
  const FluctuationDerivative fd = fluctuation_rhs(f, m.x_c, m.v_c, tinf, p);

  // The means obey dx_c = v_c, dv_c = -x_c and dT_inf = v_c.x_c, so the
  // fluctuation derivative is the full derivative minus those drifts.
  double vcxc = 0.0;
  for (std::size_t k = 0; k < 2; ++k) vcxc += m.v_c[k] * m.x_c[k];
  for (std::size_t a = 0; a < s.n; ++a) {
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t i = a * 2 + k;
      CHECK(fd.dxhat[i] ==
            doctest::Approx(full.dx[i] - m.v_c[k]).epsilon(1e-11));
      CHECK(fd.dvhat[i] ==
            doctest::Approx(full.dv[i] + m.x_c[k]).epsilon(1e-11));
    }
    CHECK(fd.dThat[a] == doctest::Approx(full.dT[a] - vcxc).epsilon(1e-10));
  }
}

TEST_CASE("fluctuation rhs rejects nonpositive temperature denominators") {
  FluctuationState f;
  f.n = 2;
  f.dim = 1;
  f.xhat = {0.1, -0.1};
  f.vhat = {0.05, -0.05};
  f.That = {-2.0, 2.0};
  ModelParams p;
  p.dim = 1;
  const std::vector<double> xc{0.0}, vc{0.0};
  CHECK_THROWS_AS(fluctuation_rhs(f, xc, vc, 1.5, p), CollapseError);
}

TEST_CASE("mean orbit rotates harmonically and preserves its radius") {
  const MeanOrbit orbit({0.3, -0.1}, {0.2, 0.4});
  std::vector<double> xc(2), vc(2);

  orbit.eval(0.0, xc, vc);
  CHECK(xc[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(vc[1] == doctest::Approx(0.4).epsilon(1e-15));

  const double pi = std::acos(-1.0);
  orbit.eval(pi / 2.0, xc, vc);
  CHECK(xc[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(xc[1] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(vc[0] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(vc[1] == doctest::Approx(0.1).epsilon(1e-12));

  const double r0 = 0.3 * 0.3 + 0.1 * 0.1 + 0.2 * 0.2 + 0.4 * 0.4;
  for (double t : {0.7, 3.9, 12.0, 100.0}) {
    orbit.eval(t, xc, vc);
    CHECK(squared_norm(xc) + squared_norm(vc) ==
          doctest::Approx(r0).epsilon(1e-12));
  }

  // One full revolution returns the initial means.
  orbit.eval(2.0 * pi, xc, vc);
  CHECK(xc[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(vc[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("tracker records the full diagnostic row") {
  const ParticleEnsemble s = mirror_pair();
  const DiagnosticsTracker tracker(s, 0.003);
  const DiagnosticsRecord r = tracker.record(0.0, s);

  CHECK(r.t == 0.0);
  CHECK(r.X == doctest::Approx(0.1419).epsilon(1e-13));
  CHECK(r.V == doctest::Approx(0.5470).epsilon(1e-13));
  CHECK(r.Tnorm == doctest::Approx(0.10578635644602201).epsilon(1e-12));
  CHECK(r.energy == doctest::Approx(total_energy(s)).epsilon(1e-15));
  CHECK(r.T_inf == doctest::Approx(10.850474999999999).epsilon(1e-14));
  CHECK(r.x_c[0] == doctest::Approx(0.335).epsilon(1e-14));
  CHECK(r.v_c[1] == doctest::Approx(0.055).epsilon(1e-14));
  CHECK(r.minT == doctest::Approx(10.77567275).epsilon(1e-15));
  CHECK(r.maxT == doctest::Approx(10.77567275).epsilon(1e-15));
  CHECK(r.lyapunov ==
        doctest::Approx(lyapunov(fluctuations(s, r.T_inf), 0.003).value)
            .epsilon(1e-13));
}

TEST_CASE("temperature fluctuations balance the velocity spread exactly") {
  // sum(T - T_inf) = -V^2/2 is an identity of the target temperature, not
  // an approximation; it must hold for any state measured by the tracker.
  const ParticleEnsemble s0 = scattered(40, 2);
  const DiagnosticsTracker tracker(s0, 0.1);

  const DiagnosticsRecord r0 = tracker.record(0.0, s0);
  CHECK(std::abs(r0.that_sum + 0.5 * r0.V * r0.V) < 1e-12);

  // Also at a different state of the same flow family (the identity only
  // needs the conserved stats, so any state with the same energy works).
  ParticleEnsemble s1 = s0;
  for (double& c : s1.v) c *= -1.0;
  const DiagnosticsRecord r1 = tracker.record(1.0, s1);
  CHECK(std::abs(r1.that_sum + 0.5 * r1.V * r1.V) < 1e-12);
}
