#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "tcs/diagnostics.hpp"
#include "tcs/integrator.hpp"
#include "tcs/model.hpp"

using namespace tcs;

namespace {

ParticleEnsemble single_oscillator(double x0, double v0) {
  ParticleEnsemble s = ParticleEnsemble::zeros(1, 1);
  s.x = {x0};
  s.v = {v0};
  s.T = {1.0};
  return s;
}

ModelParams params_1d() {
  ModelParams p;
  p.dim = 1;
  return p;
}

}  // namespace

TEST_CASE("step plan covers [0, t_end] with a truncated last step") {
  const StepPlan plan(0.3, 1.0, 1);
  REQUIRE(plan.total_steps() == 4);
  CHECK(plan.step_size(0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(plan.step_size(2) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(plan.step_size(3) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(plan.time_at(0) == 0.0);
  CHECK(plan.time_at(4) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("step plan snaps to an integer step count despite rounding") {
  // 0.7 / 0.1 is 6.9999... in binary; the plan must not emit a 7e-17 step.
  const StepPlan plan(0.1, 0.7, 1);
  REQUIRE(plan.total_steps() == 7);
  for (std::size_t k = 0; k < 7; ++k) {
    CHECK(plan.step_size(k) == doctest::Approx(0.1).epsilon(1e-12));
  }
  CHECK(plan.time_at(7) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("step plan records on stride multiples and the final step") {
  const StepPlan plan(0.01, 1.0, 10);
  CHECK(plan.total_steps() == 100);
  CHECK(plan.records_at(0));
  CHECK(plan.records_at(10));
  CHECK_FALSE(plan.records_at(15));
  CHECK(plan.records_at(100));

  const StepPlan odd(0.01, 0.105, 10);
  CHECK(odd.total_steps() == 11);
  CHECK(odd.records_at(11));  // final step records even off the stride
}

TEST_CASE("integrator config validation") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SUBCASE("nonpositive dt") {
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("nonpositive horizon") {
    cfg.t_end = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("zero stride") {
    cfg.record_stride = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("horizon shorter than one step is rejected") {
    cfg.dt = 2.0;
    cfg.t_end = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    // The raw plan still copes when constructed directly.
    const StepPlan plan(cfg.dt, cfg.t_end, 1);
    CHECK(plan.total_steps() == 1);
    CHECK(plan.step_size(0) == doctest::Approx(1.0));
  }
}

TEST_CASE("rk4 is fourth order on the harmonic oscillator") {
  // A lone particle feels only the confining field: exact solution
  // x(t) = cos t x0 + sin t v0.
  const ModelParams p = params_1d();
  const double t_end = 2.0;

  auto endpoint_error = [&](double dt) {
    ParticleEnsemble s = single_oscillator(1.0, 0.0);
    const StepPlan plan(dt, t_end, 1);
    for (std::size_t k = 0; k < plan.total_steps(); ++k) {
      s = rk4_step(s, p, plan.step_size(k));
    }
    return std::abs(s.x[0] - std::cos(t_end));
  };

  const double e1 = endpoint_error(0.1);
  const double e2 = endpoint_error(0.05);
  const double e3 = endpoint_error(0.025);
  CHECK(e1 / e2 > 14.0);
  CHECK(e1 / e2 < 18.0);
  CHECK(e2 / e3 > 14.0);
  CHECK(e2 / e3 < 18.0);
}

TEST_CASE("trajectory records follow the stride and cover both endpoints") {
  ParticleEnsemble s = ParticleEnsemble::zeros(3, 2);
  s.x = {0.1, 0.0, -0.1, 0.05, 0.0, -0.05};
  s.v = {0.0, 0.1, 0.1, 0.0, -0.1, -0.1};
  s.T = {1.0, 1.1, 1.2};
  ModelParams p;
  p.dim = 2;

  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 1.0;
  cfg.record_stride = 10;

  const DiagnosticsTracker diag(s, 0.25);
  const Trajectory traj = integrate(s, p, cfg, diag);
  REQUIRE(traj.times.size() == 11);
  REQUIRE(traj.records.size() == 11);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(traj.times[3] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(traj.records[3].t == traj.times[3]);
  CHECK(traj.states.empty());

  SUBCASE("keep_states retains one state per record") {
    IntegratorConfig keep = cfg;
    keep.keep_states = true;
    const Trajectory full = integrate(s, p, keep, diag);
    REQUIRE(full.states.size() == 11);
    CHECK(full.states.front().x == s.x);
    CHECK(full.states.back().T.size() == 3);
  }

  SUBCASE("observer sees every record in order") {
    std::vector<double> seen;
    integrate(s, p, cfg, diag,
              [&](const DiagnosticsRecord& r, const ParticleEnsemble&) {
                seen.push_back(r.t);
              });
    CHECK(seen == traj.times);
  }
}

TEST_CASE("energy stays conserved along an integrated trajectory") {
  ParticleEnsemble s = ParticleEnsemble::zeros(4, 2);
  s.x = {0.3, 0.2, 0.25, 0.21, 0.34, 0.23, 0.32, 0.2};
  s.v = {-0.3, 0.05, -0.29, 0.06, -0.295, 0.055, -0.292, 0.052};
  s.T = {10.8, 10.85, 10.9, 10.82};
  ModelParams p;
  p.kappa1 = 1.0;
  p.kappa2 = 100.0;
  p.phi = CommunicationKernel(1.0, 1.0);
  p.zeta = CommunicationKernel(40.0, 1.0);
  p.dim = 2;

  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 5.0;

  const DiagnosticsTracker diag(s, 0.003);
  const Trajectory traj = integrate(s, p, cfg, diag);
  const double e0 = traj.records.front().energy;
  for (const DiagnosticsRecord& r : traj.records) {
    CHECK(std::abs(r.energy - e0) <= 1e-10 * std::max(1.0, std::abs(e0)));
  }
}

TEST_CASE("failures during a step carry the failing time") {
  // Strong heat coupling against a tiny temperature gap drives one
  // temperature through zero within the horizon.
  ParticleEnsemble s = ParticleEnsemble::zeros(2, 1);
  s.x = {0.0, 0.1};
  s.v = {0.0, 0.0};
  s.T = {1e-4, 2.0};
  ModelParams p;
  p.kappa1 = 1.0;
  p.kappa2 = 50.0;
  p.zeta = CommunicationKernel(40.0, 1.0);
  p.dim = 1;

  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 10.0;

  const DiagnosticsTracker diag(s, 0.003);
  try {
    integrate(s, p, cfg, diag);
    FAIL("expected a numerical failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("step starting at t =") !=
          std::string::npos);
  }
}
