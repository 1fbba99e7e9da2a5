#include "tcs/integrator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tcs/numeric.hpp"

namespace tcs {

void IntegratorConfig::validate() const {
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw std::invalid_argument("dt must be positive");
  }
  if (!std::isfinite(t_end) || t_end < dt) {
    throw std::invalid_argument("t_end must be at least dt");
  }
  if (record_stride == 0) {
    throw std::invalid_argument("record_stride must be at least 1");
  }
}

StepPlan::StepPlan(double dt, double t_end, std::size_t record_stride)
    : dt_(dt), t_end_(t_end), stride_(record_stride) {
  const double q = t_end / dt;
  auto full = static_cast<std::size_t>(std::floor(q + 1e-9));
  if (full < 1) full = 1;
  const double rem = t_end - static_cast<double>(full) * dt;
  // A leftover below roundoff means t_end sits on the grid; fold it into the
  // last full step instead of adding a vanishing extra one.
  steps_ = rem > dt * 1e-12 ? full + 1 : full;
}

double StepPlan::step_size(std::size_t k) const {
  if (k + 1 == steps_) {
    return t_end_ - static_cast<double>(steps_ - 1) * dt_;
  }
  return dt_;
}

double StepPlan::time_at(std::size_t k) const {
  if (k >= steps_) return t_end_;
  return static_cast<double>(k) * dt_;
}

namespace {

ParticleEnsemble stage_state(const ParticleEnsemble& s, const Derivative& d,
                             double h) {
  ParticleEnsemble out;
  out.n = s.n;
  out.dim = s.dim;
  out.x.resize(s.x.size());
  out.v.resize(s.v.size());
  out.T.resize(s.T.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    out.x[i] = s.x[i] + h * d.dx[i];
    out.v[i] = s.v[i] + h * d.dv[i];
  }
  for (std::size_t i = 0; i < s.T.size(); ++i) {
    out.T[i] = s.T[i] + h * d.dT[i];
  }
  return out;
}

void require_finite(const Derivative& d) {
  if (!all_finite(d.dv) || !all_finite(d.dT)) {
    throw BlowupError("numerical blow-up: nonfinite derivative");
  }
}

}  // namespace

ParticleEnsemble rk4_step(const ParticleEnsemble& s, const ModelParams& p,
                          double dt) {
  const Derivative k1 = rhs(s, p);
  require_finite(k1);
  const Derivative k2 = rhs(stage_state(s, k1, 0.5 * dt), p);
  require_finite(k2);
  const Derivative k3 = rhs(stage_state(s, k2, 0.5 * dt), p);
  require_finite(k3);
  const Derivative k4 = rhs(stage_state(s, k3, dt), p);
  require_finite(k4);

  const double h6 = dt / 6.0;
  ParticleEnsemble out;
  out.n = s.n;
  out.dim = s.dim;
  out.x.resize(s.x.size());
  out.v.resize(s.v.size());
  out.T.resize(s.T.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    out.x[i] = s.x[i] + h6 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
    out.v[i] = s.v[i] + h6 * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
  }
  for (std::size_t i = 0; i < s.T.size(); ++i) {
    out.T[i] = s.T[i] + h6 * (k1.dT[i] + 2.0 * k2.dT[i] + 2.0 * k3.dT[i] + k4.dT[i]);
    if (out.T[i] <= kCollapseThreshold) {
      throw CollapseError("temperature collapse after step at particle " +
                          std::to_string(i));
    }
  }
  if (!all_finite(out.x) || !all_finite(out.v) || !all_finite(out.T)) {
    throw BlowupError("numerical blow-up: nonfinite state after step");
  }
  return out;
}

Trajectory integrate(const ParticleEnsemble& s0, const ModelParams& p,
                     const IntegratorConfig& cfg,
                     const DiagnosticsTracker& diag, const Observer& observer) {
  cfg.validate();
  s0.validate();
  p.validate();

  const StepPlan plan(cfg.dt, cfg.t_end, cfg.record_stride);
  Trajectory traj;

  ParticleEnsemble state = s0;
  auto emit = [&](std::size_t k) {
    const double t = plan.time_at(k);
    DiagnosticsRecord rec = diag.record(t, state);
    if (observer) observer(rec, state);
    traj.times.push_back(t);
    traj.records.push_back(std::move(rec));
    if (cfg.keep_states) traj.states.push_back(state);
  };

  emit(0);
  for (std::size_t k = 0; k < plan.total_steps(); ++k) {
    const double t = plan.time_at(k);
    try {
      state = rk4_step(state, p, plan.step_size(k));
    } catch (const CollapseError& e) {
      throw CollapseError(std::string(e.what()) + " (step starting at t = " +
                          std::to_string(t) + ")");
    } catch (const BlowupError& e) {
      throw BlowupError(std::string(e.what()) + " (step starting at t = " +
                        std::to_string(t) + ")");
    }
    if (plan.records_at(k + 1)) emit(k + 1);
  }
  return traj;
}

}  // namespace tcs
