#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tcs/diagnostics.hpp"
#include "tcs/model.hpp"

namespace tcs {

struct IntegratorConfig {
  double dt = 0.01;
  double t_end = 50.0;
  std::size_t record_stride = 1;
  bool keep_states = false;

  void validate() const;
};

/// Fixed-step schedule from 0 to t_end. All steps have length dt except the
/// last, which is truncated (or nudged by rounding) so the final time is
/// exactly t_end. Step k starts at time_at(k).
class StepPlan {
 public:
  StepPlan(double dt, double t_end, std::size_t record_stride);

  std::size_t total_steps() const { return steps_; }
  double step_size(std::size_t k) const;
  double time_at(std::size_t k) const;
  bool records_at(std::size_t k) const {
    return k % stride_ == 0 || k == steps_;
  }

 private:
  double dt_;
  double t_end_;
  std::size_t stride_;
  std::size_t steps_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DiagnosticsRecord> records;
  std::vector<ParticleEnsemble> states;  ///< filled only when keep_states
};

using Observer =
    std::function<void(const DiagnosticsRecord&, const ParticleEnsemble&)>;

/// One classical Runge-Kutta update of length dt. Throws BlowupError when a
/// stage derivative or the result is nonfinite; temperature collapse
/// propagates from the stage evaluations.
ParticleEnsemble rk4_step(const ParticleEnsemble& s, const ModelParams& p,
                          double dt);

/// Integrate from t=0 to cfg.t_end, producing one record (and observer call)
/// per stride multiple plus the final time. Step failures are rethrown with
/// the failing time attached.
Trajectory integrate(const ParticleEnsemble& s0, const ModelParams& p,
                     const IntegratorConfig& cfg,
                     const DiagnosticsTracker& diag,
                     const Observer& observer = {});

}  // namespace tcs
