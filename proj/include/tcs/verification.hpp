#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tcs/integrator.hpp"
#include "tcs/model.hpp"

namespace tcs {

/// One interior record where the finite-difference derivative of the
/// Lyapunov functional exceeds the dissipative bound beyond tolerance.
struct InequalityViolation {
  double t = 0.0;
  double lhs = 0.0;     ///< centered-difference dL/dt
  double rhs = 0.0;     ///< dissipative bound plus tolerance
  double excess = 0.0;  ///< lhs - rhs, positive for a violation
};

/// Outcome of testing, at every eligible interior record,
///   dL/dt <= (-2 lambda phi(sqrt2 X) + eps gamma
///             + kappa1 eps0 phi(0) / (T_m - eps0)^2) V^2 - (eps/2) X^2.
/// Records whose difference stencil leaves the temperature corridor
/// |T - T_inf| <= eps0 are skipped and listed in out_of_range.
struct DissipationCheck {
  bool refused = false;
  std::string refusal_reason;
  std::vector<double> out_of_range;
  std::vector<InequalityViolation> violations;
  std::size_t samples_checked = 0;
  double spacing = 0.0;    ///< record spacing h
  double tolerance = 0.0;  ///< finite-difference budget added to the bound

  bool clean() const { return !refused && violations.empty(); }
};

/// Check the dissipative inequality along recorded samples. The extreme
/// initial temperatures T_m, T_M are recovered from the first record. The
/// derivative is estimated by centered differences, with a tolerance of
/// 10 h^2 max|L'''| where the third derivative is estimated from third
/// differences of the recorded values.
DissipationCheck dissipative_inequality_check(const Trajectory& traj,
                                              const ModelParams& p, double eps,
                                              double eps0);

/// Largest per-record deviation between a direct integration of the
/// fluctuation system and the fluctuation records of a full simulation on
/// the same step schedule.
struct OracleDeviation {
  double dX = 0.0;
  double dV = 0.0;
  double dTnorm = 0.0;
  std::size_t compared = 0;

  double worst() const;
};

/// Integrate the fluctuation system directly from the fluctuations of s0,
/// carrying the ensemble means by their closed-form orbit, on the schedule
/// cfg. Compares the resulting norms record by record with those of `full`,
/// which must come from the same initial state and schedule.
OracleDeviation fluctuation_oracle_deviation(const ParticleEnsemble& s0,
                                             const ModelParams& p,
                                             const IntegratorConfig& cfg,
                                             const Trajectory& full);

}  // namespace tcs
