#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tcs/integrator.hpp"
#include "tcs/model.hpp"

namespace tcs {

/// Every explicit constant entering the sufficient flocking conditions and
/// the proved decay envelopes, evaluated on a concrete initial state.
///
/// With e0 the a priori temperature margin and Z0_sq = X(0)^2 + V(0)^2:
///   lambda = k1 / (2 (T_M + e0))
///   gamma  = 3 (k1 phi(0))^2 / (T_m - e0)^2 + 1
///   A1 = 2 k2 zeta(3 sqrt2 e0) / (T_M + e0)^2 - k1 phi(0) / (T_m - e0) - 1
///        - 16 k1 phi(0) Z0_sq / (T_m - e0)^2 - 2 sqrt2 |z_c(0)|
///   A2 = 16 (2 phi(0) k1 / (T_m - e0)
///            + k2 zeta(3 sqrt2 e0) / (2 n (T_M + e0)^2) + 1) Z0_sq^2
///        + 4 sqrt2 |z_c(0)| Z0_sq
struct HypothesisConstants {
  double T_m = 0.0;
  double T_M = 0.0;
  double eps0 = 0.0;
  double eps = 0.0;
  double delta_star = 0.0;  ///< T_m / eps0, the largest admissible margin ratio
  double lambda = 0.0;
  double gamma = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
  double Z0_sq = 0.0;
  double X0 = 0.0;        ///< position fluctuation norm of the initial state
  double V0 = 0.0;        ///< velocity fluctuation norm of the initial state
  double zc0_norm = 0.0;  ///< sqrt(|x_c(0)|^2 + |v_c(0)|^2)

  // Evaluated kernel levels and raw inputs carried along so that condition
  // checks need no second look at the model.
  double phi0 = 0.0;       ///< phi(0)
  double phi_ball = 0.0;   ///< phi(3 sqrt2 eps0)
  double zeta_ball = 0.0;  ///< zeta(3 sqrt2 eps0)
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  std::size_t n = 0;
};

struct ConditionResult {
  std::string name;
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< positive when satisfied with margin
};

enum class ConditionVariant { strict, relaxed };

struct HypothesisReport {
  HypothesisConstants constants;
  std::vector<ConditionResult> conditions;
  bool overall = false;
  ConditionVariant variant = ConditionVariant::strict;
};

/// Decay-rate coefficients shared by the analysis and the dissipation check.
double coupling_decay_rate(double kappa1, double T_M, double eps0);
double cross_term_gain(double kappa1, double phi0, double T_m, double eps0);

/// Evaluate all constants on an initial state. Throws std::domain_error when
/// T_m <= eps0 (the margin denominators must be positive) or the data are
/// inadmissible (T_m <= 0).
HypothesisConstants compute_constants(const ParticleEnsemble& s0,
                                   const ModelParams& p, double eps,
                                   double eps0);

/// Sufficient conditions in their sharp form. Evaluates, with slacks:
///   temperature margin        T_m / eps0 > 3
///   initial fluctuations      X(0) <= eps0, V(0) <= eps0
///   temperature budget        eps0^2 > Tnorm(0)^2 + A2 / |A1 - 2 eps / 3|
///   epsilon range             0 < eps <= 1/2 and eps != (3/2) A1
///   kernel floor              phi(3 sqrt2 eps0) > max of the two levels below
/// The kernel floor compares against eps (1 + gamma) / lambda and
/// 2 (T_M + eps0) phi(0) / ((delta* - 1)(T_m - eps0)). A nonpositive A1
/// makes the temperature budget unsatisfiable and fails the report.
HypothesisReport check_strict_conditions(const HypothesisConstants& c,
                                         double Tnorm0);

/// Relaxed sufficient conditions: the initial-data budget inequalities
/// plus the direct dissipation margin
///   -2 lambda phi(3 sqrt2 eps0) + eps gamma
///       + kappa1 eps0 phi(0) / (T_m - eps0)^2 <= -eps.
HypothesisReport check_relaxed_conditions(const HypothesisConstants& c,
                                          double Tnorm0);

struct GronwallValue {
  double value = 0.0;
  bool degenerate = false;  ///< c1 == c3, analytic-limit branch
};

/// Supremum solution of y' <= -c1 y + c2 exp(-c3 t), y(0) = y0:
///   y0 exp(-c1 t) + c2/(c1-c3) (exp(-c3 t) - exp(-c1 t)).
/// Equal rates c1 == c3 evaluate the analytic limit
/// y0 exp(-c1 t) + c2 t exp(-c1 t) and set the degenerate flag.
GronwallValue gronwall_bound(double y0, double c1, double c2, double c3,
                             double t);

/// Envelope for X^2 + V^2: four times its initial value, decaying at 2 eps/3.
double mechanical_envelope(const HypothesisConstants& c, double Z0_sq, double t);

/// Envelope for Tnorm^2:
///   Tnorm(0)^2 exp(-A1 t) + A2/(A1 - 2 eps/3) (exp(-2 eps t/3) - exp(-A1 t)).
/// Throws std::domain_error when A1 == 2 eps / 3 (excluded rate coincidence).
double temperature_envelope(const HypothesisConstants& c, double Tnorm0_sq,
                            double t);

struct DecayViolation {
  double t = 0.0;
  double measured = 0.0;
  double envelope = 0.0;
};

struct DecayCheck {
  bool refused = false;        ///< hypotheses not established, nothing checked
  std::string refusal_reason;
  std::size_t checked = 0;     ///< records compared against the envelopes
  std::vector<DecayViolation> mechanical;
  std::vector<DecayViolation> temperature;

  bool clean() const {
    return !refused && mechanical.empty() && temperature.empty();
  }
};

/// Compare every record against the proved envelopes, with tolerance
/// 1e-9 * envelope + 1e-12. Refuses (rather than reporting violations) when
/// the hypothesis report is not satisfied.
DecayCheck verify_decay_bounds(const Trajectory& traj,
                               const HypothesisReport& report);

struct DecayFit {
  std::string quantity;
  double window_start = 0.0;
  double window_end = 0.0;
  double rate = 0.0;       ///< minus the fitted slope of ln(value)
  double intercept = 0.0;  ///< fitted ln(value) at t = 0
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line through (t, ln value) for samples inside the window.
/// Nonpositive values are excluded; fewer than 10 usable samples throw
/// std::invalid_argument.
DecayFit fit_exponential(std::span<const double> times,
                         std::span<const double> values, double window_start,
                         double window_end, std::string quantity = {});

}  // namespace tcs
