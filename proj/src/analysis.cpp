#include "tcs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tcs/diagnostics.hpp"
#include "tcs/numeric.hpp"

namespace tcs {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

ConditionResult condition(std::string name, bool satisfied, double lhs,
                          double rhs, double slack) {
  ConditionResult c;
  c.name = std::move(name);
  c.satisfied = satisfied;
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = slack;
  return c;
}

void finish(HypothesisReport& rep) {
  rep.overall = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                            [](const ConditionResult& c) { return c.satisfied; });
}

}  // namespace

double coupling_decay_rate(double kappa1, double T_M, double eps0) {
  return kappa1 / (2.0 * (T_M + eps0));
}

double cross_term_gain(double kappa1, double phi0, double T_m, double eps0) {
  const double q = kappa1 * phi0 / (T_m - eps0);
  return 3.0 * q * q + 1.0;
}

HypothesisConstants compute_constants(const ParticleEnsemble& s0,
                                   const ModelParams& p, double eps,
                                   double eps0) {
  if (!(eps > 0.0) || !(eps0 > 0.0)) {
    throw std::domain_error("eps and eps0 must be positive");
  }
  const auto [T_m, T_M] = extreme_temperature_bounds(s0);
  if (T_m <= eps0) {
    throw std::domain_error(
        "margin denominators require T_m > eps0; got T_m = " +
        std::to_string(T_m) + ", eps0 = " + std::to_string(eps0));
  }

  const InitialStats st = initial_stats(s0);
  const double T_inf0 = asymptotic_temperature(st, st.v_c0);
  const FluctuationState f0 = fluctuations(s0, T_inf0);
  const Norms nm = norms(f0);

  HypothesisConstants c;
  c.T_m = T_m;
  c.T_M = T_M;
  c.eps0 = eps0;
  c.eps = eps;
  c.delta_star = T_m / eps0;
  c.kappa1 = p.kappa1;
  c.kappa2 = p.kappa2;
  c.n = s0.n;
  c.phi0 = p.phi(0.0);
  const double ball = 3.0 * kSqrt2 * eps0;
  c.phi_ball = p.phi(ball);
  c.zeta_ball = p.zeta(ball);
  c.lambda = coupling_decay_rate(p.kappa1, T_M, eps0);
  c.gamma = cross_term_gain(p.kappa1, c.phi0, T_m, eps0);
  c.Z0_sq = nm.X * nm.X + nm.V * nm.V;
  c.X0 = nm.X;
  c.V0 = nm.V;
  c.zc0_norm =
      std::sqrt(squared_norm(st.x_c0) + squared_norm(st.v_c0));

  const double margin_lo = T_m - eps0;
  const double margin_hi = T_M + eps0;
  c.A1 = 2.0 * p.kappa2 * c.zeta_ball / (margin_hi * margin_hi) -
         p.kappa1 * c.phi0 / margin_lo - 1.0 -
         16.0 * p.kappa1 * c.phi0 * c.Z0_sq / (margin_lo * margin_lo) -
         2.0 * kSqrt2 * c.zc0_norm;
  c.A2 = 16.0 *
             (2.0 * c.phi0 * p.kappa1 / margin_lo +
              p.kappa2 * c.zeta_ball /
                  (2.0 * static_cast<double>(s0.n) * margin_hi * margin_hi) +
              1.0) *
             c.Z0_sq * c.Z0_sq +
         4.0 * kSqrt2 * c.zc0_norm * c.Z0_sq;
  return c;
}

HypothesisReport check_strict_conditions(const HypothesisConstants& c,
                                         double Tnorm0) {
  HypothesisReport rep;
  rep.constants = c;
  rep.variant = ConditionVariant::strict;

  rep.conditions.push_back(condition("temperature_margin", c.delta_star > 3.0,
                                     c.delta_star, 3.0, c.delta_star - 3.0));

  const double zmax = std::max(c.X0, c.V0);
  rep.conditions.push_back(condition("initial_fluctuation_size",
                                     c.X0 <= c.eps0 && c.V0 <= c.eps0, zmax,
                                     c.eps0, c.eps0 - zmax));

  const double denom = std::abs(c.A1 - 2.0 * c.eps / 3.0);
  const double budget_rhs =
      c.A1 > 0.0 && denom > 0.0
          ? Tnorm0 * Tnorm0 + c.A2 / denom
          : std::numeric_limits<double>::infinity();
  const bool budget_ok = c.eps0 * c.eps0 > budget_rhs;
  rep.conditions.push_back(condition("temperature_budget", budget_ok,
                                     c.eps0 * c.eps0, budget_rhs,
                                     c.eps0 * c.eps0 - budget_rhs));

  const bool eps_ok =
      c.eps > 0.0 && c.eps <= 0.5 && c.eps != 1.5 * c.A1;
  rep.conditions.push_back(
      condition("epsilon_range", eps_ok, c.eps, 0.5, 0.5 - c.eps));

  double level1 = std::numeric_limits<double>::infinity();
  if (c.lambda > 0.0) level1 = c.eps * (1.0 + c.gamma) / c.lambda;
  double level2 = std::numeric_limits<double>::infinity();
  if (c.delta_star > 1.0) {
    level2 = 2.0 * (c.T_M + c.eps0) * c.phi0 /
             ((c.delta_star - 1.0) * (c.T_m - c.eps0));
  }
  const double floor_rhs = std::max(level1, level2);
  rep.conditions.push_back(condition("kernel_floor", c.phi_ball > floor_rhs,
                                     c.phi_ball, floor_rhs,
                                     c.phi_ball - floor_rhs));

  finish(rep);
  return rep;
}

HypothesisReport check_relaxed_conditions(const HypothesisConstants& c,
                                          double Tnorm0) {
  HypothesisReport rep;
  rep.constants = c;
  rep.variant = ConditionVariant::relaxed;

  const double zmax = std::max(c.X0, c.V0);
  rep.conditions.push_back(condition("initial_fluctuation_size",
                                     c.X0 <= c.eps0 && c.V0 <= c.eps0, zmax,
                                     c.eps0, c.eps0 - zmax));

  const double denom = std::abs(c.A1 - 2.0 * c.eps / 3.0);
  const double budget_rhs =
      c.A1 > 0.0 && denom > 0.0
          ? Tnorm0 * Tnorm0 + c.A2 / denom
          : std::numeric_limits<double>::infinity();
  const bool budget_ok = c.eps0 * c.eps0 > budget_rhs;
  rep.conditions.push_back(condition("temperature_budget", budget_ok,
                                     c.eps0 * c.eps0, budget_rhs,
                                     c.eps0 * c.eps0 - budget_rhs));

  const double margin_lo = c.T_m - c.eps0;
  const double lhs = -2.0 * c.lambda * c.phi_ball + c.eps * c.gamma +
                     c.kappa1 * c.eps0 * c.phi0 / (margin_lo * margin_lo);
  rep.conditions.push_back(condition("dissipation_margin", lhs <= -c.eps, lhs,
                                     -c.eps, -c.eps - lhs));

  finish(rep);
  return rep;
}

GronwallValue gronwall_bound(double y0, double c1, double c2, double c3,
                             double t) {
  GronwallValue out;
  if (c1 == c3) {
    out.degenerate = true;
    out.value = (y0 + c2 * t) * std::exp(-c1 * t);
    return out;
  }
  out.value = y0 * std::exp(-c1 * t) +
              c2 / (c1 - c3) * (std::exp(-c3 * t) - std::exp(-c1 * t));
  return out;
}

double mechanical_envelope(const HypothesisConstants& c, double Z0_sq, double t) {
  return 4.0 * Z0_sq * std::exp(-2.0 * c.eps * t / 3.0);
}

double temperature_envelope(const HypothesisConstants& c, double Tnorm0_sq,
                            double t) {
  const double slow = 2.0 * c.eps / 3.0;
  if (c.A1 == slow) {
    throw std::domain_error(
        "temperature envelope undefined: A1 equals 2 eps / 3");
  }
  return Tnorm0_sq * std::exp(-c.A1 * t) +
         c.A2 / (c.A1 - slow) * (std::exp(-slow * t) - std::exp(-c.A1 * t));
}

DecayCheck verify_decay_bounds(const Trajectory& traj,
                               const HypothesisReport& report) {
  DecayCheck out;
  if (!report.overall) {
    out.refused = true;
    out.refusal_reason = "hypotheses not established";
    return out;
  }
  if (traj.records.empty()) {
    out.refused = true;
    out.refusal_reason = "empty trajectory";
    return out;
  }

  const HypothesisConstants& c = report.constants;
  const double Tnorm0 = traj.records.front().Tnorm;
  const double Tnorm0_sq = Tnorm0 * Tnorm0;
  for (const DiagnosticsRecord& r : traj.records) {
    ++out.checked;
    const double mech = r.X * r.X + r.V * r.V;
    const double mech_env = mechanical_envelope(c, c.Z0_sq, r.t);
    if (mech > mech_env + 1e-9 * mech_env + 1e-12) {
      out.mechanical.push_back({r.t, mech, mech_env});
    }
    const double temp = r.Tnorm * r.Tnorm;
    const double temp_env = temperature_envelope(c, Tnorm0_sq, r.t);
    if (temp > temp_env + 1e-9 * temp_env + 1e-12) {
      out.temperature.push_back({r.t, temp, temp_env});
    }
  }
  return out;
}

DecayFit fit_exponential(std::span<const double> times,
                         std::span<const double> values, double window_start,
                         double window_end, std::string quantity) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("fit_exponential: size mismatch");
  }
  if (!(window_start < window_end)) {
    throw std::invalid_argument("fit_exponential: empty window");
  }

  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_start || times[i] > window_end) continue;
    if (!(values[i] > 0.0)) continue;
    ts.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  if (ts.size() < 10) {
    throw std::invalid_argument(
        "fit_exponential: fewer than 10 positive samples in window");
  }

  const auto m = static_cast<double>(ts.size());
  CompensatedSum st, sy;
  for (double t : ts) st.add(t);
  for (double y : ys) sy.add(y);
  const double tbar = st.value() / m;
  const double ybar = sy.value() / m;

  CompensatedSum stt, sty;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt.add((ts[i] - tbar) * (ts[i] - tbar));
    sty.add((ts[i] - tbar) * (ys[i] - ybar));
  }
  const double slope = stt.value() > 0.0 ? sty.value() / stt.value() : 0.0;
  const double intercept = ybar - slope * tbar;

  CompensatedSum ss_res, ss_tot;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double pred = intercept + slope * ts[i];
    ss_res.add((ys[i] - pred) * (ys[i] - pred));
    ss_tot.add((ys[i] - ybar) * (ys[i] - ybar));
  }

  DecayFit fit;
  fit.quantity = std::move(quantity);
  fit.window_start = window_start;
  fit.window_end = window_end;
  fit.rate = -slope;
  fit.intercept = intercept;
  fit.r_squared =
      ss_tot.value() > 0.0 ? 1.0 - ss_res.value() / ss_tot.value() : 1.0;
  fit.samples = ts.size();
  return fit;
}

}  // namespace tcs
