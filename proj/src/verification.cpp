#include "tcs/verification.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tcs/analysis.hpp"
#include "tcs/diagnostics.hpp"
#include "tcs/numeric.hpp"

namespace tcs {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Largest temperature deviation from the asymptotic value at one record.
double temperature_deviation(const DiagnosticsRecord& r) {
  return std::max(r.T_inf - r.minT, r.maxT - r.T_inf);
}

}  // namespace

DissipationCheck dissipative_inequality_check(const Trajectory& traj,
                                              const ModelParams& p, double eps,
                                              double eps0) {
  DissipationCheck out;
  auto refuse = [&out](std::string why) {
    out.refused = true;
    out.refusal_reason = std::move(why);
  };

  const auto& rec = traj.records;
  const std::size_t m = rec.size();
  if (m < 5) {
    refuse("needs at least 5 records to budget the difference error");
    return out;
  }
  if (!(eps > 0.0) || !(eps0 > 0.0)) {
    refuse("eps and eps0 must be positive");
    return out;
  }

  const double h = traj.times[1] - traj.times[0];
  if (!(h > 0.0)) {
    refuse("record times must be increasing");
    return out;
  }
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(traj.times[i] - traj.times[i - 1] - h) > 1e-6 * h) {
      refuse("records are not uniformly spaced");
      return out;
    }
  }
  out.spacing = h;

  // The extreme initial temperatures determine the corridor margins. The
  // bound needs some admissible margin ratio above 3; without one no sample
  // can be checked.
  const double T_m = rec[0].minT;
  const double T_M = rec[0].maxT;
  if (!(T_m > 3.0 * eps0)) {
    refuse("temperature margin admits no ratio above 3 (T_m <= 3 eps0)");
    return out;
  }

  const double phi0 = p.phi(0.0);
  const double lambda = coupling_decay_rate(p.kappa1, T_M, eps0);
  const double gamma = cross_term_gain(p.kappa1, phi0, T_m, eps0);
  const double margin_lo = T_m - eps0;
  const double drift_gain = p.kappa1 * eps0 * phi0 / (margin_lo * margin_lo);

  // Budget for replacing dL/dt by a centered difference: the leading error
  // term is (h^2/6) L''', estimated from third differences of the data.
  double third_scale = 0.0;
  for (std::size_t i = 0; i + 3 < m; ++i) {
    const double d3 = rec[i + 3].lyapunov - 3.0 * rec[i + 2].lyapunov +
                      3.0 * rec[i + 1].lyapunov - rec[i].lyapunov;
    third_scale = std::max(third_scale, std::abs(d3) / (h * h * h));
  }
  out.tolerance = 10.0 * h * h * third_scale;

  std::vector<bool> in_range(m);
  for (std::size_t i = 0; i < m; ++i) {
    in_range[i] = temperature_deviation(rec[i]) <= eps0;
  }

  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (!in_range[i - 1] || !in_range[i] || !in_range[i + 1]) {
      out.out_of_range.push_back(traj.times[i]);
      continue;
    }
    const double dL =
        (rec[i + 1].lyapunov - rec[i - 1].lyapunov) / (2.0 * h);
    const double coeff = -2.0 * lambda * p.phi(kSqrt2 * rec[i].X) +
                         eps * gamma + drift_gain;
    const double bound = coeff * rec[i].V * rec[i].V -
                         0.5 * eps * rec[i].X * rec[i].X;
    ++out.samples_checked;
    if (dL > bound + out.tolerance) {
      out.violations.push_back(
          {traj.times[i], dL, bound + out.tolerance,
           dL - (bound + out.tolerance)});
    }
  }
  return out;
}

namespace {

FluctuationState stage_state(const FluctuationState& f,
                             const FluctuationDerivative& d, double h) {
  FluctuationState g = f;
  for (std::size_t i = 0; i < g.xhat.size(); ++i) {
    g.xhat[i] += h * d.dxhat[i];
    g.vhat[i] += h * d.dvhat[i];
  }
  for (std::size_t a = 0; a < g.That.size(); ++a) {
    g.That[a] += h * d.dThat[a];
  }
  return g;
}

void combine(FluctuationState& f, const FluctuationDerivative& k1,
             const FluctuationDerivative& k2, const FluctuationDerivative& k3,
             const FluctuationDerivative& k4, double h) {
  const double h6 = h / 6.0;
  for (std::size_t i = 0; i < f.xhat.size(); ++i) {
    f.xhat[i] +=
        h6 * (k1.dxhat[i] + 2.0 * k2.dxhat[i] + 2.0 * k3.dxhat[i] +
              k4.dxhat[i]);
    f.vhat[i] +=
        h6 * (k1.dvhat[i] + 2.0 * k2.dvhat[i] + 2.0 * k3.dvhat[i] +
              k4.dvhat[i]);
  }
  for (std::size_t a = 0; a < f.That.size(); ++a) {
    f.That[a] +=
        h6 * (k1.dThat[a] + 2.0 * k2.dThat[a] + 2.0 * k3.dThat[a] +
              k4.dThat[a]);
  }
}

bool finite_state(const FluctuationState& f) {
  return all_finite(f.xhat) && all_finite(f.vhat) && all_finite(f.That);
}

}  // namespace

double OracleDeviation::worst() const {
  return std::max({dX, dV, dTnorm});
}

OracleDeviation fluctuation_oracle_deviation(const ParticleEnsemble& s0,
                                             const ModelParams& p,
                                             const IntegratorConfig& cfg,
                                             const Trajectory& full) {
  s0.validate();
  p.validate();
  cfg.validate();

  const StepPlan plan(cfg.dt, cfg.t_end, cfg.record_stride);
  std::size_t expected = 1;
  for (std::size_t k = 1; k <= plan.total_steps(); ++k) {
    if (plan.records_at(k)) ++expected;
  }
  if (full.records.size() != expected) {
    throw std::invalid_argument(
        "trajectory does not match the integration schedule: expected " +
        std::to_string(expected) + " records, got " +
        std::to_string(full.records.size()));
  }

  const InitialStats st = initial_stats(s0);
  const MeanOrbit orbit(st);
  std::vector<double> xc(s0.dim), vc(s0.dim);

  auto aux_at = [&](double t) {
    orbit.eval(t, xc, vc);
    return asymptotic_temperature(st, vc);
  };

  double T_inf = aux_at(0.0);
  FluctuationState f = fluctuations(s0, T_inf);

  OracleDeviation dev;
  auto compare = [&](std::size_t idx, const FluctuationState& g) {
    const Norms nm = norms(g);
    const DiagnosticsRecord& r = full.records[idx];
    dev.dX = std::max(dev.dX, std::abs(nm.X - r.X));
    dev.dV = std::max(dev.dV, std::abs(nm.V - r.V));
    dev.dTnorm = std::max(dev.dTnorm, std::abs(nm.Tnorm - r.Tnorm));
    ++dev.compared;
  };
  compare(0, f);

  std::size_t next_record = 1;
  for (std::size_t k = 0; k < plan.total_steps(); ++k) {
    const double t = plan.time_at(k);
    const double h = plan.step_size(k);

    T_inf = aux_at(t);
    const FluctuationDerivative k1 = fluctuation_rhs(f, xc, vc, T_inf, p);
    T_inf = aux_at(t + 0.5 * h);
    const FluctuationDerivative k2 =
        fluctuation_rhs(stage_state(f, k1, 0.5 * h), xc, vc, T_inf, p);
    const FluctuationDerivative k3 =
        fluctuation_rhs(stage_state(f, k2, 0.5 * h), xc, vc, T_inf, p);
    T_inf = aux_at(t + h);
    const FluctuationDerivative k4 =
        fluctuation_rhs(stage_state(f, k3, h), xc, vc, T_inf, p);

    combine(f, k1, k2, k3, k4, h);
    if (!finite_state(f)) {
      throw BlowupError(
          "numerical blow-up in the fluctuation oracle (step starting at t "
          "= " +
          std::to_string(t) + ")");
    }
    if (plan.records_at(k + 1)) {
      compare(next_record++, f);
    }
  }
  return dev;
}

}  // namespace tcs
