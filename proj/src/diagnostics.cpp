#include "tcs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcs/numeric.hpp"

namespace tcs {

FluctuationState fluctuations(const ParticleEnsemble& s, double T_inf) {
  const Mean m = center_of_mass(s);
  const std::size_t n = s.n, d = s.dim;
  FluctuationState f;
  f.n = n;
  f.dim = d;
  f.xhat.resize(n * d);
  f.vhat.resize(n * d);
  f.That.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < d; ++k) {
      f.xhat[a * d + k] = s.x[a * d + k] - m.x_c[k];
      f.vhat[a * d + k] = s.v[a * d + k] - m.v_c[k];
    }
    f.That[a] = s.T[a] - T_inf;
  }
  return f;
}

Norms norms(const FluctuationState& f) {
  CompensatedSum sx, sv, st;
  for (std::size_t i = 0; i < f.xhat.size(); ++i) {
    sx.add(f.xhat[i] * f.xhat[i]);
    sv.add(f.vhat[i] * f.vhat[i]);
  }
  for (double th : f.That) st.add(th * th);
  Norms out;
  out.X = std::sqrt(sx.value());
  out.V = std::sqrt(sv.value());
  out.Tnorm = std::sqrt(st.value());
  return out;
}

double mean_residual(const FluctuationState& f) {
  double worst = 0.0;
  for (std::size_t k = 0; k < f.dim; ++k) {
    CompensatedSum sx, sv;
    for (std::size_t a = 0; a < f.n; ++a) {
      sx.add(f.xhat[a * f.dim + k]);
      sv.add(f.vhat[a * f.dim + k]);
    }
    worst = std::max({worst, std::abs(sx.value()), std::abs(sv.value())});
  }
  return worst;
}

LyapunovValue lyapunov(const FluctuationState& f, double eps) {
  CompensatedSum acc;
  const std::size_t d = f.dim;
  for (std::size_t a = 0; a < f.n; ++a) {
    double cross = 0.0, qx = 0.0, qv = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double xh = f.xhat[a * d + k];
      const double vh = f.vhat[a * d + k];
      qx += xh * xh;
      qv += vh * vh;
      cross += xh * vh;
    }
    acc.add(0.5 * qx + 0.5 * qv + eps * cross);
  }
  LyapunovValue out;
  out.value = acc.value();
  out.eps_in_range = eps > 0.0 && eps <= 0.5;
  return out;
}

FluctuationDerivative fluctuation_rhs(const FluctuationState& f,
                                      std::span<const double> x_c,
                                      std::span<const double> v_c,
                                      double T_inf, const ModelParams& p) {
  const std::size_t n = f.n, d = f.dim;
  if (x_c.size() != d || v_c.size() != d || d != p.dim) {
    throw std::invalid_argument("fluctuation_rhs dimension mismatch");
  }

  std::vector<double> invT(n), w(n * d);
  for (std::size_t a = 0; a < n; ++a) {
    const double Ta = f.That[a] + T_inf;
    if (Ta <= kCollapseThreshold) {
      throw CollapseError("temperature denominator nonpositive at particle " +
                          std::to_string(a));
    }
    invT[a] = 1.0 / Ta;
    for (std::size_t k = 0; k < d; ++k) {
      w[a * d + k] = f.vhat[a * d + k] * invT[a];
    }
  }

  std::vector<CompensatedSum> force(n * d);
  std::vector<CompensatedSum> heat(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double r_sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = f.xhat[a * d + k] - f.xhat[b * d + k];
        r_sq += diff * diff;
      }
      const double phi_ab = p.phi.from_squared(r_sq);
      const double zeta_ab = p.zeta.from_squared(r_sq);
      for (std::size_t k = 0; k < d; ++k) {
        const double c = phi_ab * (w[b * d + k] - w[a * d + k]);
        force[a * d + k].add(c);
        force[b * d + k].add(-c);
      }
      const double h = zeta_ab * (invT[a] - invT[b]);
      heat[a].add(h);
      heat[b].add(-h);
    }
  }

  const double fscale = p.kappa1 / static_cast<double>(n);
  const double hscale = p.kappa2 / static_cast<double>(n);

  FluctuationDerivative out;
  out.dxhat = f.vhat;
  out.dvhat.resize(n * d);
  out.dThat.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    double fdotv = 0.0, xdotv = 0.0, drive = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double fc = fscale * force[a * d + k].value();
      const double xh = f.xhat[a * d + k];
      const double vh = f.vhat[a * d + k];
      out.dvhat[a * d + k] = fc - xh;
      fdotv += fc * vh;
      xdotv += xh * vh;
      drive += v_c[k] * xh + x_c[k] * vh;
    }
    out.dThat[a] = hscale * heat[a].value() - fdotv + xdotv + drive;
  }
  return out;
}

void MeanOrbit::eval(double t, std::vector<double>& x_c,
                     std::vector<double>& v_c) const {
  const double c = std::cos(t), s = std::sin(t);
  const std::size_t d = x0.size();
  x_c.resize(d);
  v_c.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    x_c[k] = c * x0[k] + s * v0[k];
    v_c[k] = -s * x0[k] + c * v0[k];
  }
}

DiagnosticsTracker::DiagnosticsTracker(const ParticleEnsemble& s0, double eps)
    : stats_(initial_stats(s0)), eps_(eps) {}

DiagnosticsRecord DiagnosticsTracker::record(double t,
                                             const ParticleEnsemble& s) const {
  const Mean m = center_of_mass(s);
  DiagnosticsRecord r;
  r.t = t;
  r.x_c = m.x_c;
  r.v_c = m.v_c;
  r.T_inf = asymptotic_temperature(stats_, m.v_c);
  const FluctuationState f = fluctuations(s, r.T_inf);
  const Norms nm = norms(f);
  r.X = nm.X;
  r.V = nm.V;
  r.Tnorm = nm.Tnorm;
  r.energy = total_energy(s);
  r.lyapunov = lyapunov(f, eps_).value;
  const auto [lo, hi] = std::minmax_element(s.T.begin(), s.T.end());
  r.minT = *lo;
  r.maxT = *hi;
  r.mean_residual = mean_residual(f);
  r.that_sum = compensated_total(f.That);
  return r;
}

}  // namespace tcs
