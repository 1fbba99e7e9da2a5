#include "tcs/model.hpp"

#include <cmath>

#include "tcs/numeric.hpp"

namespace tcs {

CommunicationKernel::CommunicationKernel(double amplitude, double exponent) {
  if (!std::isfinite(amplitude) || amplitude <= 0.0) {
    throw std::invalid_argument("kernel amplitude must be positive and finite");
  }
  if (!std::isfinite(exponent) || exponent < 0.0) {
    throw std::invalid_argument("kernel exponent must be nonnegative and finite");
  }
  amplitude_ = amplitude;
  exponent_ = exponent;
}

CommunicationKernel CommunicationKernel::custom(std::function<double(double)> fn,
                                                double r_max) {
  if (!fn) throw std::invalid_argument("custom kernel requires a callable");
  if (!std::isfinite(r_max) || r_max <= 0.0) {
    throw std::invalid_argument("custom kernel spot-check range must be positive");
  }
  constexpr int kSamples = 512;
  double prev = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double r = r_max * static_cast<double>(i) / kSamples;
    const double w = fn(r);
    if (!std::isfinite(w) || w <= 0.0) {
      throw std::invalid_argument("custom kernel must be positive and finite");
    }
    if (i > 0 && w > prev) {
      throw std::invalid_argument("custom kernel must be nonincreasing");
    }
    prev = w;
  }
  CommunicationKernel k;
  k.amplitude_ = fn(0.0);
  k.exponent_ = 0.0;
  k.fn_ = std::move(fn);
  return k;
}

double CommunicationKernel::operator()(double r) const {
  if (!std::isfinite(r) || r < 0.0) {
    throw std::domain_error("kernel distance must be finite and nonnegative");
  }
  if (fn_) return fn_(r);
  return from_squared(r * r);
}

double CommunicationKernel::from_squared(double r_sq) const {
  if (fn_) return fn_(std::sqrt(r_sq));
  const double base = 1.0 + r_sq;
  if (exponent_ == 1.0) return amplitude_ / std::sqrt(base);
  if (exponent_ == 0.0) return amplitude_;
  return amplitude_ * std::pow(base, -0.5 * exponent_);
}

void ModelParams::validate() const {
  if (!std::isfinite(kappa1) || kappa1 <= 0.0) {
    throw std::invalid_argument("kappa1 must be positive");
  }
  if (!std::isfinite(kappa2) || kappa2 <= 0.0) {
    throw std::invalid_argument("kappa2 must be positive");
  }
  if (dim == 0) throw std::invalid_argument("dim must be at least 1");
}

ParticleEnsemble ParticleEnsemble::zeros(std::size_t n, std::size_t dim) {
  ParticleEnsemble s;
  s.n = n;
  s.dim = dim;
  s.x.assign(n * dim, 0.0);
  s.v.assign(n * dim, 0.0);
  s.T.assign(n, 1.0);
  return s;
}

void ParticleEnsemble::validate() const {
  if (n == 0 || dim == 0) {
    throw std::invalid_argument("ensemble needs n >= 1 and dim >= 1");
  }
  if (x.size() != n * dim || v.size() != n * dim || T.size() != n) {
    throw std::invalid_argument("ensemble array sizes are inconsistent");
  }
  if (!all_finite(x) || !all_finite(v) || !all_finite(T)) {
    throw std::invalid_argument("ensemble contains nonfinite entries");
  }
  for (double t : T) {
    if (t <= 0.0) throw std::invalid_argument("temperatures must be positive");
  }
}

Mean center_of_mass(const ParticleEnsemble& s) {
  const std::size_t n = s.n, d = s.dim;
  Mean m;
  m.x_c.assign(d, 0.0);
  m.v_c.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    CompensatedSum sx, sv;
    for (std::size_t a = 0; a < n; ++a) {
      sx.add(s.x[a * d + k]);
      sv.add(s.v[a * d + k]);
    }
    m.x_c[k] = sx.value() / static_cast<double>(n);
    m.v_c[k] = sv.value() / static_cast<double>(n);
  }
  m.T_c = compensated_total(s.T) / static_cast<double>(n);
  return m;
}

InitialStats initial_stats(const ParticleEnsemble& s0) {
  const Mean m = center_of_mass(s0);
  InitialStats st;
  st.T_c0 = m.T_c;
  st.x_c0 = m.x_c;
  st.v_c0 = m.v_c;
  CompensatedSum sq;
  for (std::size_t a = 0; a < s0.n; ++a) {
    sq.add(squared_norm(s0.vel(a)));
  }
  st.half_mean_sq_speed = 0.5 * sq.value() / static_cast<double>(s0.n);
  st.energy0 = total_energy(s0);
  return st;
}

double asymptotic_temperature(const InitialStats& stats,
                              std::span<const double> v_c_now) {
  return stats.T_c0 + stats.half_mean_sq_speed - 0.5 * squared_norm(v_c_now);
}

std::pair<double, double> extreme_temperature_bounds(const ParticleEnsemble& s0) {
  const InitialStats st = initial_stats(s0);
  const double T_M = st.T_c0 + st.half_mean_sq_speed;
  const double T_m = T_M - squared_norm(st.v_c0) - squared_norm(st.x_c0);
  if (T_m <= 0.0) {
    throw std::domain_error(
        "inadmissible initial data: lower temperature bound T_m <= 0");
  }
  return {T_m, T_M};
}

Derivative rhs(const ParticleEnsemble& s, const ModelParams& p) {
  const std::size_t n = s.n, d = s.dim;
  if (d != p.dim) {
    throw std::invalid_argument("ensemble and params dimension mismatch");
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (s.T[a] <= kCollapseThreshold) {
      throw CollapseError("temperature collapse: T <= 1e-12 at particle " +
                          std::to_string(a));
    }
  }

  const Mean m = center_of_mass(s);

  // w_a = (v_a - v_c) / T_a enters both the force and the heat-work balance.
  std::vector<double> invT(n), w(n * d);
  for (std::size_t a = 0; a < n; ++a) {
    invT[a] = 1.0 / s.T[a];
    for (std::size_t k = 0; k < d; ++k) {
      w[a * d + k] = (s.v[a * d + k] - m.v_c[k]) * invT[a];
    }
  }

  // Pairwise accumulation. Each unordered pair contributes exactly opposite
  // amounts to its two rows, which keeps the ensemble sums of the coupling
  // terms at the compensation level.
  std::vector<CompensatedSum> force(n * d);
  std::vector<CompensatedSum> heat(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double r_sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = s.x[a * d + k] - s.x[b * d + k];
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

  Derivative out;
  out.dx = s.v;
  out.dv.resize(n * d);
  out.dT.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    double work = 0.0;  // coupling force dotted with the mean velocity
    double vdv = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double f = fscale * force[a * d + k].value();
      const double dv = f - s.x[a * d + k];
      out.dv[a * d + k] = dv;
      work += f * m.v_c[k];
      vdv += s.v[a * d + k] * dv;
    }
    out.dT[a] = hscale * heat[a].value() + work - vdv;
  }
  return out;
}

double total_energy(const ParticleEnsemble& s) {
  CompensatedSum e;
  for (std::size_t a = 0; a < s.n; ++a) {
    e.add(s.T[a] + 0.5 * squared_norm(s.vel(a)));
  }
  return e.value();
}

}  // namespace tcs
