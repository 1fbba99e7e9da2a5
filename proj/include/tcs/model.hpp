#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tcs {

/// Thrown when a particle temperature falls to the collapse threshold.
/// Temperatures sit in denominators, so integration cannot continue.
class CollapseError : public std::runtime_error {
 public:
  explicit CollapseError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a state or derivative stops being finite.
class BlowupError : public std::runtime_error {
 public:
  explicit BlowupError(const std::string& what) : std::runtime_error(what) {}
};

/// Temperatures at or below this value abort the run.
inline constexpr double kCollapseThreshold = 1e-12;

/// Distance-dependent interaction weight.
///
/// The built-in family is c*(1+r^2)^(-beta/2) with amplitude c > 0 and decay
/// exponent beta >= 0. Every member is positive, nonincreasing in r, and
/// Lipschitz with constant c*beta/2. Custom shapes can be supplied through
/// custom(); they are spot-checked for positivity and monotonicity on a
/// sample grid at construction and rejected if the check fails.
class CommunicationKernel {
 public:
  CommunicationKernel(double amplitude, double exponent);

  static CommunicationKernel custom(std::function<double(double)> fn,
                                    double r_max = 100.0);

  /// Weight at distance r. Throws std::domain_error unless r is finite
  /// and nonnegative.
  double operator()(double r) const;

  /// Weight as a function of the squared distance. Equivalent to
  /// operator()(sqrt(r_sq)) and used by the pair loop, which already has
  /// squared distances in hand.
  double from_squared(double r_sq) const;

  double amplitude() const { return amplitude_; }
  double exponent() const { return exponent_; }
  bool is_power_law() const { return !fn_; }

  /// Lipschitz constant c*beta/2 of the built-in family.
  double lipschitz_bound() const { return amplitude_ * exponent_ / 2.0; }

 private:
  CommunicationKernel() = default;

  double amplitude_ = 1.0;
  double exponent_ = 1.0;
  std::function<double(double)> fn_;
};

/// Coupling strengths and kernels of the interacting system.
struct ModelParams {
  double kappa1 = 1.0;              ///< velocity coupling strength
  double kappa2 = 1.0;              ///< temperature coupling strength
  CommunicationKernel phi{1.0, 1.0};   ///< velocity alignment weight
  CommunicationKernel zeta{1.0, 1.0};  ///< heat exchange weight
  std::size_t dim = 2;

  /// Throws std::invalid_argument on negative couplings or dim == 0.
  /// Zero couplings are legal: they decouple the corresponding exchange.
  void validate() const;
};

/// State of n particles in d dimensions: positions, velocities and
/// per-particle temperatures. Coordinate arrays are flat, row-major
/// (particle index major).
struct ParticleEnsemble {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> x;  ///< n*dim
  std::vector<double> v;  ///< n*dim
  std::vector<double> T;  ///< n, strictly positive

  static ParticleEnsemble zeros(std::size_t n, std::size_t dim);

  std::span<const double> pos(std::size_t a) const {
    return {x.data() + a * dim, dim};
  }
  std::span<const double> vel(std::size_t a) const {
    return {v.data() + a * dim, dim};
  }

  /// Throws std::invalid_argument on inconsistent sizes, nonfinite entries,
  /// or temperatures that are not strictly positive.
  void validate() const;
};

/// Time derivative of an ensemble, same layout as the state.
struct Derivative {
  std::vector<double> dx;  ///< n*dim
  std::vector<double> dv;  ///< n*dim
  std::vector<double> dT;  ///< n
};

/// Ensemble means.
struct Mean {
  std::vector<double> x_c;
  std::vector<double> v_c;
  double T_c = 0.0;
};

/// Quantities of the initial state that the exact flow conserves. They fix
/// the target temperature and the closed-form mean orbit for all later times.
struct InitialStats {
  double T_c0 = 0.0;                ///< mean temperature at t=0
  double half_mean_sq_speed = 0.0;  ///< (1/2n) sum_a |v_a(0)|^2
  std::vector<double> x_c0;
  std::vector<double> v_c0;
  double energy0 = 0.0;             ///< total energy at t=0
};

Mean center_of_mass(const ParticleEnsemble& s);

InitialStats initial_stats(const ParticleEnsemble& s0);

/// Target temperature the ensemble homogenizes toward. Time enters only
/// through the current mean velocity:
///   T_inf = T_c(0) + (1/2n) sum |v(0)|^2 - |v_c|^2 / 2.
double asymptotic_temperature(const InitialStats& stats,
                              std::span<const double> v_c_now);

/// Initial-data constants bounding T_inf from below and above:
///   T_M = T_c(0) + (1/2n) sum |v(0)|^2,
///   T_m = T_M - |v_c(0)|^2 - |x_c(0)|^2.
/// Throws std::domain_error("inadmissible initial data...") when T_m <= 0.
std::pair<double, double> extreme_temperature_bounds(const ParticleEnsemble& s0);

/// Right-hand side of the coupled system:
///   dx_a = v_a
///   dv_a = (k1/n) sum_b phi(|x_a-x_b|) ((v_b-v_c)/T_b - (v_a-v_c)/T_a) - x_a
///   dT_a = (k2/n) sum_b zeta(|x_a-x_b|) (1/T_a - 1/T_b)
///          + [coupling term of dv_a] . v_c - v_a . dv_a
/// The temperature equation is the total-energy balance solved for dT_a
/// using the dv_a just computed. v_c is the mean velocity of the instant
/// state. Throws CollapseError if any temperature is at or below the
/// collapse threshold.
Derivative rhs(const ParticleEnsemble& s, const ModelParams& p);

/// Total energy sum_a (T_a + |v_a|^2 / 2); conserved by the exact flow.
double total_energy(const ParticleEnsemble& s);

}  // namespace tcs
