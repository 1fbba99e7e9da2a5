#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcs/analysis.hpp"
#include "tcs/integrator.hpp"
#include "tcs/model.hpp"
#include "tcs/verification.hpp"

namespace tcs {

/// Invalid configuration file, key, value, or preset name.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// Everything needed to reproduce one experiment: sampling boxes, seed,
/// model coupling, step plan, and the two analysis margins.
struct ScenarioConfig {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<Interval> position_box;  ///< one interval per dimension
  std::vector<Interval> velocity_box;  ///< one interval per dimension
  Interval temperature_interval;
  std::uint64_t seed = 0;

  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double phi_amplitude = 1.0;
  double phi_exponent = 1.0;
  double zeta_amplitude = 1.0;
  double zeta_exponent = 1.0;

  double dt = 0.01;
  double t_end = 50.0;
  std::size_t record_stride = 1;

  double eps = 0.0;
  double eps0 = 0.0;

  /// Throws ConfigError on structural problems (sizes, empty intervals,
  /// nonpositive temperatures or steps).
  void validate() const;

  ModelParams model_params() const;
  IntegratorConfig integrator_config() const;
};

/// Built-in configurations. Throws ConfigError for unknown names.
/// Available: "paper-sec6".
ScenarioConfig preset(const std::string& name);

/// Parse `key = value` text. Errors carry 1-based line numbers; unknown and
/// duplicate keys are rejected; an empty file is an error.
ScenarioConfig parse_config(const std::string& text);

ScenarioConfig load_config(const std::string& path);

/// Canonical text form; load_config(save_config(c)) reproduces c exactly
/// (reals are written with 17 significant digits).
std::string config_to_string(const ScenarioConfig& cfg);

void save_config(const ScenarioConfig& cfg, const std::string& path);

/// Apply one `key=value` override, same keys and syntax as the file format.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

/// Draw the initial ensemble. Each coordinate is uniform on its interval,
/// produced by a counter-based generator keyed by (seed, particle,
/// coordinate slot) so the result does not depend on evaluation order.
ParticleEnsemble sample_initial_data(const ScenarioConfig& cfg);

void write_timeseries(const Trajectory& traj, std::ostream& os);
void write_timeseries(const Trajectory& traj, const std::string& path);

/// Columns of a saved time series, in file order.
struct TimeSeries {
  std::size_t dim = 0;
  std::vector<double> t, X, V, Tnorm, E;
  std::vector<double> xc, vc;  ///< row-major, dim entries per record
  std::vector<double> Tinf, L, minT, maxT;

  std::size_t rows() const { return t.size(); }
};

TimeSeries read_timeseries(std::istream& is);
TimeSeries read_timeseries(const std::string& path);

/// Pinned tolerance coefficients for the conserved-quantity audit.
inline constexpr double kEnergyDriftTol = 1e-8;
inline constexpr double kComTol = 1e-8;
inline constexpr double kMeanResidualCoeff = 1e-9;  ///< times n * scale
inline constexpr double kIdentityCoeff = 1e-8;      ///< times max(1, |E0|)

/// Worst-case deviations of quantities the exact flow keeps fixed, with the
/// budgets they are held to. Residual and identity budgets scale with the
/// particle count, the coordinate magnitudes, and the energy magnitude.
struct DriftMetrics {
  double energy_rel = 0.0;      ///< max |E - E(0)| / max(1, |E(0)|)
  double com_error = 0.0;       ///< max deviation from the closed-form orbit
  double mean_residual = 0.0;   ///< max |sum xhat|, |sum vhat| over records
  double identity_error = 0.0;  ///< max |sum That + V^2/2| over records
  double mean_residual_budget = 0.0;
  double identity_budget = 0.0;

  bool within_tolerances() const {
    return energy_rel <= kEnergyDriftTol && com_error <= kComTol &&
           mean_residual <= mean_residual_budget &&
           identity_error <= identity_budget;
  }
};

/// Which set of sufficient conditions gates verification and exit codes.
enum class GateVariant { strict, relaxed };

/// Everything a run produces apart from the time series itself.
struct RunReport {
  ScenarioConfig config;
  GateVariant gate = GateVariant::strict;

  bool has_constants = false;
  std::string constants_error;  ///< set when the margins are unsatisfiable
  HypothesisReport strict;
  HypothesisReport relaxed;
  double Tnorm0 = 0.0;

  std::optional<DriftMetrics> drift;
  std::optional<DecayCheck> decay;
  std::optional<DissipationCheck> dissipation;
  std::vector<DecayFit> fits;
  std::vector<std::string> notes;

  std::string error;  ///< numerical failure message
  int exit_code = 0;

  const HypothesisReport& gated() const {
    return gate == GateVariant::strict ? strict : relaxed;
  }
  bool hypotheses_ok() const { return has_constants && gated().overall; }
};

/// Process exit codes shared by the library and the command line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitUnsatisfied = 3;
inline constexpr int kExitNumerical = 4;

/// Hypothesis evaluation only; no integration.
RunReport run_check(const ScenarioConfig& cfg, GateVariant gate);

/// Full run: sample, integrate, audit conserved quantities, verify the decay
/// envelopes and the dissipative inequality, fit decay rates. When out_traj
/// is nonnull the trajectory is handed back for reuse.
RunReport run_simulation(const ScenarioConfig& cfg, GateVariant gate,
                         Trajectory* out_traj = nullptr);

/// Human-readable report followed by a machine-readable key=value trailer.
std::string report_to_string(const RunReport& report);

void save_report(const RunReport& report, const std::string& path);

/// Cartesian sweep grid over coupling strengths and the corridor margin.
struct SweepSpec {
  std::vector<double> kappa1;
  std::vector<double> kappa2;
  std::vector<double> eps0;
};

struct SweepCell {
  std::size_t index = 0;
  ScenarioConfig config;
  RunReport report;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  int exit_code = 0;  ///< worst cell, by severity
};

/// Run one simulation per grid cell, workers cells at a time. Results are
/// deterministic and independent of the worker count. workers == 0 means
/// TCS_WORKERS or, failing that, the hardware concurrency.
SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
                      GateVariant gate = GateVariant::strict,
                      std::size_t workers = 0);

std::string sweep_summary(const SweepResult& result);

/// Command line entry point (subcommands: simulate, check, fit, oracle,
/// sweep). Returns a process exit code.
int cli_main(const std::vector<std::string>& args);

}  // namespace tcs
