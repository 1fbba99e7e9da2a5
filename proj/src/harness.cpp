#include "tcs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <utility>

#include "tcs/diagnostics.hpp"
#include "tcs/numeric.hpp"

namespace tcs {

namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_real(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || t.empty()) {
    throw ConfigError(context + ": expected a real number, got '" + t + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& text,
                             const std::string& context) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || t.empty()) {
    throw ConfigError(context + ": expected a nonnegative integer, got '" +
                      t + "'");
  }
  return v;
}

Interval parse_interval(const std::string& text, const std::string& context) {
  const auto parts = split(strip_quotes(trim(text)), ',');
  if (parts.size() != 2) {
    throw ConfigError(context + ": expected 'lo,hi'");
  }
  return {parse_real(parts[0], context), parse_real(parts[1], context)};
}

std::vector<Interval> parse_box(const std::string& text,
                                const std::string& context) {
  const auto parts = split(strip_quotes(trim(text)), ';');
  std::vector<Interval> box;
  box.reserve(parts.size());
  for (const auto& p : parts) box.push_back(parse_interval(p, context));
  return box;
}

std::pair<double, double> parse_pair(const std::string& text,
                                     const std::string& context) {
  const Interval i = parse_interval(text, context);
  return {i.lo, i.hi};
}

std::string interval_to_string(const Interval& i) {
  return fmt_real(i.lo) + "," + fmt_real(i.hi);
}

std::string box_to_string(const std::vector<Interval>& box) {
  std::string out;
  for (std::size_t k = 0; k < box.size(); ++k) {
    if (k > 0) out += ";";
    out += interval_to_string(box[k]);
  }
  return out;
}

const char* const kConfigKeys[] = {
    "sampling.n",
    "sampling.dim",
    "sampling.position_box",
    "sampling.velocity_box",
    "sampling.temperature_interval",
    "sampling.seed",
    "model.kappa1",
    "model.kappa2",
    "model.phi",
    "model.zeta",
    "integrator.dt",
    "integrator.t_end",
    "integrator.record_stride",
    "analysis.eps",
    "analysis.eps0",
};

bool known_key(const std::string& key) {
  for (const char* k : kConfigKeys) {
    if (key == k) return true;
  }
  return false;
}

// t_end and record_stride have defaults; everything else must be present.
bool required_key(const std::string& key) {
  return key != "integrator.t_end" && key != "integrator.record_stride";
}

void assign_key(ScenarioConfig& cfg, const std::string& key,
                const std::string& value, const std::string& context) {
  if (key == "sampling.n") {
    cfg.n = static_cast<std::size_t>(parse_unsigned(value, context));
  } else if (key == "sampling.dim") {
    cfg.dim = static_cast<std::size_t>(parse_unsigned(value, context));
  } else if (key == "sampling.position_box") {
    cfg.position_box = parse_box(value, context);
  } else if (key == "sampling.velocity_box") {
    cfg.velocity_box = parse_box(value, context);
  } else if (key == "sampling.temperature_interval") {
    cfg.temperature_interval = parse_interval(value, context);
  } else if (key == "sampling.seed") {
    cfg.seed = parse_unsigned(value, context);
  } else if (key == "model.kappa1") {
    cfg.kappa1 = parse_real(value, context);
  } else if (key == "model.kappa2") {
    cfg.kappa2 = parse_real(value, context);
  } else if (key == "model.phi") {
    std::tie(cfg.phi_amplitude, cfg.phi_exponent) = parse_pair(value, context);
  } else if (key == "model.zeta") {
    std::tie(cfg.zeta_amplitude, cfg.zeta_exponent) =
        parse_pair(value, context);
  } else if (key == "integrator.dt") {
    cfg.dt = parse_real(value, context);
  } else if (key == "integrator.t_end") {
    cfg.t_end = parse_real(value, context);
  } else if (key == "integrator.record_stride") {
    cfg.record_stride = static_cast<std::size_t>(
        parse_unsigned(value, context));
  } else if (key == "analysis.eps") {
    cfg.eps = parse_real(value, context);
  } else if (key == "analysis.eps0") {
    cfg.eps0 = parse_real(value, context);
  } else {
    throw ConfigError(context + ": unknown key '" + key + "'");
  }
}

std::string config_value(const ScenarioConfig& cfg, const std::string& key) {
  if (key == "sampling.n") return std::to_string(cfg.n);
  if (key == "sampling.dim") return std::to_string(cfg.dim);
  if (key == "sampling.position_box") {
    return "\"" + box_to_string(cfg.position_box) + "\"";
  }
  if (key == "sampling.velocity_box") {
    return "\"" + box_to_string(cfg.velocity_box) + "\"";
  }
  if (key == "sampling.temperature_interval") {
    return "\"" + interval_to_string(cfg.temperature_interval) + "\"";
  }
  if (key == "sampling.seed") return std::to_string(cfg.seed);
  if (key == "model.kappa1") return fmt_real(cfg.kappa1);
  if (key == "model.kappa2") return fmt_real(cfg.kappa2);
  if (key == "model.phi") {
    return "\"" + fmt_real(cfg.phi_amplitude) + "," +
           fmt_real(cfg.phi_exponent) + "\"";
  }
  if (key == "model.zeta") {
    return "\"" + fmt_real(cfg.zeta_amplitude) + "," +
           fmt_real(cfg.zeta_exponent) + "\"";
  }
  if (key == "integrator.dt") return fmt_real(cfg.dt);
  if (key == "integrator.t_end") return fmt_real(cfg.t_end);
  if (key == "integrator.record_stride") {
    return std::to_string(cfg.record_stride);
  }
  if (key == "analysis.eps") return fmt_real(cfg.eps);
  if (key == "analysis.eps0") return fmt_real(cfg.eps0);
  throw ConfigError("unknown key '" + key + "'");
}

void check_interval(const Interval& i, const std::string& what) {
  if (!std::isfinite(i.lo) || !std::isfinite(i.hi)) {
    throw ConfigError(what + ": bounds must be finite");
  }
  if (i.lo > i.hi) {
    throw ConfigError(what + ": empty interval (" + fmt_real(i.lo) + " > " +
                      fmt_real(i.hi) + ")");
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n == 0) throw ConfigError("sampling.n: must be at least 1");
  if (dim == 0) throw ConfigError("sampling.dim: must be at least 1");
  if (position_box.size() != dim) {
    throw ConfigError("sampling.position_box: expected " +
                      std::to_string(dim) + " intervals, got " +
                      std::to_string(position_box.size()));
  }
  if (velocity_box.size() != dim) {
    throw ConfigError("sampling.velocity_box: expected " +
                      std::to_string(dim) + " intervals, got " +
                      std::to_string(velocity_box.size()));
  }
  for (std::size_t k = 0; k < dim; ++k) {
    check_interval(position_box[k], "sampling.position_box");
    check_interval(velocity_box[k], "sampling.velocity_box");
  }
  check_interval(temperature_interval, "sampling.temperature_interval");
  if (!(temperature_interval.lo > 0.0)) {
    throw ConfigError(
        "sampling.temperature_interval: lower bound must be positive");
  }
  if (!std::isfinite(kappa1) || kappa1 <= 0.0) {
    throw ConfigError("model.kappa1: must be finite and positive");
  }
  if (!std::isfinite(kappa2) || kappa2 <= 0.0) {
    throw ConfigError("model.kappa2: must be finite and positive");
  }
  if (!std::isfinite(phi_amplitude) || phi_amplitude <= 0.0 ||
      !std::isfinite(phi_exponent) || phi_exponent < 0.0) {
    throw ConfigError("model.phi: amplitude must be positive and the "
                      "exponent nonnegative");
  }
  if (!std::isfinite(zeta_amplitude) || zeta_amplitude <= 0.0 ||
      !std::isfinite(zeta_exponent) || zeta_exponent < 0.0) {
    throw ConfigError("model.zeta: amplitude must be positive and the "
                      "exponent nonnegative");
  }
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw ConfigError("integrator.dt: must be positive");
  }
  if (!std::isfinite(t_end) || t_end <= 0.0) {
    throw ConfigError("integrator.t_end: must be positive");
  }
  if (t_end < dt) {
    throw ConfigError("integrator.t_end: must be at least integrator.dt");
  }
  if (record_stride == 0) {
    throw ConfigError("integrator.record_stride: must be at least 1");
  }
  if (!std::isfinite(eps)) throw ConfigError("analysis.eps: must be finite");
  if (!std::isfinite(eps0)) throw ConfigError("analysis.eps0: must be finite");
}

ModelParams ScenarioConfig::model_params() const {
  ModelParams p;
  p.kappa1 = kappa1;
  p.kappa2 = kappa2;
  p.phi = CommunicationKernel(phi_amplitude, phi_exponent);
  p.zeta = CommunicationKernel(zeta_amplitude, zeta_exponent);
  p.dim = dim;
  return p;
}

IntegratorConfig ScenarioConfig::integrator_config() const {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.record_stride = record_stride;
  return c;
}

ScenarioConfig preset(const std::string& name) {
  if (name == "paper-sec6") {
    ScenarioConfig cfg;
    cfg.n = 100;
    cfg.dim = 2;
    cfg.position_box = {{0.32, 0.35}, {0.2, 0.24}};
    cfg.velocity_box = {{-0.3, -0.29}, {0.05, 0.06}};
    cfg.temperature_interval = {10.8, 10.9};
    cfg.seed = 0;
    cfg.kappa1 = 1.0;
    cfg.kappa2 = 100.0;
    cfg.phi_amplitude = 1.0;
    cfg.phi_exponent = 1.0;
    cfg.zeta_amplitude = 40.0;
    cfg.zeta_exponent = 1.0;
    cfg.dt = 0.01;
    cfg.t_end = 50.0;
    cfg.record_stride = 1;
    cfg.eps = 0.003;
    cfg.eps0 = 0.76;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "' (available: paper-sec6)");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::map<std::string, int> seen;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string context = "line " + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(context + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(context + ": missing key");
    if (!known_key(key)) {
      throw ConfigError(context + ": unknown key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError(context + ": missing value for '" + key + "'");
    }
    const auto [it, inserted] = seen.emplace(key, lineno);
    if (!inserted) {
      throw ConfigError(context + ": duplicate key '" + key +
                        "' (first set on line " +
                        std::to_string(it->second) + ")");
    }
    assign_key(cfg, key, value, context + ": key '" + key + "'");
  }

  if (seen.empty()) {
    throw ConfigError("config is empty: explicit keys are required");
  }
  std::string missing;
  for (const char* k : kConfigKeys) {
    if (required_key(k) && seen.find(k) == seen.end()) {
      if (!missing.empty()) missing += ", ";
      missing += k;
    }
  }
  if (!missing.empty()) {
    throw ConfigError("missing required keys: " + missing);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_to_string(const ScenarioConfig& cfg) {
  std::string out;
  for (const char* k : kConfigKeys) {
    out += k;
    out += " = ";
    out += config_value(cfg, k);
    out += "\n";
  }
  return out;
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << config_to_string(cfg);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (!known_key(key)) {
    throw ConfigError("override: unknown key '" + key + "'");
  }
  if (value.empty()) {
    throw ConfigError("override: missing value for '" + key + "'");
  }
  assign_key(cfg, key, value, "override '" + key + "'");
}

namespace {

// Stateless generator: every draw is a hash of (seed, counter), so sample
// k of particle a is the same no matter how many draws came before it.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

double keyed_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t z = mix64(seed + (counter + 1) * 0x9E3779B97F4A7C15ull);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double draw_on(const Interval& i, std::uint64_t seed, std::uint64_t counter) {
  return i.lo + keyed_uniform(seed, counter) * i.width();
}

}  // namespace

ParticleEnsemble sample_initial_data(const ScenarioConfig& cfg) {
  cfg.validate();
  ParticleEnsemble s = ParticleEnsemble::zeros(cfg.n, cfg.dim);
  const std::uint64_t slots = 2 * cfg.dim + 1;
  for (std::size_t a = 0; a < cfg.n; ++a) {
    const std::uint64_t base = a * slots;
    for (std::size_t k = 0; k < cfg.dim; ++k) {
      s.x[a * cfg.dim + k] = draw_on(cfg.position_box[k], cfg.seed, base + k);
      s.v[a * cfg.dim + k] =
          draw_on(cfg.velocity_box[k], cfg.seed, base + cfg.dim + k);
    }
    s.T[a] = draw_on(cfg.temperature_interval, cfg.seed, base + 2 * cfg.dim);
  }
  s.validate();
  return s;
}

namespace {

std::string timeseries_header(std::size_t dim) {
  std::string h = "t,X,V,Tnorm,E";
  for (std::size_t k = 1; k <= dim; ++k) h += ",xc_" + std::to_string(k);
  for (std::size_t k = 1; k <= dim; ++k) h += ",vc_" + std::to_string(k);
  h += ",Tinf,L,minT,maxT";
  return h;
}

}  // namespace

void write_timeseries(const Trajectory& traj, std::ostream& os) {
  const std::size_t dim =
      traj.records.empty() ? 0 : traj.records.front().x_c.size();
  os << timeseries_header(dim) << "\n";
  for (const DiagnosticsRecord& r : traj.records) {
    os << fmt_real(r.t) << ',' << fmt_real(r.X) << ',' << fmt_real(r.V) << ','
       << fmt_real(r.Tnorm) << ',' << fmt_real(r.energy);
    for (double c : r.x_c) os << ',' << fmt_real(c);
    for (double c : r.v_c) os << ',' << fmt_real(c);
    os << ',' << fmt_real(r.T_inf) << ',' << fmt_real(r.lyapunov) << ','
       << fmt_real(r.minT) << ',' << fmt_real(r.maxT) << "\n";
  }
}

void write_timeseries(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_timeseries(traj, out);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

TimeSeries read_timeseries(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw ConfigError("time series: empty file");
  }
  const auto header = split(trim(line), ',');
  if (header.size() < 9 + 2 || header[0] != "t" || header[1] != "X" ||
      header[2] != "V" || header[3] != "Tnorm" || header[4] != "E") {
    throw ConfigError("time series: line 1: unrecognized header");
  }
  std::size_t dim = 0;
  std::size_t i = 5;
  while (i < header.size() &&
         header[i] == "xc_" + std::to_string(dim + 1)) {
    ++dim;
    ++i;
  }
  if (dim == 0 || header.size() != 9 + 2 * dim) {
    throw ConfigError("time series: line 1: unrecognized header");
  }
  for (std::size_t k = 1; k <= dim; ++k, ++i) {
    if (header[i] != "vc_" + std::to_string(k)) {
      throw ConfigError("time series: line 1: unrecognized header");
    }
  }
  if (header[i] != "Tinf" || header[i + 1] != "L" ||
      header[i + 2] != "minT" || header[i + 3] != "maxT") {
    throw ConfigError("time series: line 1: unrecognized header");
  }

  TimeSeries ts;
  ts.dim = dim;
  const std::size_t cols = 9 + 2 * dim;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    const std::string context = "time series: line " + std::to_string(lineno);
    if (fields.size() != cols) {
      throw ConfigError(context + ": expected " + std::to_string(cols) +
                        " columns, got " + std::to_string(fields.size()));
    }
    std::size_t f = 0;
    auto next = [&]() { return parse_real(fields[f++], context); };
    ts.t.push_back(next());
    ts.X.push_back(next());
    ts.V.push_back(next());
    ts.Tnorm.push_back(next());
    ts.E.push_back(next());
    for (std::size_t k = 0; k < dim; ++k) ts.xc.push_back(next());
    for (std::size_t k = 0; k < dim; ++k) ts.vc.push_back(next());
    ts.Tinf.push_back(next());
    ts.L.push_back(next());
    ts.minT.push_back(next());
    ts.maxT.push_back(next());
  }
  return ts;
}

TimeSeries read_timeseries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open time series '" + path + "'");
  return read_timeseries(in);
}

namespace {

void evaluate_hypotheses(RunReport& rep, const ParticleEnsemble& s0,
                         const ModelParams& p, double eps, double eps0) {
  try {
    const HypothesisConstants c = compute_constants(s0, p, eps, eps0);
    const InitialStats st = initial_stats(s0);
    const double tinf0 = asymptotic_temperature(st, st.v_c0);
    const Norms nm = norms(fluctuations(s0, tinf0));
    rep.Tnorm0 = nm.Tnorm;
    rep.strict = check_strict_conditions(c, nm.Tnorm);
    rep.relaxed = check_relaxed_conditions(c, nm.Tnorm);
    rep.has_constants = true;
  } catch (const std::domain_error& e) {
    rep.constants_error = e.what();
  }
}

DriftMetrics drift_metrics(const Trajectory& traj,
                           const DiagnosticsTracker& tracker,
                           const ParticleEnsemble& s0) {
  DriftMetrics dm;
  const InitialStats& st = tracker.stats();
  const double escale = std::max(1.0, std::abs(st.energy0));

  double coord_scale = 1.0;
  for (double c : s0.x) coord_scale = std::max(coord_scale, std::abs(c));
  for (double c : s0.v) coord_scale = std::max(coord_scale, std::abs(c));
  dm.mean_residual_budget =
      kMeanResidualCoeff * static_cast<double>(s0.n) * coord_scale;
  dm.identity_budget = kIdentityCoeff * escale;

  const MeanOrbit orbit(st);
  std::vector<double> xc(s0.dim), vc(s0.dim);
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const DiagnosticsRecord& r = traj.records[i];
    dm.energy_rel =
        std::max(dm.energy_rel, std::abs(r.energy - st.energy0) / escale);
    orbit.eval(traj.times[i], xc, vc);
    for (std::size_t k = 0; k < s0.dim; ++k) {
      dm.com_error = std::max({dm.com_error, std::abs(r.x_c[k] - xc[k]),
                               std::abs(r.v_c[k] - vc[k])});
    }
    dm.mean_residual = std::max(dm.mean_residual, r.mean_residual);
    dm.identity_error = std::max(
        dm.identity_error, std::abs(r.that_sum + 0.5 * r.V * r.V));
  }
  return dm;
}

int severity_rank(int code) {
  switch (code) {
    case kExitNumerical: return 4;
    case kExitViolation: return 3;
    case kExitUnsatisfied: return 2;
    case kExitUsage: return 1;
    default: return 0;
  }
}

}  // namespace

RunReport run_check(const ScenarioConfig& cfg, GateVariant gate) {
  cfg.validate();
  RunReport rep;
  rep.config = cfg;
  rep.gate = gate;
  const ParticleEnsemble s0 = sample_initial_data(cfg);
  evaluate_hypotheses(rep, s0, cfg.model_params(), cfg.eps, cfg.eps0);
  rep.exit_code = rep.hypotheses_ok() ? kExitOk : kExitUnsatisfied;
  return rep;
}

RunReport run_simulation(const ScenarioConfig& cfg, GateVariant gate,
                         Trajectory* out_traj) {
  cfg.validate();
  RunReport rep;
  rep.config = cfg;
  rep.gate = gate;

  const ParticleEnsemble s0 = sample_initial_data(cfg);
  const ModelParams p = cfg.model_params();
  evaluate_hypotheses(rep, s0, p, cfg.eps, cfg.eps0);

  const DiagnosticsTracker tracker(s0, cfg.eps);
  Trajectory traj;
  try {
    traj = integrate(s0, p, cfg.integrator_config(), tracker);
  } catch (const std::runtime_error& e) {
    rep.error = e.what();
    rep.exit_code = kExitNumerical;
    return rep;
  }

  rep.drift = drift_metrics(traj, tracker, s0);
  rep.decay = verify_decay_bounds(traj, rep.gated());
  rep.dissipation = dissipative_inequality_check(traj, p, cfg.eps, cfg.eps0);

  const double window_start = 0.5 * traj.times.back();
  const double window_end = traj.times.back();
  std::vector<double> series;
  series.reserve(traj.records.size());
  const std::pair<const char*, double DiagnosticsRecord::*> quantities[] = {
      {"X", &DiagnosticsRecord::X},
      {"V", &DiagnosticsRecord::V},
      {"Tnorm", &DiagnosticsRecord::Tnorm},
  };
  for (const auto& [name, member] : quantities) {
    series.clear();
    for (const DiagnosticsRecord& r : traj.records) series.push_back(r.*member);
    try {
      rep.fits.push_back(
          fit_exponential(traj.times, series, window_start, window_end, name));
    } catch (const std::invalid_argument& e) {
      rep.notes.push_back(std::string("fit skipped for ") + name + ": " +
                          e.what());
    }
  }

  const bool violated =
      (rep.decay && !rep.decay->refused &&
       (!rep.decay->mechanical.empty() || !rep.decay->temperature.empty())) ||
      (rep.dissipation && !rep.dissipation->violations.empty()) ||
      (rep.drift && !rep.drift->within_tolerances());
  if (violated) {
    rep.exit_code = kExitViolation;
  } else if (!rep.hypotheses_ok()) {
    rep.exit_code = kExitUnsatisfied;
  } else {
    rep.exit_code = kExitOk;
  }

  if (out_traj) *out_traj = std::move(traj);
  return rep;
}

namespace {

const char* status_word(const RunReport& rep) {
  switch (rep.exit_code) {
    case kExitOk: return "ok";
    case kExitViolation: return "violation";
    case kExitUnsatisfied: return "hypotheses-unsatisfied";
    case kExitNumerical: return "numerical-failure";
    default: return "error";
  }
}

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void print_conditions(std::ostringstream& os, const HypothesisReport& rep,
                      const char* label) {
  os << "conditions (" << label << ")\n";
  for (const ConditionResult& c : rep.conditions) {
    os << "  [" << (c.satisfied ? " ok " : "FAIL") << "] " << c.name
       << ": lhs=" << short_real(c.lhs) << " rhs=" << short_real(c.rhs)
       << " slack=" << short_real(c.slack) << "\n";
  }
  os << "  overall: " << (rep.overall ? "satisfied" : "not satisfied")
     << "\n";
}

void machine_conditions(std::ostringstream& os, const HypothesisReport& rep,
                        const char* label) {
  for (const ConditionResult& c : rep.conditions) {
    const std::string base = std::string("condition.") + label + "." + c.name;
    os << base << ".satisfied=" << (c.satisfied ? 1 : 0) << "\n";
    os << base << ".lhs=" << fmt_real(c.lhs) << "\n";
    os << base << ".rhs=" << fmt_real(c.rhs) << "\n";
    os << base << ".slack=" << fmt_real(c.slack) << "\n";
  }
  os << "condition." << label << ".overall=" << (rep.overall ? 1 : 0) << "\n";
}

}  // namespace

std::string report_to_string(const RunReport& rep) {
  std::ostringstream os;
  os << "run report\n";
  os << "==========\n";
  os << "status: " << status_word(rep) << " (exit " << rep.exit_code << ")\n";
  if (!rep.error.empty()) os << "error: " << rep.error << "\n";
  os << "gate: " << (rep.gate == GateVariant::strict ? "strict" : "relaxed")
     << "\n\n";

  os << "configuration\n";
  std::istringstream cfg_lines(config_to_string(rep.config));
  std::string line;
  while (std::getline(cfg_lines, line)) os << "  " << line << "\n";
  os << "\n";

  if (rep.has_constants) {
    const HypothesisConstants& c = rep.strict.constants;
    os << "derived constants\n";
    os << "  T_m=" << short_real(c.T_m) << " T_M=" << short_real(c.T_M)
       << " delta_star=" << short_real(c.delta_star) << "\n";
    os << "  lambda=" << short_real(c.lambda)
       << " gamma=" << short_real(c.gamma) << " A1=" << short_real(c.A1)
       << " A2=" << short_real(c.A2) << "\n";
    os << "  X0=" << short_real(c.X0) << " V0=" << short_real(c.V0)
       << " Tnorm0=" << short_real(rep.Tnorm0)
       << " zc0_norm=" << short_real(c.zc0_norm) << "\n";
    os << "  phi(0)=" << short_real(c.phi0)
       << " phi(3sqrt2 eps0)=" << short_real(c.phi_ball)
       << " zeta(3sqrt2 eps0)=" << short_real(c.zeta_ball) << "\n\n";
    print_conditions(os, rep.strict, "strict");
    print_conditions(os, rep.relaxed, "relaxed");
    os << "\n";
  } else {
    os << "derived constants: unavailable (" << rep.constants_error << ")\n\n";
  }

  if (rep.drift) {
    const DriftMetrics& d = *rep.drift;
    os << "conserved-quantity audit\n";
    os << "  energy drift (relative): " << short_real(d.energy_rel)
       << " budget " << short_real(kEnergyDriftTol) << "\n";
    os << "  mean-orbit deviation:    " << short_real(d.com_error)
       << " budget " << short_real(kComTol) << "\n";
    os << "  zero-mean residual:      " << short_real(d.mean_residual)
       << " budget " << short_real(d.mean_residual_budget) << "\n";
    os << "  temperature-sum identity: " << short_real(d.identity_error)
       << " budget " << short_real(d.identity_budget) << "\n";
    os << "  " << (d.within_tolerances() ? "ok" : "EXCEEDED") << "\n\n";
  }

  if (rep.decay) {
    const DecayCheck& d = *rep.decay;
    if (d.refused) {
      os << "decay envelopes: refused (" << d.refusal_reason << ")\n";
    } else {
      os << "decay envelopes: " << d.mechanical.size() << " mechanical, "
         << d.temperature.size() << " temperature violations over "
         << d.checked << " records\n";
      if (!d.mechanical.empty()) {
        os << "  first mechanical violation at t="
           << short_real(d.mechanical.front().t) << "\n";
      }
      if (!d.temperature.empty()) {
        os << "  first temperature violation at t="
           << short_real(d.temperature.front().t) << "\n";
      }
    }
  }
  if (rep.dissipation) {
    const DissipationCheck& d = *rep.dissipation;
    if (d.refused) {
      os << "dissipative inequality: refused (" << d.refusal_reason << ")\n";
    } else {
      os << "dissipative inequality: " << d.violations.size()
         << " violations over " << d.samples_checked << " samples ("
         << d.out_of_range.size() << " out of range, tolerance "
         << short_real(d.tolerance) << ")\n";
    }
  }
  if (rep.decay || rep.dissipation) os << "\n";

  if (!rep.fits.empty()) {
    os << "decay fits\n";
    for (const DecayFit& f : rep.fits) {
      os << "  " << f.quantity << ": rate=" << short_real(f.rate)
         << " intercept=" << short_real(f.intercept)
         << " r2=" << short_real(f.r_squared) << " window=["
         << short_real(f.window_start) << ", " << short_real(f.window_end)
         << "] samples=" << f.samples << "\n";
    }
    os << "\n";
  }
  for (const std::string& note : rep.notes) os << "note: " << note << "\n";

  os << "\n--- machine readable ---\n";
  os << "status=" << status_word(rep) << "\n";
  os << "exit_code=" << rep.exit_code << "\n";
  os << "gate=" << (rep.gate == GateVariant::strict ? "strict" : "relaxed")
     << "\n";
  if (!rep.error.empty()) os << "error=" << rep.error << "\n";
  for (const char* k : kConfigKeys) {
    os << "config." << k << "=" << config_value(rep.config, k) << "\n";
  }
  if (rep.has_constants) {
    const HypothesisConstants& c = rep.strict.constants;
    os << "constant.T_m=" << fmt_real(c.T_m) << "\n";
    os << "constant.T_M=" << fmt_real(c.T_M) << "\n";
    os << "constant.eps=" << fmt_real(c.eps) << "\n";
    os << "constant.eps0=" << fmt_real(c.eps0) << "\n";
    os << "constant.delta_star=" << fmt_real(c.delta_star) << "\n";
    os << "constant.lambda=" << fmt_real(c.lambda) << "\n";
    os << "constant.gamma=" << fmt_real(c.gamma) << "\n";
    os << "constant.A1=" << fmt_real(c.A1) << "\n";
    os << "constant.A2=" << fmt_real(c.A2) << "\n";
    os << "constant.Z0_sq=" << fmt_real(c.Z0_sq) << "\n";
    os << "constant.X0=" << fmt_real(c.X0) << "\n";
    os << "constant.V0=" << fmt_real(c.V0) << "\n";
    os << "constant.Tnorm0=" << fmt_real(rep.Tnorm0) << "\n";
    os << "constant.zc0_norm=" << fmt_real(c.zc0_norm) << "\n";
    os << "constant.phi0=" << fmt_real(c.phi0) << "\n";
    os << "constant.phi_ball=" << fmt_real(c.phi_ball) << "\n";
    os << "constant.zeta_ball=" << fmt_real(c.zeta_ball) << "\n";
    machine_conditions(os, rep.strict, "strict");
    machine_conditions(os, rep.relaxed, "relaxed");
  } else {
    os << "constants_error=" << rep.constants_error << "\n";
  }
  if (rep.drift) {
    const DriftMetrics& d = *rep.drift;
    os << "drift.energy_rel=" << fmt_real(d.energy_rel) << "\n";
    os << "drift.com_error=" << fmt_real(d.com_error) << "\n";
    os << "drift.mean_residual=" << fmt_real(d.mean_residual) << "\n";
    os << "drift.mean_residual_budget=" << fmt_real(d.mean_residual_budget)
       << "\n";
    os << "drift.identity_error=" << fmt_real(d.identity_error) << "\n";
    os << "drift.identity_budget=" << fmt_real(d.identity_budget) << "\n";
    os << "drift.within_tolerances=" << (d.within_tolerances() ? 1 : 0)
       << "\n";
  }
  if (rep.decay) {
    os << "decay.refused=" << (rep.decay->refused ? 1 : 0) << "\n";
    os << "decay.checked=" << rep.decay->checked << "\n";
    os << "decay.mechanical_violations=" << rep.decay->mechanical.size()
       << "\n";
    os << "decay.temperature_violations=" << rep.decay->temperature.size()
       << "\n";
  }
  if (rep.dissipation) {
    const DissipationCheck& d = *rep.dissipation;
    os << "dissipation.refused=" << (d.refused ? 1 : 0) << "\n";
    os << "dissipation.samples_checked=" << d.samples_checked << "\n";
    os << "dissipation.out_of_range=" << d.out_of_range.size() << "\n";
    os << "dissipation.violations=" << d.violations.size() << "\n";
    os << "dissipation.tolerance=" << fmt_real(d.tolerance) << "\n";
  }
  for (const DecayFit& f : rep.fits) {
    const std::string base = "fit." + f.quantity;
    os << base << ".rate=" << fmt_real(f.rate) << "\n";
    os << base << ".intercept=" << fmt_real(f.intercept) << "\n";
    os << base << ".r_squared=" << fmt_real(f.r_squared) << "\n";
    os << base << ".window_start=" << fmt_real(f.window_start) << "\n";
    os << base << ".window_end=" << fmt_real(f.window_end) << "\n";
    os << base << ".samples=" << f.samples << "\n";
  }
  return os.str();
}

void save_report(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << report_to_string(report);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

namespace {

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TCS_WORKERS")) {
    try {
      const unsigned long v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
      throw ConfigError("TCS_WORKERS: expected a positive integer, got '" +
                        std::string(env) + "'");
    }
    throw ConfigError("TCS_WORKERS: expected a positive integer");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace

SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
                      GateVariant gate, std::size_t workers) {
  base.validate();
  const std::vector<double> k1 =
      spec.kappa1.empty() ? std::vector<double>{base.kappa1} : spec.kappa1;
  const std::vector<double> k2 =
      spec.kappa2.empty() ? std::vector<double>{base.kappa2} : spec.kappa2;
  const std::vector<double> e0 =
      spec.eps0.empty() ? std::vector<double>{base.eps0} : spec.eps0;

  SweepResult result;
  result.cells.resize(k1.size() * k2.size() * e0.size());
  std::size_t idx = 0;
  for (double a : k1) {
    for (double b : k2) {
      for (double c : e0) {
        SweepCell& cell = result.cells[idx];
        cell.index = idx;
        cell.config = base;
        cell.config.kappa1 = a;
        cell.config.kappa2 = b;
        cell.config.eps0 = c;
        ++idx;
      }
    }
  }

  const std::size_t count = result.cells.size();
  const std::size_t pool = std::min(resolve_workers(workers), count);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      SweepCell& cell = result.cells[i];
      try {
        cell.report = run_simulation(cell.config, gate);
      } catch (const std::exception& e) {
        cell.report.config = cell.config;
        cell.report.gate = gate;
        cell.report.error = e.what();
        cell.report.exit_code = kExitUsage;
      }
    }
  };

  if (pool <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(work);
    for (std::thread& th : threads) th.join();
  }

  for (const SweepCell& cell : result.cells) {
    if (severity_rank(cell.report.exit_code) >
        severity_rank(result.exit_code)) {
      result.exit_code = cell.report.exit_code;
    }
  }
  return result;
}

std::string sweep_summary(const SweepResult& result) {
  std::ostringstream os;
  os << "sweep: " << result.cells.size() << " cells\n";
  for (const SweepCell& cell : result.cells) {
    os << "  cell " << cell.index << ": kappa1=" << short_real(cell.config.kappa1)
       << " kappa2=" << short_real(cell.config.kappa2)
       << " eps0=" << short_real(cell.config.eps0)
       << " status=" << status_word(cell.report)
       << " exit=" << cell.report.exit_code;
    if (!cell.report.error.empty()) os << " error=" << cell.report.error;
    os << "\n";
  }
  os << "overall exit=" << result.exit_code << "\n";
  return os.str();
}

}  // namespace tcs
