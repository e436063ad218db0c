// Copyright 2026 The blindtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "blindtomo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "blindtomo/oracles.hpp"

#ifndef BLINDTOMO_VERSION
#define BLINDTOMO_VERSION "0.0.0"
#endif
#ifndef BLINDTOMO_GIT_HASH
#define BLINDTOMO_GIT_HASH "unknown"
#endif

namespace blindtomo {

using nlohmann::json;

std::string version_string() { return BLINDTOMO_VERSION; }
std::string git_hash() { return BLINDTOMO_GIT_HASH; }

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kGuePhase: return "gue-phase";
    case ExperimentKind::kPauliBlind: return "pauli-blind";
    case ExperimentKind::kCoherentAls: return "coherent-als";
    case ExperimentKind::kRipProbe: return "rip-probe";
    case ExperimentKind::kUnitOracles: return "unit-oracles";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto kind : {ExperimentKind::kGuePhase, ExperimentKind::kPauliBlind, ExperimentKind::kCoherentAls,
                    ExperimentKind::kRipProbe, ExperimentKind::kUnitOracles}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> names = {"sdt", "dt", "informed-dt", "standard", "als"};
  return names;
}

// ---------------------------------------------------------------------------
// JSON reading

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& at(const std::string& key) const { return j_.at(key); }

  void read(const std::string& key, std::int64_t& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    out = v.get<std::int64_t>();
  }
  void read(const std::string& key, int& out) {
    std::int64_t v = out;
    read(key, v);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw ConfigError(field(key), "integer out of range");
    }
    out = static_cast<int>(v);
  }
  void read_index(const std::string& key, Eigen::Index& out) {
    std::int64_t v = out;
    read(key, v);
    out = static_cast<Eigen::Index>(v);
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      out = static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() < 1.8e19 &&
               std::floor(v.get<double>()) == v.get<double>()) {
      out = static_cast<std::uint64_t>(v.get<double>());
    } else {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
  }
  void read(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    out = v.get<double>();
  }
  void read(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = v.get<bool>();
  }
  void read(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    out = v.get<std::string>();
  }

  template <typename Enum, typename Parse>
  void read_enum(const std::string& key, Enum& out, Parse parse) {
    std::string name;
    if (!has(key)) return;
    read(key, name);
    try {
      out = parse(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void ExperimentConfig::validate() const {
  try {
    instance.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("instance", e.what());
  }
  if (m_values.empty()) throw ConfigError("m_values", "must not be empty");
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    if (m_values[i] < 1) throw ConfigError("m_values[" + std::to_string(i) + "]", "must be >= 1");
    if (i > 0 && m_values[i] <= m_values[i - 1]) {
      throw ConfigError("m_values[" + std::to_string(i) + "]", "must be strictly ascending");
    }
  }
  if (trials_per_m < 1) throw ConfigError("trials_per_m", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (!(success_threshold > 0.0)) throw ConfigError("success_threshold", "must be positive");
  if (rip_samples < 1) throw ConfigError("rip.samples", "must be >= 1");
  if (!(rip_delta > 0.0)) throw ConfigError("rip.delta", "must be positive");

  const bool solver_experiment = experiment == ExperimentKind::kGuePhase ||
                                 experiment == ExperimentKind::kPauliBlind ||
                                 experiment == ExperimentKind::kCoherentAls;
  if (solver_experiment) {
    if (solvers.empty()) throw ConfigError("solvers", "must not be empty");
    std::set<std::string> unique;
    for (std::size_t i = 0; i < solvers.size(); ++i) {
      const auto& name = solvers[i];
      const auto& known = known_solvers();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("solvers[" + std::to_string(i) + "]", "unknown solver '" + name + "'");
      }
      if (!unique.insert(name).second) {
        throw ConfigError("solvers[" + std::to_string(i) + "]", "duplicate solver '" + name + "'");
      }
    }
  }

  const Eigen::Index d = instance.d;
  const bool power_of_two = d >= 2 && (d & (d - 1)) == 0;
  switch (ensemble) {
    case EnsembleKind::kGue:
    case EnsembleKind::kGaussian:
      break;
    case EnsembleKind::kSubsampledPauli:
      if (!power_of_two) throw ConfigError("instance.d", "Pauli ensembles need d = 2^q, q >= 1");
      break;
    case EnsembleKind::kCoherentErrorPauli:
      if (!power_of_two) throw ConfigError("instance.d", "Pauli ensembles need d = 2^q, q >= 1");
      if (instance.n != static_cast<Eigen::Index>(coherent_error_pairs().size()) + 1) {
        throw ConfigError("instance.n", "the coherent-error ensemble has n = 7 blocks");
      }
      break;
    case EnsembleKind::kDense:
      throw ConfigError("ensemble", "'dense' ensembles cannot be generated from a config");
  }
  if (noise.kind == NoiseModel::Kind::kShot) {
    if (!is_pauli_kind(ensemble)) {
      throw ConfigError("noise.kind", "shot noise needs a Pauli ensemble, got '" + to_string(ensemble) + "'");
    }
    if (noise.samples < 1) throw ConfigError("noise.samples", "must be >= 1");
  }

  SdtConfig s = sdt;
  s.s = instance.s;
  s.r = instance.r;
  try {
    s.validate(instance.n, instance.d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sdt", e.what());
  }
  AlsConfig a = als;
  a.s = instance.s;
  a.r = instance.r;
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("als", e.what());
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = to_string(experiment);
  j["instance"] = {{"n", instance.n},
                   {"d", instance.d},
                   {"s", instance.s},
                   {"r", instance.r},
                   {"xi_model",
                    {{"kind", to_string(instance.xi_model.kind)},
                     {"scale", instance.xi_model.scale},
                     {"mean", instance.xi_model.mean},
                     {"stddev", instance.xi_model.stddev}}}};
  j["ensemble"] = to_string(ensemble);
  j["m_values"] = m_values;
  j["trials_per_m"] = trials_per_m;
  j["noise"] = {{"kind", noise.kind == NoiseModel::Kind::kShot ? "shot" : "none"},
                {"samples", noise.samples},
                {"exact_binomial", noise.exact_binomial}};
  j["sdt"] = {{"max_iters", sdt.max_iters},
              {"gamma_break", sdt.gamma_break},
              {"step_mode", to_string(sdt.step_mode)},
              {"constant_step", sdt.constant_step},
              {"tangent_projection", sdt.use_tangent_projection},
              {"rank_mode", to_string(sdt.rank_mode)}};
  j["als"] = {{"max_iters", als.max_iters},     {"gamma_break", als.gamma_break},
              {"reinit_period", als.reinit_period}, {"max_reinits", als.max_reinits},
              {"xi_budget", als.xi_budget},     {"rho_budget", als.rho_budget}};
  j["solvers"] = solvers;
  j["success_threshold"] = success_threshold;
  j["master_seed"] = master_seed;
  j["output"] = output;
  j["workers"] = workers;
  j["timing"] = timing;
  j["rip"] = {{"samples", rip_samples}, {"delta", rip_delta}};
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  Reader root(j, "");
  if (!root.has("experiment")) throw ConfigError("experiment", "missing");
  ExperimentKind kind = ExperimentKind::kGuePhase;
  root.read_enum("experiment", kind, experiment_kind_from_string);
  ExperimentConfig cfg = preset(kind);

  if (root.has("instance")) {
    Reader in(root.at("instance"), "instance");
    in.read_index("n", cfg.instance.n);
    in.read_index("d", cfg.instance.d);
    in.read_index("s", cfg.instance.s);
    in.read_index("r", cfg.instance.r);
    if (in.has("xi_model")) {
      Reader xm(in.at("xi_model"), "instance.xi_model");
      xm.read_enum("kind", cfg.instance.xi_model.kind, xi_model_kind_from_string);
      xm.read("scale", cfg.instance.xi_model.scale);
      xm.read("mean", cfg.instance.xi_model.mean);
      xm.read("stddev", cfg.instance.xi_model.stddev);
      xm.finish();
    }
    in.finish();
  }
  root.read_enum("ensemble", cfg.ensemble, ensemble_kind_from_string);
  if (root.has("m_values")) {
    const json& mv = root.at("m_values");
    if (!mv.is_array()) throw ConfigError("m_values", "expected an array of integers");
    cfg.m_values.clear();
    for (std::size_t i = 0; i < mv.size(); ++i) {
      if (!mv[i].is_number_integer()) {
        throw ConfigError("m_values[" + std::to_string(i) + "]", "expected an integer");
      }
      cfg.m_values.push_back(static_cast<Eigen::Index>(mv[i].get<std::int64_t>()));
    }
  }
  root.read("trials_per_m", cfg.trials_per_m);
  if (root.has("noise")) {
    Reader nz(root.at("noise"), "noise");
    nz.read_enum("kind", cfg.noise.kind, [](const std::string& name) {
      if (name == "none") return NoiseModel::Kind::kNone;
      if (name == "shot") return NoiseModel::Kind::kShot;
      throw std::invalid_argument("unknown noise kind '" + name + "' (expected none or shot)");
    });
    nz.read("samples", cfg.noise.samples);
    nz.read("exact_binomial", cfg.noise.exact_binomial);
    nz.finish();
  }
  if (root.has("sdt")) {
    Reader sd(root.at("sdt"), "sdt");
    sd.read("max_iters", cfg.sdt.max_iters);
    sd.read("gamma_break", cfg.sdt.gamma_break);
    sd.read_enum("step_mode", cfg.sdt.step_mode, step_mode_from_string);
    sd.read("constant_step", cfg.sdt.constant_step);
    sd.read("tangent_projection", cfg.sdt.use_tangent_projection);
    sd.read_enum("rank_mode", cfg.sdt.rank_mode, rank_mode_from_string);
    sd.finish();
  }
  if (root.has("als")) {
    Reader al(root.at("als"), "als");
    al.read("max_iters", cfg.als.max_iters);
    al.read("gamma_break", cfg.als.gamma_break);
    al.read("reinit_period", cfg.als.reinit_period);
    al.read("max_reinits", cfg.als.max_reinits);
    al.read("xi_budget", cfg.als.xi_budget);
    al.read("rho_budget", cfg.als.rho_budget);
    al.finish();
  }
  if (root.has("solvers")) {
    const json& sv = root.at("solvers");
    if (!sv.is_array()) throw ConfigError("solvers", "expected an array of strings");
    cfg.solvers.clear();
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (!sv[i].is_string()) throw ConfigError("solvers[" + std::to_string(i) + "]", "expected a string");
      cfg.solvers.push_back(sv[i].get<std::string>());
    }
  }
  root.read("success_threshold", cfg.success_threshold);
  root.read("master_seed", cfg.master_seed);
  root.read("output", cfg.output);
  root.read("workers", cfg.workers);
  root.read("timing", cfg.timing);
  if (root.has("rip")) {
    Reader rp(root.at("rip"), "rip");
    rp.read("samples", cfg.rip_samples);
    rp.read("delta", cfg.rip_delta);
    rp.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig preset(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.master_seed = 20200101;
  cfg.output = to_string(kind) + ".csv";
  switch (kind) {
    case ExperimentKind::kGuePhase:
      cfg.instance = {10, 16, 3, 1, XiModel::gaussian_unit(), 0};
      cfg.ensemble = EnsembleKind::kGue;
      cfg.m_values = {100, 125, 150, 200, 250, 300, 400, 500, 600, 800, 1000, 1200};
      cfg.trials_per_m = 50;
      cfg.solvers = {"sdt", "dt", "informed-dt"};
      break;
    case ExperimentKind::kPauliBlind:
      cfg.instance = {10, 8, 3, 1, XiModel::leading_one_scaled(0.1), 0};
      cfg.ensemble = EnsembleKind::kSubsampledPauli;
      cfg.m_values = {40, 60, 80, 100, 150, 200, 250, 300};
      cfg.trials_per_m = 30;
      cfg.noise = NoiseModel::shot(100000000);
      cfg.solvers = {"sdt", "standard"};
      break;
    case ExperimentKind::kCoherentAls:
      cfg.instance = {7, 16, 2, 1, XiModel::shifted_normal(0.2, 0.05), 0};
      cfg.ensemble = EnsembleKind::kCoherentErrorPauli;
      cfg.m_values = {40, 60, 80, 100, 120, 160, 200};
      cfg.trials_per_m = 20;
      cfg.solvers = {"als", "standard"};
      cfg.als.max_reinits = 10;
      break;
    case ExperimentKind::kRipProbe:
      cfg.instance = {10, 16, 3, 1, XiModel::gaussian_unit(), 0};
      cfg.ensemble = EnsembleKind::kGue;
      cfg.m_values = {100, 200, 400, 800, 1600};
      cfg.trials_per_m = 10;
      cfg.rip_samples = 100;
      break;
    case ExperimentKind::kUnitOracles:
      cfg.instance = {6, 4, 2, 1, XiModel::gaussian_unit(), 0};
      cfg.m_values = {1};
      cfg.trials_per_m = 100;
      break;
  }
  return cfg;
}

void merge_json(json& base, const json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
      merge_json(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty path component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError(path, "'" + key + "' is below a non-object value");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// Trials

std::uint64_t solver_tag(const std::string& name) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

constexpr std::uint64_t kEnsembleTag = 0x656e73656d626c65ULL;
constexpr std::uint64_t kNoiseSubstream = 1;

MeasurementEnsemble build_ensemble(const ExperimentConfig& cfg, Eigen::Index m, std::uint64_t seed) {
  const Eigen::Index n = cfg.instance.n, d = cfg.instance.d;
  int qubits = 0;
  while ((Eigen::Index{1} << qubits) < d) ++qubits;
  switch (cfg.ensemble) {
    case EnsembleKind::kGue: return gue_ensemble(n, m, d, seed);
    case EnsembleKind::kGaussian: return gaussian_ensemble(n, m, d, seed);
    case EnsembleKind::kSubsampledPauli: return subsampled_pauli_ensemble(n, m, qubits, seed);
    case EnsembleKind::kCoherentErrorPauli: return coherent_error_pauli_ensemble(m, qubits, seed);
    case EnsembleKind::kDense: break;
  }
  throw ConfigError("ensemble", "cannot generate '" + to_string(cfg.ensemble) + "'");
}

Eigen::Index reference_block(const CalibrationVector& xi) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < xi.size(); ++k) {
    if (std::abs(xi[k]) > std::abs(xi[best])) best = k;
  }
  return best;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

TrialInstance make_instance(const ExperimentConfig& cfg, Eigen::Index m, int trial) {
  TrialInstance inst;
  inst.seed = derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)});
  RngStream rng(inst.seed);
  InstanceSpec spec = cfg.instance;
  spec.seed = inst.seed;
  inst.xi = random_calibration(spec, rng);
  inst.rho = random_rank_r_state(spec.d, spec.r, rng);
  inst.x = assemble_signal(inst.xi, inst.rho);
  inst.ensemble = build_ensemble(cfg, m, derive_seed(inst.seed, {kEnsembleTag}));
  inst.y = inst.ensemble.apply(inst.x);
  if (cfg.noise.kind == NoiseModel::Kind::kShot) {
    RngStream noise_rng(inst.seed, kNoiseSubstream);
    inst.y = add_shot_noise(inst.y, inst.ensemble.kind(), cfg.noise, noise_rng);
  }
  return inst;
}

ResultRow run_solver(const ExperimentConfig& cfg, const TrialInstance& inst, Eigen::Index m, int trial,
                     const std::string& solver) {
  const auto start = std::chrono::steady_clock::now();
  SdtConfig sdt_cfg = cfg.sdt;
  sdt_cfg.s = cfg.instance.s;
  sdt_cfg.r = cfg.instance.r;

  RecoveryReport report;
  Eigen::Index ref = reference_block(inst.xi);
  if (solver == "sdt") {
    report = sdt(inst.y, inst.ensemble, sdt_cfg);
  } else if (solver == "dt") {
    report = dt(inst.y, inst.ensemble, sdt_cfg);
  } else if (solver == "informed-dt") {
    report = informed_dt(inst.y, inst.ensemble, sdt_cfg, inst.xi.support());
  } else if (solver == "standard") {
    RecoveryReport single = standard_tomography(inst.y, inst.ensemble.select_blocks({0}), sdt_cfg);
    report = single;
    report.signal = BlockSignal::zero(inst.x.n(), inst.x.d());
    report.signal.block(0) = single.signal.block(0);
    ref = 0;
  } else if (solver == "als") {
    AlsConfig als_cfg = cfg.als;
    als_cfg.s = cfg.instance.s;
    als_cfg.r = cfg.instance.r;
    RngStream rng(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial),
                                                solver_tag(solver)}));
    report = als_bt(inst.y, inst.ensemble, als_cfg, rng);
  } else {
    throw ConfigError("solvers", "unknown solver '" + solver + "'");
  }

  ResultRow row;
  row.experiment = to_string(cfg.experiment);
  row.m = m;
  row.trial = trial;
  row.solver = solver;
  TrialMetrics& mt = row.metrics;
  mt.iterations = report.iterations;
  mt.termination = report.termination;
  if (report.state && report.xi) {
    const BlockSignal estimate = assemble_signal(*report.xi, *report.state);
    mt.frob_error = (estimate - inst.x).frobenius_norm();
    mt.trace_norm_error = trace_norm_error(report.state->matrix(), inst.rho.matrix());
    mt.calib_l2_error = calibration_l2_error(report.xi->values(), inst.xi.values());
  } else {
    mt.frob_error = (report.signal - inst.x).frobenius_norm();
    try {
      const StateEstimate est = extract_estimate(report.signal, ref);
      mt.trace_norm_error = trace_norm_error(est.state.matrix(), inst.rho.matrix());
      mt.calib_l2_error = calibration_l2_error(est.xi.values(), inst.xi.values());
    } catch (const DegenerateEstimateError&) {
      mt.trace_norm_error = nan();
      mt.calib_l2_error = nan();
    }
  }
  mt.success = mt.frob_error < cfg.success_threshold;
  if (cfg.timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

namespace {

std::vector<ResultRow> run_rip_task(const ExperimentConfig& cfg, Eigen::Index m, int trial) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed =
      derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)});
  const MeasurementEnsemble ens =
      build_ensemble(cfg, m, derive_seed(seed, {kEnsembleTag})).scaled(1.0 / std::sqrt(static_cast<double>(m)));
  RngStream rng(seed, 2);
  const double delta = rip_delta_lower_bound(ens, cfg.rip_samples, cfg.instance.s, cfg.instance.r, rng);
  ResultRow row;
  row.experiment = to_string(cfg.experiment);
  row.m = m;
  row.trial = trial;
  row.solver = "rip-probe";
  row.metrics.frob_error = delta;
  row.metrics.trace_norm_error = nan();
  row.metrics.calib_l2_error = nan();
  row.metrics.success = delta < cfg.rip_delta;
  row.metrics.iterations = cfg.rip_samples;
  row.metrics.termination = Termination::kConverged;
  if (cfg.timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return {row};
}

std::vector<ResultRow> run_task(const ExperimentConfig& cfg, Eigen::Index m, int trial) {
  if (cfg.experiment == ExperimentKind::kRipProbe) return run_rip_task(cfg, m, trial);
  const TrialInstance inst = make_instance(cfg, m, trial);
  std::vector<ResultRow> rows;
  for (const auto& solver : cfg.solvers) rows.push_back(run_solver(cfg, inst, m, trial, solver));
  return rows;
}

std::vector<ResultRow> run_oracles(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;
  for (const auto& check : oracles::run_oracle_checks(cfg.trials_per_m, cfg.master_seed)) {
    ResultRow row;
    row.experiment = to_string(cfg.experiment);
    row.m = 0;
    row.trial = check.trial;
    row.solver = check.name;
    row.metrics.frob_error = check.discrepancy;
    row.metrics.trace_norm_error = nan();
    row.metrics.calib_l2_error = nan();
    row.metrics.success = check.passed();
    row.metrics.iterations = 0;
    row.metrics.termination = Termination::kConverged;
    rows.push_back(row);
  }
  return rows;
}

bool row_less(const ResultRow& a, const ResultRow& b) {
  if (a.m != b.m) return a.m < b.m;
  if (a.trial != b.trial) return a.trial < b.trial;
  return a.solver < b.solver;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  std::vector<ResultRow> rows;
  if (cfg.experiment == ExperimentKind::kUnitOracles) {
    rows = run_oracles(cfg);
    std::stable_sort(rows.begin(), rows.end(), row_less);
    if (progress) progress(1, 1);
    return rows;
  }

  std::vector<std::pair<Eigen::Index, int>> tasks;
  for (Eigen::Index m : cfg.m_values) {
    for (int t = 0; t < cfg.trials_per_m; ++t) tasks.emplace_back(m, t);
  }
  std::vector<std::vector<ResultRow>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> failed{false};
  std::mutex progress_mutex;

  auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        results[i] = run_task(cfg, tasks[i].first, tasks[i].second);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(finished, tasks.size());
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, cfg.workers));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, tasks.size()); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  std::stable_sort(rows.begin(), rows.end(), row_less);
  return rows;
}

// ---------------------------------------------------------------------------
// Aggregation and output

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return nan();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows, double threshold) {
  if (rows.empty()) throw EmptySummaryError("aggregate: no rows");
  std::map<std::pair<std::string, Eigen::Index>, std::vector<const ResultRow*>> groups;
  for (const auto& row : rows) groups[{row.solver, row.m}].push_back(&row);
  std::vector<SummaryRow> out;
  for (const auto& [key, group] : groups) {
    SummaryRow s;
    s.solver = key.first;
    s.m = key.second;
    s.trials = static_cast<int>(group.size());
    std::vector<double> frob, tn, cal;
    int successes = 0;
    for (const ResultRow* row : group) {
      if (row->metrics.frob_error < threshold) ++successes;
      frob.push_back(row->metrics.frob_error);
      tn.push_back(row->metrics.trace_norm_error);
      cal.push_back(row->metrics.calib_l2_error);
    }
    s.recovery_rate = static_cast<double>(successes) / static_cast<double>(group.size());
    s.median_frob_error = median(frob);
    s.median_trace_norm_error = median(tn);
    s.median_calib_l2_error = median(cal);
    out.push_back(s);
  }
  return out;
}

std::optional<double> interpolated_m50(const std::vector<SummaryRow>& summary, const std::string& solver) {
  std::vector<const SummaryRow*> curve;
  for (const auto& s : summary) {
    if (s.solver == solver) curve.push_back(&s);
  }
  std::sort(curve.begin(), curve.end(), [](const SummaryRow* a, const SummaryRow* b) { return a->m < b->m; });
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i]->recovery_rate >= 0.5) {
      if (i == 0) return static_cast<double>(curve[0]->m);
      const double m0 = static_cast<double>(curve[i - 1]->m), m1 = static_cast<double>(curve[i]->m);
      const double r0 = curve[i - 1]->recovery_rate, r1 = curve[i]->recovery_rate;
      return m0 + (0.5 - r0) / (r1 - r0) * (m1 - m0);
    }
  }
  return std::nullopt;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultsCsvHeader << '\n';
  for (const auto& row : rows) {
    const TrialMetrics& mt = row.metrics;
    char wall[64];
    std::snprintf(wall, sizeof wall, "%.3f", row.wall_ms);
    out << row.experiment << ',' << row.m << ',' << row.trial << ',' << row.solver << ','
        << format_double(mt.frob_error) << ',' << format_double(mt.trace_norm_error) << ','
        << format_double(mt.calib_l2_error) << ',' << (mt.success ? 1 : 0) << ',' << mt.iterations << ','
        << to_string(mt.termination) << ',' << wall << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& summary, std::ostream& out) {
  out << kSummaryCsvHeader << '\n';
  for (const auto& s : summary) {
    out << s.solver << ',' << s.m << ',' << s.trials << ',' << format_double(s.recovery_rate) << ','
        << format_double(s.median_frob_error) << ',' << format_double(s.median_trace_norm_error) << ','
        << format_double(s.median_calib_l2_error) << '\n';
  }
}

json sidecar_json(const ExperimentConfig& cfg, const std::vector<SummaryRow>& summary) {
  auto num = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  json j;
  j["schema"] = kResultsSchema;
  j["version"] = version_string();
  j["git"] = git_hash();
  j["config"] = cfg.to_json();
  json rows = json::array();
  std::set<std::string> solvers;
  for (const auto& s : summary) {
    solvers.insert(s.solver);
    rows.push_back({{"solver", s.solver},
                    {"m", s.m},
                    {"trials", s.trials},
                    {"recovery_rate", num(s.recovery_rate)},
                    {"median_frob_error", num(s.median_frob_error)},
                    {"median_trace_norm_error", num(s.median_trace_norm_error)},
                    {"median_calib_l2_error", num(s.median_calib_l2_error)}});
  }
  j["summary"] = rows;
  json m50 = json::object();
  for (const auto& solver : solvers) {
    const auto v = interpolated_m50(summary, solver);
    m50[solver] = v ? json(*v) : json(nullptr);
  }
  j["m50"] = m50;
  return j;
}

void write_outputs(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  if (cfg.output.empty()) throw OutputError("no output path configured");
  auto open = [](const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw OutputError("cannot open '" + path + "' for writing");
    return f;
  };
  const double threshold =
      cfg.experiment == ExperimentKind::kRipProbe ? cfg.rip_delta : cfg.success_threshold;
  const std::vector<SummaryRow> summary = aggregate(rows, threshold);
  {
    auto f = open(cfg.output);
    write_results_csv(rows, f);
    if (!f) throw OutputError("write failed for '" + cfg.output + "'");
  }
  {
    auto f = open(cfg.output + ".summary.csv");
    write_summary_csv(summary, f);
    if (!f) throw OutputError("write failed for '" + cfg.output + ".summary.csv'");
  }
  {
    auto f = open(cfg.output + ".json");
    f << sidecar_json(cfg, summary).dump(2) << '\n';
    if (!f) throw OutputError("write failed for '" + cfg.output + ".json'");
  }
}

}  // namespace blindtomo
