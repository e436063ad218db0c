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

// Command-line front end for the experiment harness.
//
//   blindtomo <experiment> [--config file.json] [--seed N] [--out path]
//                          [--workers N] [--override key.path=value ...]
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blindtomo/bench.hpp"

namespace {

using blindtomo::ConfigError;
using blindtomo::ExperimentConfig;
using blindtomo::ExperimentKind;
using nlohmann::json;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  std::vector<std::string> overrides;
  bool quiet = false;
  bool timing = false;
};

ExperimentConfig resolve(ExperimentKind kind, const Options& opt) {
  json doc = json::object();
  if (!opt.config_path.empty()) {
    std::ifstream f(opt.config_path);
    if (!f) throw ConfigError("--config", "cannot read '" + opt.config_path + "'");
    json file = json::parse(f, nullptr, /*allow_exceptions=*/false);
    if (file.is_discarded()) throw ConfigError("--config", "'" + opt.config_path + "' is not valid JSON");
    if (!file.is_object()) throw ConfigError("<root>", "expected an object");
    doc = file;
  }
  const std::string name = blindtomo::to_string(kind);
  if (doc.contains("experiment") && doc["experiment"] != name) {
    const auto& given = doc["experiment"];
    throw ConfigError("experiment", "config is for " + (given.is_string() ? given.get<std::string>() : given.dump()) +
                                          ", command is " + name);
  }
  doc["experiment"] = name;
  for (const auto& assignment : opt.overrides) blindtomo::apply_override(doc, assignment);
  if (opt.seed) doc["master_seed"] = *opt.seed;
  if (!opt.out.empty()) doc["output"] = opt.out;
  if (opt.workers) doc["workers"] = *opt.workers;
  if (opt.timing) doc["timing"] = true;
  return ExperimentConfig::from_json(doc);
}

int run(ExperimentKind kind, const Options& opt) {
  const ExperimentConfig cfg = resolve(kind, opt);
  blindtomo::ProgressCallback progress;
  if (!opt.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      std::cerr << "\r" << done << "/" << total << " tasks" << (done == total ? "\n" : "") << std::flush;
    };
  }
  const auto rows = blindtomo::run_experiment(cfg, progress);
  blindtomo::write_outputs(cfg, rows);

  if (kind == ExperimentKind::kUnitOracles) {
    std::size_t failed = 0;
    for (const auto& row : rows) failed += row.metrics.success ? 0 : 1;
    std::cout << rows.size() - failed << "/" << rows.size() << " oracle checks passed\n";
    return failed == 0 ? 0 : 1;
  }
  const double threshold = kind == ExperimentKind::kRipProbe ? cfg.rip_delta : cfg.success_threshold;
  const auto summary = blindtomo::aggregate(rows, threshold);
  blindtomo::write_summary_csv(summary, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind tomography by sparse de-mixing: experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", blindtomo::version_string() + " (" + blindtomo::git_hash() + ")");

  Options opt;
  const std::vector<std::pair<std::string, ExperimentKind>> commands = {
      {"gue-phase", ExperimentKind::kGuePhase},
      {"pauli-blind", ExperimentKind::kPauliBlind},
      {"coherent-als", ExperimentKind::kCoherentAls},
      {"rip-probe", ExperimentKind::kRipProbe},
      {"oracle-tests", ExperimentKind::kUnitOracles},
  };
  const std::vector<std::string> descriptions = {
      "GUE phase transition: sdt vs dt vs informed dt",
      "Sub-sampled Pauli blind tomography with shot noise",
      "Coherent readout errors: alternating least squares vs standard tomography",
      "Sampled lower bound on the restricted isometry constant",
      "Brute-force oracle checks of projections and adjoints",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, descriptions[i]);
    sub->add_option("--config", opt.config_path, "JSON configuration file");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--out", opt.out, "output CSV path (sidecars get .summary.csv / .json appended)");
    sub->add_option("--workers", opt.workers, "worker threads");
    sub->add_option("--override", opt.overrides, "key.path=value, applied after --config")->take_all();
    sub->add_flag("--timing", opt.timing, "record wall-clock time per row");
    sub->add_flag("-q,--quiet", opt.quiet, "no progress output");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return run(commands[i].second, opt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const blindtomo::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
