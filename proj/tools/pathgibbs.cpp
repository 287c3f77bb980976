// Copyright 2026 The pathgibbs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pathgibbs: configuration-driven runner for the lattice path-space experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hash.hpp"
#include "pathgibbs/config.hpp"
#include "pathgibbs/io.hpp"

namespace fs = std::filesystem;
using namespace pathgibbs;

namespace {

enum ExitCode : int { kOk = 0, kIoError = 1, kConfigError = 2, kNumericalError = 3, kCheckFailed = 4 };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

struct Run {
  std::string command;
  ExperimentConfig cfg;
  std::string config_hash;
  fs::path out;
  int threads = 0;

  OrderedJson header() const {
    OrderedJson j;
    j["tool"] = "pathgibbs";
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = cfg.seed;
    j["config"] = cfg.canonical;
    return j;
  }

  std::vector<std::string> tag() const { return {config_hash, std::to_string(cfg.seed)}; }

  void emit(const std::string& name, const OrderedJson& j) const {
    write_json(out / name, j);
    std::cout << "wrote " << (out / name).string() << "\n";
  }
};

std::vector<std::string> joined(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> estimate_fields(const Estimate& e) { return {format_real(e.mean), format_real(e.std_error)}; }

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return tools::git_blob_sha1(ss.str());
}

int cmd_simulate(const Run& run) {
  const auto& cfg = run.cfg;
  const Ensemble e = sample_Pn(cfg.drift, cfg.sim, cfg.initial_law, run.threads);
  const Site o = Site::origin(cfg.sim.d);
  std::vector<double> ends, dev;
  for (const auto& r : e.replicas) ends.push_back(r.paths.value(o, cfg.sim.steps));
  const Estimate mean = Estimate::from_samples(ends);
  for (double x : ends) dev.push_back((x - mean.mean) * (x - mean.mean));
  Estimate var = Estimate::from_samples(dev);
  if (ends.size() > 1) {
    const double f = static_cast<double>(ends.size()) / static_cast<double>(ends.size() - 1);
    var.mean *= f;
    var.std_error *= f;
  }

  OrderedJson files = OrderedJson::array();
  if (cfg.write_paths) {
    fs::create_directories(run.out / "replicas");
    char name[64];
    for (std::size_t r = 0; r < e.replicas.size(); ++r) {
      std::snprintf(name, sizeof name, "replicas/replica_%06zu.csv", r);
      write_path_csv(run.out / name, e.replicas[r].paths);
      OrderedJson f;
      f["path"] = name;
      f["sha1"] = file_hash(run.out / name);
      files.push_back(f);
    }
  }
  OrderedJson j = run.header();
  j["d"] = cfg.sim.d;
  j["n"] = cfg.sim.n;
  j["M"] = cfg.sim.steps;
  j["replicas"] = cfg.sim.replicas;
  j["boundary"] = to_string(cfg.sim.boundary);
  j["drift"] = cfg.drift.description();
  j["initial_law"] = cfg.initial_law.name();
  j["region_sites"] = e.region().size();
  j["csv_columns"] = {"site", "t_k", "value"};
  j["files"] = files;
  OrderedJson summary;
  summary["origin_value_at_1"] = to_json(mean);
  summary["origin_variance_at_1"] = to_json(var);
  j["summary"] = summary;
  run.emit("manifest.json", j);
  return kOk;
}

int cmd_entropy(const Run& run) {
  const auto& cfg = run.cfg;
  const EntropySweep s =
      entropy_sweep(cfg.drift, cfg.sim, cfg.entropy.sizes, cfg.initial_law, run.threads, cfg.entropy.z_threshold);
  CsvWriter w(run.out / "entropy.csv", {"config_hash", "seed", "n", "direct_mean", "direct_stderr", "formula_mean",
                                        "formula_stderr", "difference_mean", "difference_stderr", "agreement_z"});
  for (const auto& r : s.rows) {
    auto row = joined(run.tag(), {std::to_string(r.n)});
    row = joined(row, estimate_fields(r.direct));
    row = joined(row, estimate_fields(r.formula));
    row = joined(row, estimate_fields(r.difference));
    row.push_back(format_real(r.agreement_z));
    w.row(row);
  }
  w.close();
  const bool pass = s.agreement && s.bounded;
  OrderedJson j = run.header();
  j["results"] = to_json(s);
  j["pass"] = pass;
  run.emit("entropy.json", j);
  return pass ? kOk : kCheckFailed;
}

int cmd_dlr(const Run& run) {
  const auto& cfg = run.cfg;
  const Box region = Box::centered(cfg.sim.d, cfg.dlr.region_radius);
  const DlrReport rep =
      dlr_check(cfg.drift, cfg.sim, region, cfg.initial_law, cfg.dlr.tests, cfg.dlr.budget, run.threads);
  CsvWriter w(run.out / "dlr.csv", {"config_hash", "seed", "name", "left_mean", "left_stderr", "right_mean",
                                    "right_stderr", "difference_mean", "difference_stderr", "z", "pass"});
  for (const auto& t : rep.tests) {
    auto row = joined(run.tag(), {t.name});
    row = joined(row, estimate_fields(t.left));
    row = joined(row, estimate_fields(t.right));
    row = joined(row, estimate_fields(t.difference));
    row.push_back(format_real(t.z));
    row.push_back(t.pass ? "true" : "false");
    w.row(row);
  }
  w.close();
  OrderedJson j = run.header();
  j["region_sites"] = region.size();
  j["results"] = to_json(rep);
  j["pass"] = rep.pass;
  run.emit("dlr.json", j);
  return rep.pass ? kOk : kCheckFailed;
}

int cmd_free_energy(const Run& run) {
  const auto& cfg = run.cfg;
  const auto& fe = cfg.free_energy;
  const FreeEnergyReport rep = free_energy_run(cfg.drift, *fe.simulation_drift, cfg.sim, cfg.initial_law, run.threads);
  const double z = fe.z_threshold;
  OrderedJson checks = OrderedJson::array();
  bool pass = true;
  auto check = [&](const std::string& name, double value) {
    OrderedJson c;
    c["name"] = name;
    c["z"] = real_json(value);
    c["pass"] = std::abs(value) <= z;
    pass = pass && std::abs(value) <= z;
    checks.push_back(c);
  };
  check("definition_vs_mismatch", rep.agreement_z);
  OrderedJson expected = nullptr;
  if (!fe.explicit_drift) {
    const double target = 0.5 * fe.offset * fe.offset;
    expected = target;
    check("mismatch_vs_expected", z_value(rep.mismatch.mean - target, rep.mismatch.std_error));
    if (fe.offset == 0.0) check("definition_vs_zero", z_score(rep.definition, 0.0));
  }
  OrderedJson j = run.header();
  j["simulation_drift"] = fe.simulation_drift->description();
  j["expected_mismatch"] = expected;
  j["results"] = to_json(rep);
  j["z_threshold"] = z;
  j["checks"] = checks;
  j["pass"] = pass;
  run.emit("free_energy.json", j);
  return pass ? kOk : kCheckFailed;
}

int cmd_moment_check(const Run& run) {
  const auto& cfg = run.cfg;
  SimConfig sim = cfg.sim;
  sim.boundary = BoundaryKind::kFrozen;
  const FrozenField xi =
      cfg.moment.frozen_value == 0.0 ? FrozenField::zero() : FrozenField::constant(cfg.moment.frozen_value);
  const MomentReport rep = moment_bound_report(cfg.drift, sim, cfg.moment.sizes, xi, cfg.initial_law, run.threads,
                                               cfg.moment.ratio_tolerance, cfg.moment.z_threshold);
  CsvWriter w(run.out / "moment.csv",
              {"config_hash", "seed", "n", "sum_gamma", "bracket", "moment_mean", "moment_stderr", "ratio_mean",
               "ratio_stderr", "per_gamma_mean", "per_gamma_stderr", "entropy_mean", "entropy_stderr"});
  for (const auto& r : rep.rows) {
    auto row = joined(run.tag(), {std::to_string(r.n), format_real(r.sum_gamma), format_real(r.bracket)});
    row = joined(row, estimate_fields(r.moment));
    row = joined(row, estimate_fields(r.ratio));
    row = joined(row, estimate_fields(r.per_gamma));
    if (r.entropy) {
      row = joined(row, estimate_fields(r.entropy->direct));
    } else {
      row = joined(row, {"", ""});
    }
    w.row(row);
  }
  w.close();
  OrderedJson j = run.header();
  j["results"] = to_json(rep);
  j["pass"] = rep.pass;
  run.emit("moment.json", j);
  return rep.pass ? kOk : kCheckFailed;
}

int cmd_verify_drift(const Run& run) {
  const auto& cfg = run.cfg;
  const std::vector<VerifierReport> reps{verify_local(cfg.drift, cfg.verify), verify_adapted(cfg.drift, cfg.verify),
                                         verify_sublinear(cfg.drift, cfg.verify)};
  bool pass = true;
  OrderedJson arr = OrderedJson::array();
  CsvWriter w(run.out / "verify.csv", {"config_hash", "seed", "check", "pass", "trials", "empirical_constant",
                                       "declared_constant", "counterexample"});
  for (const auto& r : reps) {
    pass = pass && r.pass;
    arr.push_back(to_json(r));
    w.row(joined(run.tag(), {r.check, r.pass ? "true" : "false", std::to_string(r.trials),
                             format_real(r.empirical_constant), format_real(r.declared_constant), r.counterexample}));
  }
  w.close();
  OrderedJson j = run.header();
  j["drift"] = cfg.drift.description();
  j["results"] = arr;
  j["pass"] = pass;
  run.emit("verify.json", j);
  return pass ? kOk : kCheckFailed;
}

int dispatch(const std::string& command, const Flags& flags) {
  Run run;
  run.command = command;
  run.cfg = load_config(flags.config);
  if (run.cfg.experiment != command) {
    throw ConfigError("config is for experiment '" + run.cfg.experiment + "', not '" + command + "'");
  }
  if (flags.seed) run.cfg.seed = run.cfg.sim.seed = run.cfg.verify.seed = *flags.seed;
  run.threads = resolve_threads(flags.threads.value_or(run.cfg.threads));
  run.out = flags.out.value_or(run.cfg.output_dir);
  run.config_hash = tools::git_blob_sha1(run.cfg.canonical.dump());
  fs::create_directories(run.out);

  if (command == "simulate") return cmd_simulate(run);
  if (command == "entropy") return cmd_entropy(run);
  if (command == "dlr") return cmd_dlr(run);
  if (command == "free-energy") return cmd_free_energy(run);
  if (command == "moment-check") return cmd_moment_check(run);
  return cmd_verify_drift(run);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume simulation and Gibbs checks for lattice diffusions with path-dependent drift"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  for (const auto& name : experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", flags.config, "JSON configuration file")->required();
    sub->add_option("--seed", flags.seed, "override the configured seed");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--threads", flags.threads, "worker threads (0 = all cores)");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    return dispatch(chosen, flags);
  } catch (const ConfigError& e) {
    std::cerr << "pathgibbs: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const PreconditionError& e) {
    std::cerr << "pathgibbs: precondition failed: " << e.what() << "\n";
    return kConfigError;
  } catch (const MissingSiteError& e) {
    std::cerr << "pathgibbs: precondition failed: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "pathgibbs: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "pathgibbs: error: " << e.what() << "\n";
    return kIoError;
  }
}
