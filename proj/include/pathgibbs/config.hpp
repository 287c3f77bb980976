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

#ifndef PATHGIBBS_CONFIG_HPP
#define PATHGIBBS_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathgibbs/drift.hpp"
#include "pathgibbs/errors.hpp"
#include "pathgibbs/gibbs.hpp"
#include "pathgibbs/initial_law.hpp"
#include "pathgibbs/sim.hpp"

namespace pathgibbs {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"simulate", "entropy", "dlr", "free-energy", "moment-check",
                                              "verify-drift"};
  return kinds;
}

namespace detail {

/// Reads one JSON object, records every key it consumes, and mirrors the
/// values (defaults included) into an ordered canonical object.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where_ + "." + key + ": missing");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    seen_.insert(key);
    double v = 0.0;
    if (j_.contains(key)) {
      const Json& x = j_.at(key);
      if (!x.is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
      v = x.get<double>();
      if (!std::isfinite(v)) throw ConfigError(where_ + "." + key + ": not finite");
    } else if (fallback) {
      v = *fallback;
    } else {
      throw ConfigError(where_ + "." + key + ": missing");
    }
    out_[key] = v;
    return v;
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    seen_.insert(key);
    std::int64_t v = 0;
    if (j_.contains(key)) {
      const Json& x = j_.at(key);
      if (!x.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an integer");
      v = x.get<std::int64_t>();
    } else if (fallback) {
      v = *fallback;
    } else {
      throw ConfigError(where_ + "." + key + ": missing");
    }
    out_[key] = v;
    return v;
  }

  std::int64_t positive(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    const auto v = integer(key, fallback);
    if (v < 1) throw ConfigError(where_ + "." + key + ": must be >= 1");
    return v;
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    seen_.insert(key);
    std::string v;
    if (j_.contains(key)) {
      if (!j_.at(key).is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
      v = j_.at(key).get<std::string>();
    } else if (fallback) {
      v = *fallback;
    } else {
      throw ConfigError(where_ + "." + key + ": missing");
    }
    out_[key] = v;
    return v;
  }

  std::vector<int> int_list(const std::string& key, std::optional<std::vector<int>> fallback = std::nullopt) {
    seen_.insert(key);
    std::vector<int> v;
    if (j_.contains(key)) {
      const Json& x = j_.at(key);
      if (!x.is_array()) throw ConfigError(where_ + "." + key + ": expected an array of integers");
      for (const auto& e : x) {
        if (!e.is_number_integer()) throw ConfigError(where_ + "." + key + ": expected an array of integers");
        v.push_back(e.get<int>());
      }
    } else if (fallback) {
      v = *fallback;
    } else {
      throw ConfigError(where_ + "." + key + ": missing");
    }
    out_[key] = v;
    return v;
  }

  void mark(const std::string& key) { seen_.insert(key); }

  void put(const std::string& key, OrderedJson value) { out_[key] = std::move(value); }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  /// Rejects keys that were never read.
  OrderedJson finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
    return out_;
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
  OrderedJson out_ = OrderedJson::object();
};

inline Json empty_object() { return Json::object(); }

inline const Json& sub_object(const Json& root, const std::string& key, const Json& fallback) {
  return root.contains(key) ? root.at(key) : fallback;
}

}  // namespace detail

struct EntropyOptions {
  std::vector<int> sizes{1, 2, 3};
  double z_threshold = 3.0;
};

struct DlrOptions {
  int region_radius = 0;
  DlrBudget budget;
  std::vector<LocalFunction> tests;
};

struct FreeEnergyOptions {
  std::optional<DriftSpec> simulation_drift;  // beta; defaults to b shifted by offset
  double offset = 0.0;
  bool explicit_drift = false;
  double z_threshold = 3.0;
};

struct MomentOptions {
  std::vector<int> sizes{1, 2, 3, 4};
  double frozen_value = 0.0;
  double ratio_tolerance = 10.0;
  double z_threshold = 3.0;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int threads = 0;
  DriftSpec drift;
  SimConfig sim;
  InitialLaw initial_law = InitialLaw::reference();
  EntropyOptions entropy;
  DlrOptions dlr;
  FreeEnergyOptions free_energy;
  MomentOptions moment;
  VerifierOptions verify;
  std::string output_dir = "out";
  bool write_paths = true;
  /// Every parameter with defaults filled in, excluding seed, threads and output.
  OrderedJson canonical;
};

namespace detail {

inline Branch parse_affine(const Json& j, const std::string& where, OrderedJson& out) {
  if (j.is_number()) {
    out = j.get<double>();
    return affine_branch(j.get<double>(), 0.0);
  }
  ObjectReader r(j, where);
  const double c = r.number("const", 0.0);
  const double s = r.number("slope", 0.0);
  out = r.finish();
  return affine_branch(c, s);
}

inline DriftSpec parse_drift(const Json& j, int dim, const std::string& where, OrderedJson& out) {
  ObjectReader r(j, where);
  const std::string kind = r.string("kind");
  DriftSpec b;
  if (kind == "zero") {
    b = zero_drift(dim);
  } else if (kind == "constant") {
    b = constant_drift(dim, r.number("c"));
  } else if (kind == "ou") {
    b = ou_drift(dim, r.number("kappa"));
  } else if (kind == "barycentre_delay") {
    const auto radius = r.integer("delta", 1);
    if (radius < 0 || radius > 8) throw ConfigError(r.path("delta") + ": radius must lie in [0, 8]");
    const double delay = r.number("delay");
    if (!(delay > 0.0 && delay < 1.0)) throw ConfigError(r.path("delay") + ": must lie in (0, 1)");
    OrderedJson plus_out, minus_out;
    Branch plus = parse_affine(r.raw("beta_plus"), r.path("beta_plus"), plus_out);
    Branch minus = parse_affine(r.raw("beta_minus"), r.path("beta_minus"), minus_out);
    r.put("beta_plus", plus_out);
    r.put("beta_minus", minus_out);
    const double pc = plus_out.is_number() ? plus_out.get<double>() : plus_out["const"].get<double>();
    const double ps = plus_out.is_number() ? 0.0 : plus_out["slope"].get<double>();
    const double mc = minus_out.is_number() ? minus_out.get<double>() : minus_out["const"].get<double>();
    const double ms = minus_out.is_number() ? 0.0 : minus_out["slope"].get<double>();
    b = barycentre_delay_drift(dim, static_cast<int>(radius), delay, pc, ps, mc, ms);
  } else if (kind == "running_integral") {
    OrderedJson alpha_out;
    const Json& a = r.raw("alpha");
    parse_affine(a, r.path("alpha"), alpha_out);
    r.put("alpha", alpha_out);
    const double c = alpha_out.is_number() ? alpha_out.get<double>() : alpha_out["const"].get<double>();
    const double s = alpha_out.is_number() ? 0.0 : alpha_out["slope"].get<double>();
    b = running_integral_drift(dim, c, s);
  } else {
    throw ConfigError(r.path("kind") + ": unknown drift '" + kind +
                      "' (expected zero, constant, ou, barycentre_delay or running_integral)");
  }
  out = r.finish();
  return b;
}

inline InitialLaw parse_initial_law(const Json& j, OrderedJson& out) {
  ObjectReader r(j, "initial_law");
  const std::string kind = r.string("kind", "reference");
  InitialLaw law = InitialLaw::reference();
  if (kind == "reference") {
  } else if (kind == "dirac") {
    law = Dirac{r.number("value", 0.0)};
  } else if (kind == "gaussian_product") {
    const double mean = r.number("mean", 0.0);
    const double var = r.number("variance", 1.0);
    if (!(var > 0.0)) throw ConfigError("initial_law.variance: must be > 0");
    law = GaussianProduct{mean, var};
  } else {
    throw ConfigError("initial_law.kind: unknown law '" + kind + "' (expected reference, dirac or gaussian_product)");
  }
  out = r.finish();
  return law;
}

inline Site parse_site(const Json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(where + ": expected an array of " + std::to_string(dim) + " integers");
  }
  std::vector<int> c;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw ConfigError(where + ": expected integers");
    c.push_back(e.get<int>());
  }
  return Site(std::span<const int>(c));
}

inline OrderedJson site_json(const Site& s) {
  OrderedJson a = OrderedJson::array();
  for (int k = 0; k < s.dim(); ++k) a.push_back(s[k]);
  return a;
}

inline LocalFunction parse_test(const Json& j, int dim, const std::string& where, OrderedJson& out) {
  ObjectReader r(j, where);
  const std::string kind = r.string("kind");
  const Site s = parse_site(r.raw("site"), dim, r.path("site"));
  r.put("site", site_json(s));
  const double t = r.number("t", 1.0);
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError(r.path("t") + ": must lie in [0, 1]");
  LocalFunction g;
  if (kind == "value") {
    g = local_value(s, t);
  } else if (kind == "value_capped") {
    g = local_value_capped(s, t, r.number("cap"));
  } else if (kind == "square") {
    g = local_square(s, t);
  } else if (kind == "indicator_positive") {
    g = local_indicator_positive(s, t);
  } else {
    throw ConfigError(r.path("kind") + ": unknown test '" + kind +
                      "' (expected value, value_capped, square or indicator_positive)");
  }
  out = r.finish();
  return g;
}

}  // namespace detail

/// Parses and validates a configuration. Unknown keys anywhere are rejected.
inline ExperimentConfig parse_config(const Json& root) {
  using detail::ObjectReader;
  ExperimentConfig cfg;
  ObjectReader top(root, "config");
  OrderedJson canon = OrderedJson::object();

  cfg.experiment = top.string("experiment");
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), cfg.experiment) == experiment_kinds().end()) {
    throw ConfigError("config.experiment: unknown experiment '" + cfg.experiment + "'");
  }
  canon["experiment"] = cfg.experiment;
  {
    const Json& s = top.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("config.seed: expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.threads = static_cast<int>(top.integer("threads", 0));
  if (cfg.threads < 0) throw ConfigError("config.threads: must be >= 0");

  const Json empty = detail::empty_object();
  {
    ObjectReader r(detail::sub_object(root, "sim", empty), "sim");
    top.mark("sim");
    cfg.sim.d = static_cast<int>(r.positive("d", 1));
    if (cfg.sim.d > kMaxDim) throw ConfigError("sim.d: must be <= " + std::to_string(kMaxDim));
    cfg.sim.n = static_cast<int>(r.positive("n", 4));
    cfg.sim.steps = static_cast<int>(r.positive("steps", 100));
    cfg.sim.replicas = static_cast<std::size_t>(r.positive("replicas", 1000));
    const std::string boundary = r.string("boundary", "zero");
    if (boundary == "zero") {
      cfg.sim.boundary = BoundaryKind::kZero;
    } else if (boundary == "frozen") {
      cfg.sim.boundary = BoundaryKind::kFrozen;
      cfg.sim.frozen = FrozenField::constant(r.number("frozen_value", 0.0));
    } else if (boundary == "periodic") {
      cfg.sim.boundary = BoundaryKind::kPeriodic;
    } else {
      throw ConfigError("sim.boundary: unknown boundary '" + boundary + "' (expected zero, frozen or periodic)");
    }
    canon["sim"] = r.finish();
  }
  {
    OrderedJson out;
    cfg.drift = detail::parse_drift(top.raw("drift"), cfg.sim.d, "drift", out);
    canon["drift"] = out;
  }
  {
    OrderedJson out;
    top.mark("initial_law");
    cfg.initial_law = detail::parse_initial_law(detail::sub_object(root, "initial_law", empty), out);
    canon["initial_law"] = out;
  }
  canon["gamma_norm"] = "sup";

  const auto& kind = cfg.experiment;
  if (kind == "entropy") {
    ObjectReader r(detail::sub_object(root, "entropy", empty), "entropy");
    top.mark("entropy");
    cfg.entropy.sizes = r.int_list("sizes", cfg.entropy.sizes);
    cfg.entropy.z_threshold = r.number("z_threshold", 3.0);
    canon["entropy"] = r.finish();
  } else if (kind == "dlr") {
    ObjectReader r(detail::sub_object(root, "dlr", empty), "dlr");
    top.mark("dlr");
    cfg.dlr.region_radius = static_cast<int>(r.integer("region_radius", 0));
    if (cfg.dlr.region_radius < 0) throw ConfigError("dlr.region_radius: must be >= 0");
    cfg.dlr.budget.outer = static_cast<std::size_t>(r.positive("outer", 5000));
    cfg.dlr.budget.inner = static_cast<std::size_t>(r.positive("inner", 200));
    cfg.dlr.budget.z_threshold = r.number("z_threshold", 3.0);
    cfg.dlr.budget.ess_fraction = r.number("ess_fraction", 0.1);
    cfg.dlr.budget.max_ess_failure_rate = r.number("max_ess_failure_rate", 0.05);
    OrderedJson tests = OrderedJson::array();
    if (r.has("tests")) {
      const Json& arr = r.raw("tests");
      if (!arr.is_array() || arr.empty()) throw ConfigError("dlr.tests: expected a non-empty array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        OrderedJson out;
        cfg.dlr.tests.push_back(detail::parse_test(arr[i], cfg.sim.d, "dlr.tests[" + std::to_string(i) + "]", out));
        tests.push_back(out);
      }
    } else {
      r.mark("tests");
      const Site o = Site::origin(cfg.sim.d);
      cfg.dlr.tests = {local_value_capped(o, 1.0, 5.0), local_square(o, 0.5), local_indicator_positive(o, 1.0)};
      const OrderedJson site = detail::site_json(o);
      tests.push_back({{"kind", "value_capped"}, {"site", site}, {"t", 1.0}, {"cap", 5.0}});
      tests.push_back({{"kind", "square"}, {"site", site}, {"t", 0.5}});
      tests.push_back({{"kind", "indicator_positive"}, {"site", site}, {"t", 1.0}});
    }
    r.put("tests", tests);
    canon["dlr"] = r.finish();
  } else if (kind == "free-energy") {
    ObjectReader r(detail::sub_object(root, "free_energy", empty), "free_energy");
    top.mark("free_energy");
    if (r.has("simulation_drift")) {
      if (r.has("offset")) throw ConfigError("free_energy: give either simulation_drift or offset, not both");
      OrderedJson out;
      cfg.free_energy.simulation_drift =
          detail::parse_drift(r.raw("simulation_drift"), cfg.sim.d, "free_energy.simulation_drift", out);
      cfg.free_energy.explicit_drift = true;
      r.put("simulation_drift", out);
    } else {
      cfg.free_energy.offset = r.number("offset", 0.0);
      cfg.free_energy.simulation_drift = offset_drift(cfg.drift, cfg.free_energy.offset);
    }
    cfg.free_energy.z_threshold = r.number("z_threshold", 3.0);
    canon["free_energy"] = r.finish();
  } else if (kind == "moment-check") {
    ObjectReader r(detail::sub_object(root, "moment", empty), "moment");
    top.mark("moment");
    cfg.moment.sizes = r.int_list("sizes", cfg.moment.sizes);
    cfg.moment.frozen_value = r.number("frozen_value", 0.0);
    cfg.moment.ratio_tolerance = r.number("ratio_tolerance", 10.0);
    cfg.moment.z_threshold = r.number("z_threshold", 3.0);
    canon["moment"] = r.finish();
  } else if (kind == "verify-drift") {
    ObjectReader r(detail::sub_object(root, "verify", empty), "verify");
    top.mark("verify");
    cfg.verify.trials = static_cast<std::size_t>(r.positive("trials", 10000));
    cfg.verify.steps = static_cast<int>(r.positive("steps", 64));
    cfg.verify.margin = static_cast<int>(r.integer("margin", 2));
    if (cfg.verify.margin < 1) throw ConfigError("verify.margin: must be >= 1");
    canon["verify"] = r.finish();
  }
  for (const auto& sizes : {std::cref(cfg.entropy.sizes), std::cref(cfg.moment.sizes)}) {
    if (sizes.get().empty()) throw ConfigError("sizes: expected at least one box size");
    for (int n : sizes.get()) {
      if (n < 1) throw ConfigError("sizes: box sizes must be >= 1");
    }
  }
  {
    ObjectReader r(detail::sub_object(root, "output", empty), "output");
    top.mark("output");
    cfg.output_dir = r.string("dir", "out");
    if (r.has("write_paths")) {
      const Json& w = r.raw("write_paths");
      if (!w.is_boolean()) throw ConfigError("output.write_paths: expected a boolean");
      cfg.write_paths = w.get<bool>();
    }
    r.finish();
  }
  top.finish();
  cfg.sim.seed = cfg.seed;
  cfg.verify.seed = cfg.seed;
  cfg.canonical = std::move(canon);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Json root;
  try {
    root = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(root);
}

}  // namespace pathgibbs

#endif  // PATHGIBBS_CONFIG_HPP
