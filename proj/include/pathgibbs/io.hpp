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

#ifndef PATHGIBBS_IO_HPP
#define PATHGIBBS_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathgibbs/drift.hpp"
#include "pathgibbs/errors.hpp"
#include "pathgibbs/estimate.hpp"
#include "pathgibbs/gibbs.hpp"
#include "pathgibbs/paths.hpp"

namespace pathgibbs {

using OrderedJson = nlohmann::ordered_json;

/// Seventeen significant digits; exact for doubles.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// RFC-4180 style writer: CRLF line ends, quoted fields where needed.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write '" + path.string() + "'");
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << "\r\n";
  }

  void close() {
    out_.close();
    if (!out_) throw Error("write failed");
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const OrderedJson& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string site_label(const Site& s) { return s.to_string(';'); }

/// Long-format rows (site, t_k, value) for every site of the configuration.
inline void write_path_csv(const std::filesystem::path& path, const PathConfig& c) {
  CsvWriter w(path, {"site", "t_k", "value"});
  for (const auto& s : c.support()) {
    const auto p = c.path(s);
    const std::string label = site_label(s);
    for (int k = 0; k <= c.grid().steps(); ++k) {
      w.row({label, format_real(c.grid().time(k)), format_real(p[static_cast<std::size_t>(k)])});
    }
  }
  w.close();
}

/// Non-finite values become null.
inline OrderedJson real_json(double v) { return std::isfinite(v) ? OrderedJson(v) : OrderedJson(nullptr); }

inline OrderedJson to_json(const Estimate& e) {
  OrderedJson j;
  j["mean"] = real_json(e.mean);
  j["stderr"] = real_json(e.std_error);
  j["n"] = e.n_samples;
  return j;
}

inline OrderedJson to_json(const VerifierReport& r) {
  OrderedJson j;
  j["check"] = r.check;
  j["pass"] = r.pass;
  j["trials"] = r.trials;
  j["empirical_constant"] = real_json(r.empirical_constant);
  j["declared_constant"] = real_json(r.declared_constant);
  j["counterexample"] = r.counterexample.empty() ? OrderedJson(nullptr) : OrderedJson(r.counterexample);
  return j;
}

inline OrderedJson to_json(const EntropyRow& r) {
  OrderedJson j;
  j["n"] = r.n;
  j["direct"] = to_json(r.direct);
  j["formula"] = to_json(r.formula);
  j["difference"] = to_json(r.difference);
  j["agreement_z"] = real_json(r.agreement_z);
  j["max_site_drift_square"] = real_json(r.max_site_square);
  return j;
}

inline OrderedJson to_json(const EntropySweep& s) {
  OrderedJson j;
  OrderedJson rows = OrderedJson::array();
  for (const auto& r : s.rows) rows.push_back(to_json(r));
  j["rows"] = rows;
  j["initial_entropy_per_site"] = real_json(s.initial_entropy);
  j["drift_norm_sq"] = real_json(s.drift_norm_sq);
  j["bound"] = real_json(s.bound);
  j["z_threshold"] = s.z_threshold;
  j["agreement"] = s.agreement;
  j["bounded"] = s.bounded;
  return j;
}

inline OrderedJson to_json(const DlrReport& r) {
  OrderedJson ess;
  ess["min"] = real_json(r.ess_min);
  ess["mean"] = real_json(r.ess_mean);
  ess["failures"] = r.ess_failures;
  ess["failure_rate"] = real_json(r.ess_failure_rate);
  OrderedJson tests = OrderedJson::array();
  for (const auto& t : r.tests) {
    OrderedJson j;
    j["name"] = t.name;
    j["mean"] = real_json(t.difference.mean);
    j["stderr"] = real_json(t.difference.std_error);
    j["n"] = t.difference.n_samples;
    j["z"] = real_json(t.z);
    j["pass"] = t.pass;
    j["ess_stats"] = ess;
    j["left"] = to_json(t.left);
    j["right"] = to_json(t.right);
    tests.push_back(j);
  }
  OrderedJson j;
  j["outer"] = r.outer;
  j["inner"] = r.inner;
  j["z_threshold"] = r.z_threshold;
  j["ess_stats"] = ess;
  j["tests"] = tests;
  j["pass"] = r.pass;
  return j;
}

inline OrderedJson to_json(const FreeEnergyReport& r) {
  OrderedJson j;
  j["interior_sites"] = r.interior_sites;
  j["mismatch"] = to_json(r.mismatch);
  j["definition"] = to_json(r.definition);
  j["difference"] = to_json(r.difference);
  j["agreement_z"] = real_json(r.agreement_z);
  return j;
}

inline OrderedJson to_json(const MomentReport& r) {
  OrderedJson rows = OrderedJson::array();
  for (const auto& row : r.rows) {
    OrderedJson j;
    j["n"] = row.n;
    j["sum_gamma"] = real_json(row.sum_gamma);
    j["bracket"] = real_json(row.bracket);
    j["moment"] = to_json(row.moment);
    j["ratio"] = to_json(row.ratio);
    j["per_gamma"] = to_json(row.per_gamma);
    rows.push_back(j);
  }
  OrderedJson j;
  j["rows"] = rows;
  j["slope"] = real_json(r.slope);
  j["slope_stderr"] = real_json(r.slope_se);
  j["slope_z"] = real_json(r.slope_z);
  j["z_threshold"] = r.z_threshold;
  j["no_trend"] = r.no_trend;
  j["max_over_min"] = real_json(r.max_over_min);
  j["ratio_tolerance"] = r.ratio_tolerance;
  j["bounded"] = r.bounded;
  j["entropy"] = r.entropy ? to_json(*r.entropy) : OrderedJson(nullptr);
  j["pass"] = r.pass;
  return j;
}

}  // namespace pathgibbs

#endif  // PATHGIBBS_IO_HPP
