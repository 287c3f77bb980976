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

#ifndef PATHGIBBS_ESTIMATE_HPP
#define PATHGIBBS_ESTIMATE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pathgibbs/errors.hpp"

namespace pathgibbs {

/// Monte Carlo mean with standard error sd / sqrt(n).
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;

  /// Samples are summed in index order, so results do not depend on how
  /// they were produced.
  static Estimate from_samples(std::span<const double> xs) {
    Estimate e;
    e.n_samples = xs.size();
    if (xs.empty()) return e;
    double s = 0.0;
    for (double x : xs) s += x;
    e.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - e.mean) * (x - e.mean);
      e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    if (!std::isfinite(e.mean) || !std::isfinite(e.std_error)) {
      throw NumericalError("non-finite Monte Carlo estimate");
    }
    return e;
  }
};

/// (value - target) / scale, with 0/0 read as agreement.
///
/// A zero scale arises for deterministic estimators; differences below
/// `tiny` are then treated as rounding.
inline double z_value(double diff, double scale, double tiny = 1e-12) {
  if (std::abs(diff) <= tiny && scale <= tiny) return 0.0;
  if (scale > 0.0) return diff / scale;
  return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

inline double z_score(const Estimate& e, double target) { return z_value(e.mean - target, e.std_error); }

/// z of a - b for estimates from independent samples.
inline double combined_z(const Estimate& a, const Estimate& b) {
  return z_value(a.mean - b.mean, std::hypot(a.std_error, b.std_error));
}

/// Estimate of E[a - b] from paired samples.
inline Estimate paired_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("paired samples differ in length");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return Estimate::from_samples(d);
}

}  // namespace pathgibbs

#endif  // PATHGIBBS_ESTIMATE_HPP
