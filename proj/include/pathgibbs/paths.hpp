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

#ifndef PATHGIBBS_PATHS_HPP
#define PATHGIBBS_PATHS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pathgibbs/errors.hpp"
#include "pathgibbs/lattice.hpp"

namespace pathgibbs {

/// Uniform grid t_k = k/M on [0, 1].
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(int steps) : steps_(steps) {
    if (steps < 1) throw PreconditionError("time grid needs M >= 1 steps");
  }

  int steps() const { return steps_; }
  std::size_t points() const { return static_cast<std::size_t>(steps_) + 1; }
  double step() const { return 1.0 / steps_; }
  double time(int k) const { return static_cast<double>(k) / steps_; }

  /// Largest k with t_k <= t, clamped to [0, M].
  int index_at_or_below(double t) const {
    const double x = t * steps_;
    int k = static_cast<int>(std::floor(x + 1e-9));
    return std::clamp(k, 0, steps_);
  }

  bool operator==(const TimeGrid&) const = default;

 private:
  int steps_ = 1;
};

/// max_{0<=l<=k} |p(t_l)|.
inline double running_max(std::span<const double> path, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= path.size()) {
    throw PreconditionError("running_max index out of range");
  }
  double m = 0.0;
  for (int l = 0; l <= k; ++l) m = std::max(m, std::abs(path[static_cast<std::size_t>(l)]));
  return m;
}

/// Left-point sum  sum_k integrand[k] (p(t_{k+1}) - p(t_k)).
inline double ito_sum(std::span<const double> integrand, std::span<const double> path) {
  if (path.size() != integrand.size() + 1) throw PreconditionError("ito_sum length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < integrand.size(); ++k) s += integrand[k] * (path[k + 1] - path[k]);
  return s;
}

/// A family of discretised paths indexed by the sites of a finite support.
///
/// Storage is site-major: row r holds the M+1 grid values of support()[r].
class PathConfig {
 public:
  PathConfig() = default;
  PathConfig(TimeGrid grid, Box support)
      : grid_(grid), support_(std::move(support)), data_(support_.size() * grid_.points(), 0.0) {}

  const TimeGrid& grid() const { return grid_; }
  const Box& support() const { return support_; }
  std::size_t rows() const { return support_.size(); }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * grid_.points(), grid_.points()};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * grid_.points(), grid_.points()}; }

  std::span<const double> path(const Site& s) const { return row(row_of(s)); }
  std::span<double> path(const Site& s) { return row(row_of(s)); }

  std::size_t row_of(const Site& s) const {
    auto idx = support_.index_of(s);
    if (!idx) throw MissingSiteError("site (" + s.to_string() + ") not covered by path configuration");
    return *idx;
  }

  double value(const Site& s, int k) const { return path(s)[static_cast<std::size_t>(k)]; }

  const std::vector<double>& data() const { return data_; }

  PathConfig restricted(const Box& sub) const {
    PathConfig out(grid_, sub);
    for (std::size_t r = 0; r < sub.size(); ++r) {
      auto src = path(sub[r]);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }

  /// Values at time t_k as a real configuration.
  RealConfig at_time(int k) const {
    RealConfig x{support_, std::vector<double>(support_.size())};
    for (std::size_t r = 0; r < rows(); ++r) x.values[r] = row(r)[static_cast<std::size_t>(k)];
    return x;
  }

  /// Running maxima  omega_i^*(t_k) as a real configuration.
  RealConfig running_max_at(int k) const {
    RealConfig x{support_, std::vector<double>(support_.size())};
    for (std::size_t r = 0; r < rows(); ++r) x.values[r] = running_max(row(r), k);
    return x;
  }

  bool operator==(const PathConfig&) const = default;

 private:
  TimeGrid grid_;
  Box support_;
  std::vector<double> data_;
};

/// The configuration equal to `inner` on its support and `outer` elsewhere.
inline PathConfig concat(const PathConfig& inner, const PathConfig& outer) {
  if (inner.support().empty()) return outer;
  if (outer.support().empty()) return inner;
  if (!(inner.grid() == outer.grid())) throw PreconditionError("concat: grid mismatch");
  if (!inner.support().disjoint_from(outer.support())) {
    throw PreconditionError("concat: supports overlap");
  }
  PathConfig out(inner.grid(), inner.support().united(outer.support()));
  for (const PathConfig* src : {&inner, &outer}) {
    for (std::size_t r = 0; r < src->rows(); ++r) {
      auto from = src->row(r);
      std::copy(from.begin(), from.end(), out.path(src->support()[r]).begin());
    }
  }
  return out;
}

/// (theta_i omega)_j = omega_{i+j}.
inline PathConfig shift_config(const PathConfig& omega, const Site& i) {
  PathConfig out(omega.grid(), omega.support().translated(-i));
  for (std::size_t r = 0; r < omega.rows(); ++r) {
    auto from = omega.row(r);
    std::copy(from.begin(), from.end(), out.row(r).begin());
  }
  return out;
}

/// Lazy theta_origin omega: offsets are resolved against the underlying support.
class ShiftedView {
 public:
  ShiftedView(const PathConfig& config, Site origin) : config_(&config), origin_(origin) {}

  std::span<const double> path(const Site& offset) const { return config_->path(origin_ + offset); }
  double value(const Site& offset, int k) const { return path(offset)[static_cast<std::size_t>(k)]; }
  /// Value at the grid point at or below time t.
  double value_at_time(const Site& offset, double t) const {
    return value(offset, config_->grid().index_at_or_below(t));
  }
  const TimeGrid& grid() const { return config_->grid(); }
  const Site& origin() const { return origin_; }
  const PathConfig& config() const { return *config_; }

 private:
  const PathConfig* config_;
  Site origin_;
};

}  // namespace pathgibbs

#endif  // PATHGIBBS_PATHS_HPP
