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

#ifndef PATHGIBBS_LATTICE_HPP
#define PATHGIBBS_LATTICE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdlib>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathgibbs/errors.hpp"

namespace pathgibbs {

inline constexpr int kMaxDim = 4;

/// A point of the integer lattice Z^d, 1 <= d <= kMaxDim.
///
/// Unused trailing coordinates are kept at zero so the defaulted comparison
/// is a lexicographic order on sites of equal dimension.
class Site {
 public:
  Site() = default;

  Site(std::initializer_list<int> coords) : dim_(static_cast<int>(coords.size())) {
    if (dim_ < 1 || dim_ > kMaxDim) {
      throw PreconditionError("site dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
    }
    std::copy(coords.begin(), coords.end(), coords_.begin());
  }

  explicit Site(std::span<const int> coords) : dim_(static_cast<int>(coords.size())) {
    if (dim_ < 1 || dim_ > kMaxDim) {
      throw PreconditionError("site dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
    }
    std::copy(coords.begin(), coords.end(), coords_.begin());
  }

  static Site origin(int dim) {
    Site s;
    if (dim < 1 || dim > kMaxDim) throw PreconditionError("invalid lattice dimension");
    s.dim_ = dim;
    return s;
  }

  int dim() const { return dim_; }
  int operator[](int axis) const { return coords_[static_cast<std::size_t>(axis)]; }
  int& operator[](int axis) { return coords_[static_cast<std::size_t>(axis)]; }

  bool is_origin() const {
    return std::all_of(coords_.begin(), coords_.end(), [](int c) { return c == 0; });
  }

  /// Sup-norm max_a |i_a|.
  int sup_norm() const {
    int m = 0;
    for (int a = 0; a < dim_; ++a) m = std::max(m, std::abs((*this)[a]));
    return m;
  }

  Site operator+(const Site& o) const {
    check_same_dim(o);
    Site r = *this;
    for (int a = 0; a < dim_; ++a) r[a] += o[a];
    return r;
  }
  Site operator-(const Site& o) const {
    check_same_dim(o);
    Site r = *this;
    for (int a = 0; a < dim_; ++a) r[a] -= o[a];
    return r;
  }
  Site operator-() const {
    Site r = *this;
    for (int a = 0; a < dim_; ++a) r[a] = -r[a];
    return r;
  }
  Site scaled(int factor) const {
    Site r = *this;
    for (int a = 0; a < dim_; ++a) r[a] *= factor;
    return r;
  }

  std::string to_string(char sep = ',') const {
    std::string out;
    for (int a = 0; a < dim_; ++a) {
      if (a) out += sep;
      out += std::to_string((*this)[a]);
    }
    return out;
  }

  auto operator<=>(const Site&) const = default;
  bool operator==(const Site&) const = default;

 private:
  void check_same_dim(const Site& o) const {
    if (o.dim_ != dim_) throw PreconditionError("site dimension mismatch");
  }

  int dim_ = 0;
  std::array<int, kMaxDim> coords_{};
};

/// A finite set of sites stored as a sorted, duplicate-free list.
class Box {
 public:
  Box() = default;

  explicit Box(std::vector<Site> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    for (const auto& s : sites_) {
      if (s.dim() != sites_.front().dim()) throw PreconditionError("box mixes site dimensions");
    }
  }

  /// Lambda_n = {-n, ..., n-1}^d.
  static Box cube(int dim, int n) {
    if (n < 1) throw PreconditionError("cube side parameter n must be >= 1");
    return range_cube(dim, -n, n - 1);
  }

  /// {-r, ..., r}^d.
  static Box centered(int dim, int radius) {
    if (radius < 0) throw PreconditionError("radius must be >= 0");
    return range_cube(dim, -radius, radius);
  }

  /// {lo, ..., hi}^d.
  static Box range_cube(int dim, int lo, int hi) {
    std::vector<Site> out;
    Site s = Site::origin(dim);
    for (int a = 0; a < dim; ++a) s[a] = lo;
    if (hi < lo) return Box{};
    for (;;) {
      out.push_back(s);
      int a = dim - 1;
      while (a >= 0 && s[a] == hi) {
        s[a] = lo;
        --a;
      }
      if (a < 0) break;
      ++s[a];
    }
    return Box(std::move(out));
  }

  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  int dim() const { return sites_.empty() ? 0 : sites_.front().dim(); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& operator[](std::size_t idx) const { return sites_[idx]; }
  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  std::optional<std::size_t> index_of(const Site& s) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it == sites_.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - sites_.begin());
  }
  bool contains(const Site& s) const { return index_of(s).has_value(); }

  bool is_subset_of(const Box& other) const {
    return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
  }

  Box united(const Box& other) const {
    std::vector<Site> out;
    std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                   std::back_inserter(out));
    return from_sorted(std::move(out));
  }
  Box minus(const Box& other) const {
    std::vector<Site> out;
    std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                        std::back_inserter(out));
    return from_sorted(std::move(out));
  }
  Box intersected(const Box& other) const {
    std::vector<Site> out;
    std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(),
                          other.sites_.end(), std::back_inserter(out));
    return from_sorted(std::move(out));
  }
  bool disjoint_from(const Box& other) const { return intersected(other).empty(); }

  /// {s + offset : s in this}; translation preserves the site order.
  Box translated(const Site& offset) const {
    std::vector<Site> out;
    out.reserve(sites_.size());
    for (const auto& s : sites_) out.push_back(s + offset);
    return from_sorted(std::move(out));
  }

  bool operator==(const Box&) const = default;

 private:
  static Box from_sorted(std::vector<Site> sorted) {
    Box b;
    b.sites_ = std::move(sorted);
    return b;
  }

  std::vector<Site> sites_;
};

/// The finite window Delta a drift may read; always contains the origin.
class InteractionRange {
 public:
  InteractionRange() = default;

  explicit InteractionRange(Box offsets) : offsets_(std::move(offsets)) {
    if (offsets_.empty()) throw PreconditionError("interaction range must be nonempty");
    if (!offsets_.contains(Site::origin(offsets_.dim()))) {
      throw PreconditionError("interaction range must contain the origin");
    }
    origin_slot_ = *offsets_.index_of(Site::origin(offsets_.dim()));
  }

  static InteractionRange centered(int dim, int radius) {
    return InteractionRange(Box::centered(dim, radius));
  }
  static InteractionRange self(int dim) { return centered(dim, 0); }

  const Box& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  int dim() const { return offsets_.dim(); }
  /// Position of the origin within offsets().
  std::size_t origin_slot() const { return origin_slot_; }

  int radius() const {
    int r = 0;
    for (const auto& s : offsets_) r = std::max(r, s.sup_norm());
    return r;
  }

  /// max over pairs of the sup-norm distance.
  int diameter() const {
    int d = 0;
    for (const auto& a : offsets_) {
      for (const auto& b : offsets_) d = std::max(d, (a - b).sup_norm());
    }
    return d;
  }

 private:
  Box offsets_;
  std::size_t origin_slot_ = 0;
};

/// Lambda^+ = {i : (Delta + i) meets Lambda} = {l - j : l in Lambda, j in Delta}.
inline Box enlarge(const Box& region, const InteractionRange& range) {
  std::vector<Site> out;
  out.reserve(region.size() * range.size());
  for (const auto& l : region) {
    for (const auto& j : range.offsets()) out.push_back(l - j);
  }
  return Box(std::move(out));
}

/// Sites read by drifts evaluated at the sites of `region`: {l + j}.
inline Box footprint(const Box& region, const InteractionRange& range) {
  std::vector<Site> out;
  out.reserve(region.size() * range.size());
  for (const auto& l : region) {
    for (const auto& j : range.offsets()) out.push_back(l + j);
  }
  return Box(std::move(out));
}

/// gamma_i = (1 + |i|)^{-(d+1)} with |i| the sup-norm.
inline double gamma(const Site& i) {
  return std::pow(1.0 + static_cast<double>(i.sup_norm()), -(i.dim() + 1));
}

inline double gamma_mass(const Box& support) {
  double s = 0.0;
  for (const auto& i : support) s += gamma(i);
  return s;
}

/// A real-valued configuration x_i on a finite support.
struct RealConfig {
  Box support;
  std::vector<double> values;  // aligned with support.sites()

  double at(const Site& s) const {
    auto idx = support.index_of(s);
    if (!idx) throw MissingSiteError("site (" + s.to_string() + ") outside configuration");
    return values[*idx];
  }
};

/// sum over the support of gamma_i x_i^2.
inline double weighted_sq_norm(const Box& support, std::span<const double> values) {
  if (values.size() != support.size()) throw PreconditionError("values/support size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += gamma(support[k]) * values[k] * values[k];
  return s;
}

inline double weighted_sq_norm(const RealConfig& x) { return weighted_sq_norm(x.support, x.values); }

/// (theta_i x)_j = x_{i+j}; the support is relabelled j = s - i.
inline RealConfig shift_config(const RealConfig& x, const Site& i) {
  return RealConfig{x.support.translated(-i), x.values};
}

}  // namespace pathgibbs

#endif  // PATHGIBBS_LATTICE_HPP
