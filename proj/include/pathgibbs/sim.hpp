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

#ifndef PATHGIBBS_SIM_HPP
#define PATHGIBBS_SIM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathgibbs/drift.hpp"
#include "pathgibbs/errors.hpp"
#include "pathgibbs/estimate.hpp"
#include "pathgibbs/initial_law.hpp"
#include "pathgibbs/lattice.hpp"
#include "pathgibbs/parallel.hpp"
#include "pathgibbs/paths.hpp"
#include "pathgibbs/rng.hpp"

namespace pathgibbs {

/// A deterministic outside configuration xi_i(t); an empty function is xi = 0.
struct FrozenField {
  std::string description = "zero";
  std::function<double(const Site&, double)> value;

  static FrozenField zero() { return {}; }
  static FrozenField constant(double a) {
    return {"constant{" + detail::fmt_double(a) + "}", [a](const Site&, double) { return a; }};
  }

  double operator()(const Site& s, double t) const { return value ? value(s, t) : 0.0; }

  FrozenField scaled(double factor) const {
    if (!value) return *this;
    auto v = value;
    return {description + "*" + detail::fmt_double(factor),
            [v, factor](const Site& s, double t) { return factor * v(s, t); }};
  }

  void fill(PathConfig& cfg, const Box& sites) const {
    for (const auto& s : sites) {
      auto p = cfg.path(s);
      for (int k = 0; k <= cfg.grid().steps(); ++k) p[static_cast<std::size_t>(k)] = (*this)(s, cfg.grid().time(k));
    }
  }
};

enum class BoundaryKind { kZero, kFrozen, kPeriodic };

inline std::string to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::kZero: return "zero";
    case BoundaryKind::kFrozen: return "frozen";
    case BoundaryKind::kPeriodic: return "periodic";
  }
  return "?";
}

struct SimConfig {
  int d = 1;
  int n = 1;
  int steps = 200;
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  BoundaryKind boundary = BoundaryKind::kZero;
  FrozenField frozen;  // used when boundary == kFrozen

  void validate() const {
    if (d < 1 || d > kMaxDim) throw PreconditionError("d must lie in [1, " + std::to_string(kMaxDim) + "]");
    if (n < 1) throw PreconditionError("n must be >= 1");
    if (steps < 1) throw PreconditionError("M must be >= 1");
    if (replicas < 1) throw PreconditionError("R must be >= 1");
  }

  TimeGrid grid() const { return TimeGrid(steps); }
  Box box() const { return Box::cube(d, n); }
};

/// One simulated finite-volume configuration.
///
/// `paths` covers the simulated region and every outside site its drifts
/// read; `increments` holds sqrt(h) Z for each region site, M per site.
struct Replica {
  PathConfig paths;
  Box region;
  std::vector<double> increments;

  std::span<const double> increments_of(std::size_t region_index) const {
    const auto m = static_cast<std::size_t>(paths.grid().steps());
    return {increments.data() + region_index * m, m};
  }
};

/// Euler-Maruyama for  dX_i = b_t(theta_i (X_Lambda xi_{Lambda^c})) dt + dB_i  on a region.
///
/// The geometry (slot table) is built once and reused across runs.
class FiniteVolumeSolver {
 public:
  FiniteVolumeSolver(DriftSpec drift, Box region, Box support, const std::function<Site(const Site&)>& wrap = {})
      : drift_(std::move(drift)),
        region_(std::move(region)),
        support_(std::move(support)) {
    if (!region_.is_subset_of(support_)) throw PreconditionError("simulation region not covered by the support");
    table_ = SlotTable(region_, drift_.range(), support_, wrap);
    region_rows_.reserve(region_.size());
    for (const auto& s : region_) region_rows_.push_back(*support_.index_of(s));
  }

  const Box& region() const { return region_; }
  const Box& support() const { return support_; }
  const DriftSpec& drift() const { return drift_; }

  /// `working` supplies X_Lambda(0) and the frozen outside paths; region rows
  /// at k >= 1 are overwritten.
  Replica run(PathConfig working, RngStream& rng) const {
    if (!(working.support() == support_)) throw PreconditionError("working configuration has the wrong support");
    const TimeGrid grid = working.grid();
    const int m = grid.steps();
    const double h = grid.step();
    const double sqrt_h = std::sqrt(h);
    std::vector<double> inc(region_.size() * static_cast<std::size_t>(m));
    std::vector<DriftWindow> windows;
    windows.reserve(region_.size());
    for (std::size_t p = 0; p < region_.size(); ++p) windows.emplace_back(working, region_[p], table_.for_site(p));
    for (int k = 0; k < m; ++k) {
      for (std::size_t p = 0; p < region_.size(); ++p) {
        const double b = drift_(windows[p], k);
        const double dw = sqrt_h * rng.normal();
        auto row = working.row(region_rows_[p]);
        const double next = row[static_cast<std::size_t>(k)] + b * h + dw;
        if (!std::isfinite(b) || !std::isfinite(next)) {
          throw NumericalError("non-finite state at site (" + region_[p].to_string() + "), step " +
                               std::to_string(k) + " (drift " + detail::fmt_double(b) + ")");
        }
        row[static_cast<std::size_t>(k) + 1] = next;
        inc[p * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] = dw;
      }
    }
    return Replica{std::move(working), region_, std::move(inc)};
  }

 private:
  DriftSpec drift_;
  Box region_;
  Box support_;
  SlotTable table_;
  std::vector<std::size_t> region_rows_;
};

/// One draw from P^{xi, Lambda}: xi supplies X_Lambda(0) and the outside paths.
inline Replica solve_finite_volume(const DriftSpec& b, const Box& region, const PathConfig& xi, RngStream& rng) {
  FiniteVolumeSolver solver(b, region, xi.support());
  return solver.run(xi, rng);
}

/// Replica sampler for P_n: X_{Lambda_n}(0) ~ mu^{Lambda_n}, outside per the boundary mode.
class PnSampler {
 public:
  PnSampler(DriftSpec drift, SimConfig cfg, InitialLaw law)
      : drift_(std::move(drift)), cfg_(std::move(cfg)), law_(std::move(law)), region_(cfg_.box()) {
    cfg_.validate();
    if (drift_.dim() != cfg_.d) throw PreconditionError("drift dimension differs from d");
    std::function<Site(const Site&)> wrap;
    if (cfg_.boundary == BoundaryKind::kPeriodic) {
      support_ = region_;
      const int n = cfg_.n;
      wrap = [n](const Site& s) {
        Site w = s;
        for (int a = 0; a < s.dim(); ++a) {
          int c = (s[a] + n) % (2 * n);
          if (c < 0) c += 2 * n;
          w[a] = c - n;
        }
        return w;
      };
    } else {
      support_ = region_.united(footprint(region_, drift_.range()));
    }
    solver_.emplace_back(drift_, region_, support_, wrap);
    template_ = PathConfig(cfg_.grid(), support_);
    if (cfg_.boundary == BoundaryKind::kFrozen) cfg_.frozen.fill(template_, support_.minus(region_));
  }

  Replica replica(std::size_t r) const {
    RngStream rng = make_stream(cfg_.seed, r, StreamTag::kSimulation);
    PathConfig working = template_;
    for (const auto& s : region_) working.path(s)[0] = law_.sample(rng);
    return solver_.front().run(std::move(working), rng);
  }

  const SimConfig& config() const { return cfg_; }
  const DriftSpec& drift() const { return drift_; }
  const InitialLaw& law() const { return law_; }
  const Box& region() const { return region_; }
  const Box& support() const { return support_; }

 private:
  DriftSpec drift_;
  SimConfig cfg_;
  InitialLaw law_;
  Box region_;
  Box support_;
  std::vector<FiniteVolumeSolver> solver_;  // exactly one; vector avoids a default constructor
  PathConfig template_;
};

/// Applies fn to replicas 0..R-1 without retaining them; results in replica order.
template <class T, class Fn>
std::vector<T> map_replicas(const PnSampler& sampler, std::size_t replicas, int threads, Fn&& fn) {
  return parallel_map<T>(replicas, threads, [&](std::size_t r) { return fn(sampler.replica(r)); });
}

struct Ensemble {
  SimConfig config;
  std::string drift;
  std::string initial_law;
  std::vector<Replica> replicas;

  const Box& region() const { return replicas.front().region; }
};

inline Ensemble sample_Pn(const DriftSpec& b, const SimConfig& cfg, const InitialLaw& mu, int threads = 0) {
  PnSampler sampler(b, cfg, mu);
  Ensemble e{cfg, b.description(), mu.name(), {}};
  e.replicas = map_replicas<Replica>(sampler, cfg.replicas, threads, [](Replica r) { return r; });
  return e;
}

// ---------------------------------------------------------------------------
// Local test functions and shift averaging.

/// g(omega) depending only on omega restricted to `support` (offsets from the origin).
struct LocalFunction {
  std::string name;
  Box support;
  std::function<double(const ShiftedView&)> fn;

  double operator()(const ShiftedView& v) const { return fn(v); }
};

inline LocalFunction local_constant(int dim, double c) {
  return {"const", Box({Site::origin(dim)}), [c](const ShiftedView&) { return c; }};
}
inline LocalFunction local_value(const Site& s, double t) {
  return {"X" + s.to_string() + "(" + detail::fmt_double(t) + ")", Box({s}),
          [s, t](const ShiftedView& v) { return v.value_at_time(s, t); }};
}
inline LocalFunction local_value_capped(const Site& s, double t, double cap) {
  return {"min(X" + s.to_string() + "(" + detail::fmt_double(t) + ")," + detail::fmt_double(cap) + ")", Box({s}),
          [s, t, cap](const ShiftedView& v) { return std::min(v.value_at_time(s, t), cap); }};
}
inline LocalFunction local_square(const Site& s, double t) {
  return {"X" + s.to_string() + "(" + detail::fmt_double(t) + ")^2", Box({s}), [s, t](const ShiftedView& v) {
            const double x = v.value_at_time(s, t);
            return x * x;
          }};
}
inline LocalFunction local_indicator_positive(const Site& s, double t) {
  return {"1{X" + s.to_string() + "(" + detail::fmt_double(t) + ")>0}", Box({s}),
          [s, t](const ShiftedView& v) { return v.value_at_time(s, t) > 0.0 ? 1.0 : 0.0; }};
}
inline LocalFunction local_product(LocalFunction a, LocalFunction b) {
  Box support = a.support.united(b.support);
  std::string name = a.name + "*" + b.name;
  return {std::move(name), std::move(support),
          [a = std::move(a), b = std::move(b)](const ShiftedView& v) { return a(v) * b(v); }};
}

/// Tiles the 3^d blocks Lambda_n + 2nk, k in {-1,0,1}^d: the centre block is
/// replica `centre`, the others are distinct independent replicas drawn by rng.
inline PathConfig periodized_neighborhood(const Ensemble& e, std::size_t centre, RngStream& rng) {
  const int d = e.config.d, n = e.config.n;
  const Box blocks = Box::centered(d, 1);
  if (e.replicas.size() < blocks.size()) {
    throw PreconditionError("periodization needs at least 3^d = " + std::to_string(blocks.size()) + " replicas");
  }
  if (centre >= e.replicas.size()) throw PreconditionError("replica index out of range");
  const Box& region = e.region();
  std::vector<std::size_t> chosen;
  chosen.reserve(blocks.size());
  std::vector<Site> all;
  for (const auto& k : blocks) {
    std::size_t pick = centre;
    if (!k.is_origin()) {
      do {
        pick = static_cast<std::size_t>(rng.below(e.replicas.size()));
      } while (pick == centre || std::find(chosen.begin(), chosen.end(), pick) != chosen.end());
    }
    chosen.push_back(pick);
    for (const auto& s : region) all.push_back(s + k.scaled(2 * n));
  }
  PathConfig out(e.config.grid(), Box(std::move(all)));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Site shift = blocks[b].scaled(2 * n);
    const Replica& src = e.replicas[chosen[b]];
    for (const auto& s : region) {
      auto from = src.paths.path(s);
      std::copy(from.begin(), from.end(), out.path(s + shift).begin());
    }
  }
  return out;
}

/// MC estimate of (1/|Lambda_n|) sum_i E[g(theta_i X^per)]; the replica is the unit.
inline Estimate shift_average(const LocalFunction& g, const Ensemble& e, int threads = 0) {
  const int n = e.config.n;
  for (const auto& s : g.support) {
    if (s.sup_norm() > 2 * n) {
      throw PreconditionError("support of '" + g.name + "' exceeds one periodization layer (|offset| <= 2n)");
    }
  }
  const Box& region = e.region();
  auto values = parallel_map<double>(e.replicas.size(), threads, [&](std::size_t r) {
    RngStream rng = make_stream(e.config.seed, r, StreamTag::kPeriodize);
    const PathConfig per = periodized_neighborhood(e, r, rng);
    double s = 0.0;
    for (const auto& i : region) s += g(ShiftedView(per, i));
    return s / static_cast<double>(region.size());
  });
  return Estimate::from_samples(values);
}

}  // namespace pathgibbs

#endif  // PATHGIBBS_SIM_HPP
