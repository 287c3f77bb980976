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

#ifndef PATHGIBBS_DRIFT_HPP
#define PATHGIBBS_DRIFT_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathgibbs/errors.hpp"
#include "pathgibbs/lattice.hpp"
#include "pathgibbs/paths.hpp"
#include "pathgibbs/rng.hpp"

namespace pathgibbs {

/// theta_origin omega as seen by a drift: fast access to the Delta-window
/// through precomputed rows, and a checked lookup for any other offset.
class DriftWindow {
 public:
  DriftWindow(const PathConfig& config, Site origin, std::span<const std::size_t> slot_rows)
      : config_(&config), origin_(origin), rows_(slot_rows) {}

  /// omega_{origin + Delta[slot]}(t_k).
  double at(std::size_t slot, int k) const {
    return config_->row(rows_[slot])[static_cast<std::size_t>(k)];
  }
  std::span<const double> slot_path(std::size_t slot) const { return config_->row(rows_[slot]); }
  std::size_t slots() const { return rows_.size(); }

  /// Path at an arbitrary offset; throws MissingSiteError when not covered.
  std::span<const double> path(const Site& offset) const { return config_->path(origin_ + offset); }

  const TimeGrid& grid() const { return config_->grid(); }
  const Site& origin() const { return origin_; }

 private:
  const PathConfig* config_;
  Site origin_;
  std::span<const std::size_t> rows_;
};

/// Rows of origin + Delta for each site of `sites`, resolved in `support`.
///
/// `wrap`, when set, maps a site outside the support back into it (used by
/// the periodic boundary mode).
class SlotTable {
 public:
  SlotTable() = default;
  SlotTable(const Box& sites, const InteractionRange& range, const Box& support,
            const std::function<Site(const Site&)>& wrap = {})
      : slots_(range.size()) {
    rows_.reserve(sites.size() * slots_);
    for (const auto& i : sites) {
      for (const auto& j : range.offsets()) {
        Site s = i + j;
        auto idx = support.index_of(s);
        if (!idx && wrap) idx = support.index_of(wrap(s));
        if (!idx) {
          throw MissingSiteError("drift at site (" + i.to_string() + ") reads uncovered site (" +
                                 s.to_string() + ")");
        }
        rows_.push_back(*idx);
      }
    }
  }

  std::span<const std::size_t> for_site(std::size_t site_index) const {
    return {rows_.data() + site_index * slots_, slots_};
  }

 private:
  std::size_t slots_ = 0;
  std::vector<std::size_t> rows_;
};

using DriftFn = std::function<double(const DriftWindow&, int)>;

/// An adapted, Delta-local, sublinear drift functional b_{t_k}(omega).
///
/// The evaluator must be pure; it is shared read-only by all workers.
class DriftSpec {
 public:
  DriftSpec() = default;
  DriftSpec(std::string name, InteractionRange range, double growth_constant, DriftFn fn,
            std::string description = {})
      : name_(std::move(name)),
        description_(description.empty() ? name_ : std::move(description)),
        range_(std::move(range)),
        growth_constant_(growth_constant),
        fn_(std::move(fn)) {}

  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  const InteractionRange& range() const { return range_; }
  int dim() const { return range_.dim(); }
  /// Declared C in  b^2 <= C (1 + sum_{j in Delta} omega_j^*(t)^2).
  double growth_constant() const { return growth_constant_; }

  /// Unchecked evaluation for inner loops.
  double operator()(const DriftWindow& w, int k) const { return fn_(w, k); }

  double evaluate(const DriftWindow& w, int k) const {
    if (k < 0 || k > w.grid().steps()) throw PreconditionError("drift evaluated off the grid");
    const double v = fn_(w, k);
    if (!std::isfinite(v)) {
      throw NumericalError("drift '" + name_ + "' returned a non-finite value at site (" +
                           w.origin().to_string() + "), k=" + std::to_string(k));
    }
    return v;
  }

  /// b_{t_k}(theta_i omega).
  double evaluate(const PathConfig& omega, const Site& i, int k) const {
    SlotTable table(Box({i}), range_, omega.support());
    return evaluate(DriftWindow(omega, i, table.for_site(0)), k);
  }

  /// b_{t_k}(omega), i.e. the drift of the 0-coordinate.
  double evaluate(const PathConfig& omega, int k) const {
    return evaluate(omega, Site::origin(dim()), k);
  }

 private:
  std::string name_;
  std::string description_;
  InteractionRange range_;
  double growth_constant_ = 0.0;
  DriftFn fn_;
};

namespace detail {
inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace detail

inline DriftSpec zero_drift(int dim) {
  return DriftSpec("zero", InteractionRange::self(dim), 0.0, [](const DriftWindow&, int) { return 0.0; });
}

inline DriftSpec constant_drift(int dim, double c) {
  return DriftSpec("constant", InteractionRange::self(dim), c * c,
                   [c](const DriftWindow&, int) { return c; }, "constant{c=" + detail::fmt_double(c) + "}");
}

/// b_t(omega) = -kappa omega_0(t).
inline DriftSpec ou_drift(int dim, double kappa) {
  return DriftSpec("ou", InteractionRange::self(dim), kappa * kappa,
                   [kappa](const DriftWindow& w, int k) { return -kappa * w.at(0, k); },
                   "ou{kappa=" + detail::fmt_double(kappa) + "}");
}

/// One branch beta(x_Delta) of the barycentre drift, with its growth constant
/// beta(x)^2 <= growth (1 + max_j x_j^2).
struct Branch {
  std::function<double(std::span<const double> x, std::size_t origin_slot)> fn;
  double growth = 0.0;
};

/// beta(x) = constant + slope * x_0.
inline Branch affine_branch(double constant, double slope) {
  return Branch{[constant, slope](std::span<const double> x, std::size_t o) { return constant + slope * x[o]; },
                constant * constant + slope * slope};
}

/// b_t(omega) = b(omega(0 v (t - delay))) with
/// b(x) = beta+(x) if x_0 >= mean(x_Delta), beta-(x) otherwise.
///
/// The delayed time snaps to floor((t_k - delay) M) / M, clamped at 0.
inline DriftSpec barycentre_delay_drift(InteractionRange range, double delay, Branch plus, Branch minus,
                                        std::string description = "barycentre_delay") {
  if (!(delay > 0.0 && delay < 1.0)) throw PreconditionError("barycentre delay must lie in (0, 1)");
  const std::size_t origin = range.origin_slot();
  const double growth = std::max(plus.growth, minus.growth);
  auto fn = [delay, origin, plus = std::move(plus), minus = std::move(minus)](const DriftWindow& w, int k) {
    const int lag = static_cast<int>(std::ceil(delay * w.grid().steps() - 1e-9));
    const int kd = std::max(0, k - lag);
    const std::size_t n = w.slots();
    std::array<double, 256> small;
    std::vector<double> large;
    std::span<double> x;
    if (n <= small.size()) {
      x = std::span<double>(small.data(), n);
    } else {
      large.resize(n);
      x = large;
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      x[s] = w.at(s, kd);
      sum += x[s];
    }
    const double mean = sum / static_cast<double>(n);
    return x[origin] >= mean ? plus.fn(x, origin) : minus.fn(x, origin);
  };
  return DriftSpec("barycentre_delay", std::move(range), growth, std::move(fn), std::move(description));
}

inline DriftSpec barycentre_delay_drift(int dim, int radius, double delay, double plus_const, double plus_slope,
                                        double minus_const, double minus_slope) {
  std::string desc = "barycentre_delay{delta=" + std::to_string(radius) + ",delay=" + detail::fmt_double(delay) +
                     ",beta_plus=(" + detail::fmt_double(plus_const) + "," + detail::fmt_double(plus_slope) +
                     "),beta_minus=(" + detail::fmt_double(minus_const) + "," + detail::fmt_double(minus_slope) +
                     ")}";
  return barycentre_delay_drift(InteractionRange::centered(dim, radius), delay, affine_branch(plus_const, plus_slope),
                                affine_branch(minus_const, minus_slope), std::move(desc));
}

/// Integrand alpha(s, x_Delta) of a running-integral drift, with
/// alpha^2 <= growth (1 + sum_j x_j^2).
struct Integrand {
  std::function<double(double s, std::span<const double> x, std::size_t origin_slot)> fn;
  double growth = 0.0;
};

inline Integrand affine_integrand(double constant, double slope) {
  return Integrand{[constant, slope](double, std::span<const double> x, std::size_t o) { return constant + slope * x[o]; },
                   constant * constant + slope * slope};
}

/// b_{t_k}(omega) = h sum_{j<k} alpha(t_j, omega_Delta(t_j)); zero at k = 0.
inline DriftSpec running_integral_drift(InteractionRange range, Integrand alpha,
                                        std::string description = "running_integral") {
  const std::size_t origin = range.origin_slot();
  const double growth = alpha.growth;
  auto fn = [origin, alpha = std::move(alpha)](const DriftWindow& w, int k) {
    const std::size_t n = w.slots();
    std::vector<double> x(n);
    const double h = w.grid().step();
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
      for (std::size_t s = 0; s < n; ++s) x[s] = w.at(s, j);
      acc += alpha.fn(w.grid().time(j), x, origin);
    }
    return acc * h;
  };
  return DriftSpec("running_integral", std::move(range), growth, std::move(fn), std::move(description));
}

inline DriftSpec running_integral_drift(int dim, double constant, double slope) {
  return running_integral_drift(InteractionRange::self(dim), affine_integrand(constant, slope),
                                "running_integral{alpha=(" + detail::fmt_double(constant) + "," +
                                    detail::fmt_double(slope) + ")}");
}

/// b + c; (b + c)^2 <= 2 b^2 + 2 c^2 gives the declared constant.
inline DriftSpec offset_drift(const DriftSpec& base, double c) {
  return DriftSpec(base.name() + "+offset", base.range(), 2.0 * base.growth_constant() + 2.0 * c * c,
                   [base, c](const DriftWindow& w, int k) { return base(w, k) + c; },
                   base.description() + "+" + detail::fmt_double(c));
}

/// Negative control: declares Delta = {0} but reads the site at `offset`.
inline DriftSpec nonlocal_probe_drift(Site offset) {
  return DriftSpec("nonlocal_probe", InteractionRange::self(offset.dim()), 1.0,
                   [offset](const DriftWindow& w, int k) {
                     return std::tanh(w.path(offset)[static_cast<std::size_t>(k)]);
                   });
}

/// Negative control: reads omega_0(1) at every time.
inline DriftSpec anticipating_probe_drift(int dim) {
  return DriftSpec("anticipating_probe", InteractionRange::self(dim), 1.0, [](const DriftWindow& w, int) {
    return std::tanh(w.at(0, w.grid().steps()));
  });
}

// ---------------------------------------------------------------------------
// Randomised structural checks.

struct VerifierOptions {
  std::size_t trials = 10000;
  int steps = 64;
  std::uint64_t seed = 20260101;
  /// Extra layers of sites beyond the interaction range in random configurations.
  int margin = 2;
};

struct VerifierReport {
  std::string check;
  bool pass = true;
  std::size_t trials = 0;
  std::string counterexample;  // empty on pass
  double empirical_constant = 0.0;
  double declared_constant = 0.0;
};

namespace detail {

/// Random-scale Gaussian random-walk paths on every site of the support.
inline void fill_random_paths(PathConfig& omega, RngStream& rng) {
  const double sqrt_h = std::sqrt(omega.grid().step());
  for (std::size_t r = 0; r < omega.rows(); ++r) {
    const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    auto p = omega.row(r);
    p[0] = scale * rng.normal();
    for (std::size_t k = 1; k < p.size(); ++k) p[k] = p[k - 1] + scale * sqrt_h * rng.normal();
  }
}

inline bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

inline Box verifier_support(const DriftSpec& b, const VerifierOptions& opt) {
  return Box::centered(b.dim(), b.range().radius() + opt.margin);
}

}  // namespace detail

/// Perturbs every site outside Delta and expects a bit-identical drift.
inline VerifierReport verify_local(const DriftSpec& b, const VerifierOptions& opt = {}) {
  VerifierReport rep{"local", true, 0, {}, 0.0, b.growth_constant()};
  const TimeGrid grid(opt.steps);
  const Box support = detail::verifier_support(b, opt);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    RngStream rng = make_stream(opt.seed, t, StreamTag::kVerifier);
    PathConfig omega(grid, support);
    detail::fill_random_paths(omega, rng);
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.steps()) + 1));
    const double v1 = b.evaluate(omega, k);
    PathConfig perturbed = omega;
    for (std::size_t r = 0; r < perturbed.rows(); ++r) {
      if (b.range().offsets().contains(support[r])) continue;
      for (double& v : perturbed.row(r)) v += 1.0 + 10.0 * rng.normal();
    }
    const double v2 = b.evaluate(perturbed, k);
    ++rep.trials;
    if (!detail::same_bits(v1, v2)) {
      rep.pass = false;
      rep.counterexample = "trial " + std::to_string(t) + ", k=" + std::to_string(k) + ": drift " +
                           detail::fmt_double(v1) + " changed to " + detail::fmt_double(v2) +
                           " after perturbing sites outside the interaction range";
      break;
    }
  }
  return rep;
}

/// Perturbs every path strictly after t_k and expects a bit-identical drift at k.
inline VerifierReport verify_adapted(const DriftSpec& b, const VerifierOptions& opt = {}) {
  VerifierReport rep{"adapted", true, 0, {}, 0.0, b.growth_constant()};
  const TimeGrid grid(opt.steps);
  const Box support = detail::verifier_support(b, opt);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    RngStream rng = make_stream(opt.seed ^ 0xada97edULL, t, StreamTag::kVerifier);
    PathConfig omega(grid, support);
    detail::fill_random_paths(omega, rng);
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.steps())));
    const double v1 = b.evaluate(omega, k);
    PathConfig perturbed = omega;
    for (std::size_t r = 0; r < perturbed.rows(); ++r) {
      auto p = perturbed.row(r);
      for (std::size_t l = static_cast<std::size_t>(k) + 1; l < p.size(); ++l) p[l] += 1.0 + 10.0 * rng.normal();
    }
    const double v2 = b.evaluate(perturbed, k);
    ++rep.trials;
    if (!detail::same_bits(v1, v2)) {
      rep.pass = false;
      rep.counterexample = "trial " + std::to_string(t) + ", k=" + std::to_string(k) + ": drift " +
                           detail::fmt_double(v1) + " changed to " + detail::fmt_double(v2) +
                           " after perturbing path values later than t_k";
      break;
    }
  }
  return rep;
}

/// C_hat = max b^2 / (1 + sum_{j in Delta} omega_j^*(t_k)^2) over random trials.
inline VerifierReport verify_sublinear(const DriftSpec& b, const VerifierOptions& opt = {}) {
  VerifierReport rep{"sublinear", true, 0, {}, 0.0, b.growth_constant()};
  const TimeGrid grid(opt.steps);
  const Box support = detail::verifier_support(b, opt);
  const Site o = Site::origin(b.dim());
  std::string worst;
  for (std::size_t t = 0; t < opt.trials; ++t) {
    RngStream rng = make_stream(opt.seed ^ 0x5b11ea7ULL, t, StreamTag::kVerifier);
    PathConfig omega(grid, support);
    detail::fill_random_paths(omega, rng);
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.steps()) + 1));
    const double v = b.evaluate(omega, k);
    double denom = 1.0;
    for (const auto& j : b.range().offsets()) {
      const double m = running_max(omega.path(o + j), k);
      denom += m * m;
    }
    const double ratio = v * v / denom;
    ++rep.trials;
    if (ratio > rep.empirical_constant) {
      rep.empirical_constant = ratio;
      worst = "trial " + std::to_string(t) + ", k=" + std::to_string(k) + ": b^2/(1+sum max^2) = " +
              detail::fmt_double(ratio);
    }
  }
  rep.pass = rep.empirical_constant <= b.growth_constant() * (1.0 + 1e-12);
  if (!rep.pass) rep.counterexample = worst + " exceeds declared C = " + detail::fmt_double(b.growth_constant());
  return rep;
}

}  // namespace pathgibbs

#endif  // PATHGIBBS_DRIFT_HPP
