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

#ifndef PATHGIBBS_GIBBS_HPP
#define PATHGIBBS_GIBBS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
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
#include "pathgibbs/sim.hpp"

namespace pathgibbs {

/// Per-site pieces of the Girsanov exponent:
///   ito = sum_k b_k (omega_i(t_{k+1}) - omega_i(t_k)),  square = h sum_k b_k^2.
struct SiteTerms {
  double ito = 0.0;
  double square = 0.0;
};

/// Evaluates the Hamiltonian
///   H_Lambda(omega) = -sum_{i in Lambda} (ito_i - square_i / 2)
/// for configurations on a fixed support.
class HamiltonianEvaluator {
 public:
  HamiltonianEvaluator(DriftSpec drift, Box sites, const Box& support)
      : drift_(std::move(drift)), sites_(std::move(sites)), table_(sites_, drift_.range(), support) {
    rows_.reserve(sites_.size());
    for (const auto& s : sites_) {
      auto idx = support.index_of(s);
      if (!idx) throw MissingSiteError("Hamiltonian site (" + s.to_string() + ") not covered");
      rows_.push_back(*idx);
    }
  }

  const Box& sites() const { return sites_; }

  SiteTerms site_terms(const PathConfig& omega, std::size_t p) const {
    const DriftWindow w(omega, sites_[p], table_.for_site(p));
    auto path = omega.row(rows_[p]);
    const int m = omega.grid().steps();
    SiteTerms t;
    for (int k = 0; k < m; ++k) {
      const double b = drift_(w, k);
      const auto kk = static_cast<std::size_t>(k);
      t.ito += b * (path[kk + 1] - path[kk]);
      t.square += b * b;
    }
    t.square *= omega.grid().step();
    if (!std::isfinite(t.ito) || !std::isfinite(t.square)) {
      throw NumericalError("non-finite Hamiltonian term at site (" + sites_[p].to_string() + ")");
    }
    return t;
  }

  double operator()(const PathConfig& omega) const {
    double h = 0.0;
    for (std::size_t p = 0; p < sites_.size(); ++p) {
      const SiteTerms t = site_terms(omega, p);
      h -= t.ito - 0.5 * t.square;
    }
    return h;
  }

 private:
  DriftSpec drift_;
  Box sites_;
  SlotTable table_;
  std::vector<std::size_t> rows_;
};

inline double hamiltonian(const DriftSpec& b, const Box& region, const PathConfig& omega) {
  return HamiltonianEvaluator(b, region, omega.support())(omega);
}

/// H_{Lambda^+} - H_Lambda, i.e. the Hamiltonian of the ring Lambda^+ \ Lambda.
inline double boundary_hamiltonian(const DriftSpec& b, const Box& region, const PathConfig& omega) {
  return hamiltonian(b, enlarge(region, b.range()).minus(region), omega);
}

/// Fills every row with a discretised Brownian path started from m = N(0, 1).
inline void fill_reference_paths(PathConfig& omega, RngStream& rng) {
  const double sqrt_h = std::sqrt(omega.grid().step());
  for (std::size_t r = 0; r < omega.rows(); ++r) {
    auto p = omega.row(r);
    p[0] = rng.normal();
    for (std::size_t k = 1; k < p.size(); ++k) p[k] = p[k - 1] + sqrt_h * rng.normal();
  }
}

/// MC estimate of E_W[exp(-H_Lambda)] with W the product of Brownian laws
/// started from m on the sites the drifts read.
inline Estimate girsanov_normalization(const DriftSpec& b, const Box& region, std::size_t samples, int steps,
                                       std::uint64_t seed, int threads = 0) {
  const Box support = region.united(footprint(region, b.range()));
  const HamiltonianEvaluator ham(b, region, support);
  const TimeGrid grid(steps);
  auto values = parallel_map<double>(samples, threads, [&](std::size_t r) {
    RngStream rng = make_stream(seed, r, StreamTag::kOuterBoundary);
    PathConfig omega(grid, support);
    fill_reference_paths(omega, rng);
    return std::exp(-ham(omega));
  });
  return Estimate::from_samples(values);
}

// ---------------------------------------------------------------------------
// Densities and entropies of P_n.

/// Per-replica quantities behind the entropy estimators, normalised per site.
struct EntropySample {
  double log_density = 0.0;       // (sum_i log f(X_i(0)) - H_{Lambda_n}) / |Lambda_n|
  double formula = 0.0;           // I(q;m) + (1/2|Lambda_n|) sum_i h sum_k b^2
  std::vector<double> square;     // h sum_k b^2 per region site
};

inline EntropySample entropy_sample(const HamiltonianEvaluator& ham, const Replica& x, const InitialLaw& mu) {
  const auto rel = mu.relative_entropy();
  if (!mu.has_density() || !rel) {
    throw PreconditionError("initial law '" + mu.name() + "' has no density with respect to the reference m");
  }
  EntropySample s;
  s.square.resize(ham.sites().size());
  double log_f = 0.0, h = 0.0, sq = 0.0;
  for (std::size_t p = 0; p < ham.sites().size(); ++p) {
    log_f += *mu.log_density(x.paths.value(ham.sites()[p], 0));
    const SiteTerms t = ham.site_terms(x.paths, p);
    h -= t.ito - 0.5 * t.square;
    sq += t.square;
    s.square[p] = t.square;
  }
  const auto sites = static_cast<double>(ham.sites().size());
  s.log_density = (log_f - h) / sites;
  s.formula = *rel + 0.5 * sq / sites;
  return s;
}

/// log dP_n / dW^{(x)Lambda_n}(X) = sum_i log f(X_i(0)) - H_{Lambda_n}(X_{Lambda_n} 0_{Lambda_n^c}).
inline double girsanov_log_density(const DriftSpec& b, const Replica& x, const InitialLaw& mu) {
  const HamiltonianEvaluator ham(b, x.region, x.paths.support());
  return entropy_sample(ham, x, mu).log_density * static_cast<double>(x.region.size());
}

inline std::vector<EntropySample> entropy_samples(const DriftSpec& b, const Ensemble& e, const InitialLaw& mu,
                                                  int threads = 0) {
  if (e.replicas.empty()) throw PreconditionError("empty ensemble");
  const HamiltonianEvaluator ham(b, e.region(), e.replicas.front().paths.support());
  return parallel_map<EntropySample>(e.replicas.size(), threads,
                                     [&](std::size_t r) { return entropy_sample(ham, e.replicas[r], mu); });
}

namespace detail {
inline Estimate estimate_of(std::span<const EntropySample> xs, double EntropySample::*field) {
  std::vector<double> v;
  v.reserve(xs.size());
  for (const auto& s : xs) v.push_back(s.*field);
  return Estimate::from_samples(v);
}
}  // namespace detail

/// MC mean of the Girsanov log-density per site.
inline Estimate entropy_per_site(const DriftSpec& b, const Ensemble& e, const InitialLaw& mu, int threads = 0) {
  const auto xs = entropy_samples(b, e, mu, threads);
  return detail::estimate_of(xs, &EntropySample::log_density);
}

/// I(q;m) + (1/2|Lambda_n|) sum_i MC[int b^2 dt]: the martingale term dropped.
inline Estimate entropy_per_site_formula(const DriftSpec& b, const Ensemble& e, const InitialLaw& mu,
                                         int threads = 0) {
  const auto xs = entropy_samples(b, e, mu, threads);
  return detail::estimate_of(xs, &EntropySample::formula);
}

struct EntropyRow {
  int n = 0;
  Estimate direct;
  Estimate formula;
  Estimate difference;  // paired, direct - formula
  double agreement_z = 0.0;
  double max_site_square = 0.0;  // max_i MC[int b^2 dt] at this n
};

struct EntropySweep {
  std::vector<EntropyRow> rows;
  double initial_entropy = 0.0;  // I(q; m) per site
  double drift_norm_sq = 0.0;    // max over n and sites of MC[int b^2 dt]
  double bound = 0.0;            // initial_entropy + drift_norm_sq / 2
  bool agreement = true;
  bool bounded = true;
  double z_threshold = 3.0;
};

inline EntropyRow entropy_row(int n, std::span<const EntropySample> xs) {
  EntropyRow row;
  row.n = n;
  row.direct = detail::estimate_of(xs, &EntropySample::log_density);
  row.formula = detail::estimate_of(xs, &EntropySample::formula);
  std::vector<double> a, b;
  for (const auto& s : xs) {
    a.push_back(s.log_density);
    b.push_back(s.formula);
  }
  row.difference = paired_difference(a, b);
  row.agreement_z = z_score(row.difference, 0.0);
  if (!xs.empty()) {
    for (std::size_t p = 0; p < xs.front().square.size(); ++p) {
      double m = 0.0;
      for (const auto& s : xs) m += s.square[p];
      row.max_site_square = std::max(row.max_site_square, m / static_cast<double>(xs.size()));
    }
  }
  return row;
}

inline void finish_entropy_sweep(EntropySweep& sweep, const InitialLaw& mu) {
  sweep.initial_entropy = mu.relative_entropy().value_or(std::numeric_limits<double>::infinity());
  sweep.drift_norm_sq = 0.0;
  for (const auto& r : sweep.rows) sweep.drift_norm_sq = std::max(sweep.drift_norm_sq, r.max_site_square);
  sweep.bound = sweep.initial_entropy + 0.5 * sweep.drift_norm_sq;
  sweep.agreement = sweep.bounded = true;
  for (const auto& r : sweep.rows) {
    if (!(std::abs(r.agreement_z) <= sweep.z_threshold)) sweep.agreement = false;
    if (!(r.direct.mean <= sweep.bound + sweep.z_threshold * r.direct.std_error)) sweep.bounded = false;
  }
}

/// Per-site entropy of P_n for each n, both estimators, and the bound
/// sup_n I(mu_n)/|Lambda_n| + ||b||^2_{inf,2} / 2 with the norm estimated on the sweep.
inline EntropySweep entropy_sweep(const DriftSpec& b, const SimConfig& base, std::span<const int> sizes,
                                  const InitialLaw& mu, int threads = 0, double z_threshold = 3.0) {
  EntropySweep sweep;
  sweep.z_threshold = z_threshold;
  for (int n : sizes) {
    SimConfig cfg = base;
    cfg.n = n;
    PnSampler sampler(b, cfg, mu);
    const HamiltonianEvaluator ham(b, sampler.region(), sampler.support());
    auto xs = map_replicas<EntropySample>(sampler, cfg.replicas, threads,
                                          [&](const Replica& x) { return entropy_sample(ham, x, mu); });
    sweep.rows.push_back(entropy_row(n, xs));
  }
  finish_entropy_sweep(sweep, mu);
  return sweep;
}

// ---------------------------------------------------------------------------
// Kernels Pi^0, Pi^H, Pi^{H,+}.

/// Self-normalised importance sample of Pi^{H,+}_Lambda(xi, .).
struct WeightedEnsemble {
  std::vector<PathConfig> replicas;
  std::vector<double> log_weights;
  std::vector<double> weights;  // normalised, sum to 1
  double ess = 0.0;             // (sum w)^2 / sum w^2

  double weighted_mean(const LocalFunction& g, const Site& origin) const {
    double s = 0.0;
    for (std::size_t j = 0; j < replicas.size(); ++j) s += weights[j] * g(ShiftedView(replicas[j], origin));
    return s;
  }
};

struct KernelResult {
  WeightedEnsemble ensemble;
  Estimate partition;  // Z_Lambda(xi)
  bool reliable = true;  // ESS >= ess_fraction * N
};

/// Samples Pi^{H,+}_Lambda(xi, .) by proposing from Pi^H_Lambda(xi, .) and
/// weighting with exp(-(H_{Lambda^+} - H_Lambda)).
///
/// Working configurations cover Lambda, every site read by drifts on
/// Lambda^+, and `extra` (sites some test function will look at).
class KernelSampler {
 public:
  KernelSampler(DriftSpec drift, Box region, const Box& extra = {})
      : drift_(std::move(drift)), region_(std::move(region)) {
    const Box plus = enlarge(region_, drift_.range());
    ring_ = plus.minus(region_);
    support_ = region_.united(plus).united(footprint(plus, drift_.range())).united(extra);
    solver_.emplace_back(drift_, region_, support_);
    boundary_.emplace_back(drift_, ring_, support_);
  }

  const Box& support() const { return support_; }
  const Box& ring() const { return ring_; }

  /// xi restricted to the working support; throws PreconditionError if not covered.
  PathConfig restrict(const PathConfig& xi) const {
    if (!support_.is_subset_of(xi.support())) {
      throw PreconditionError("boundary configuration does not cover Lambda^{++} and the test supports");
    }
    return xi.restricted(support_);
  }

  /// One draw from Pi^H_Lambda(xi, .) = P^{xi, Lambda}.
  PathConfig sample_h(const PathConfig& restricted_xi, RngStream& rng) const {
    return solver_.front().run(restricted_xi, rng).paths;
  }

  double log_weight(const PathConfig& omega) const {
    const double lw = -boundary_.front()(omega);
    if (!std::isfinite(lw)) throw NumericalError("non-finite importance weight");
    return lw;
  }

  KernelResult sample(const PathConfig& xi, std::size_t proposals, RngStream& rng, double ess_fraction = 0.1,
                      bool keep_paths = true) const {
    if (proposals < 1) throw PreconditionError("kernel needs at least one proposal");
    const PathConfig base = restrict(xi);
    KernelResult out;
    auto& we = out.ensemble;
    we.log_weights.reserve(proposals);
    if (keep_paths) we.replicas.reserve(proposals);
    for (std::size_t j = 0; j < proposals; ++j) {
      PathConfig omega = sample_h(base, rng);
      we.log_weights.push_back(log_weight(omega));
      if (keep_paths) we.replicas.push_back(std::move(omega));
    }
    finalize(out, ess_fraction);
    return out;
  }

  /// Weighted means of the tests under Pi^{H,+}_Lambda(xi, .) without keeping paths.
  std::vector<double> expectations(const PathConfig& xi, std::span<const LocalFunction> tests, std::size_t proposals,
                                   RngStream& rng, double ess_fraction, KernelResult& diag) const {
    const PathConfig base = restrict(xi);
    const Site origin = Site::origin(drift_.dim());
    std::vector<std::vector<double>> g(tests.size());
    diag = KernelResult{};
    for (std::size_t j = 0; j < proposals; ++j) {
      PathConfig omega = sample_h(base, rng);
      diag.ensemble.log_weights.push_back(log_weight(omega));
      for (std::size_t t = 0; t < tests.size(); ++t) g[t].push_back(tests[t](ShiftedView(omega, origin)));
    }
    finalize(diag, ess_fraction);
    std::vector<double> out(tests.size(), 0.0);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      for (std::size_t j = 0; j < proposals; ++j) out[t] += diag.ensemble.weights[j] * g[t][j];
    }
    return out;
  }

 private:
  static void finalize(KernelResult& out, double ess_fraction) {
    auto& we = out.ensemble;
    const double shift = *std::max_element(we.log_weights.begin(), we.log_weights.end());
    std::vector<double> raw(we.log_weights.size());
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t j = 0; j < raw.size(); ++j) {
      raw[j] = std::exp(we.log_weights[j] - shift);
      sum += raw[j];
      sum_sq += raw[j] * raw[j];
    }
    we.weights.resize(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) we.weights[j] = raw[j] / sum;
    we.ess = sum * sum / sum_sq;
    const double scale = std::exp(shift);
    if (!std::isfinite(scale)) throw NumericalError("partition function overflow");
    Estimate z = Estimate::from_samples(raw);
    out.partition = Estimate{z.mean * scale, z.std_error * scale, z.n_samples};
    out.reliable = we.ess >= ess_fraction * static_cast<double>(raw.size());
  }

  DriftSpec drift_;
  Box region_;
  Box ring_;
  Box support_;
  std::vector<FiniteVolumeSolver> solver_;
  std::vector<HamiltonianEvaluator> boundary_;
};

/// One draw from Pi^H_Lambda(xi, .).
inline PathConfig sample_kernel_h(const DriftSpec& b, const Box& region, const PathConfig& xi, RngStream& rng) {
  const KernelSampler k(b, region);
  return k.sample_h(k.restrict(xi), rng);
}

inline KernelResult kernel_hplus(const DriftSpec& b, const Box& region, const PathConfig& xi, std::size_t proposals,
                                 RngStream& rng, double ess_fraction = 0.1) {
  return KernelSampler(b, region).sample(xi, proposals, rng, ess_fraction);
}

/// Nested MC of E_W[Z_Lambda(xi)] with xi Brownian from m on the kernel support.
inline Estimate partition_mean_under_reference(const DriftSpec& b, const Box& region, std::size_t outer,
                                               std::size_t inner, int steps, std::uint64_t seed, int threads = 0) {
  const KernelSampler kernel(b, region);
  const TimeGrid grid(steps);
  auto values = parallel_map<double>(outer, threads, [&](std::size_t r) {
    RngStream xi_rng = make_stream(seed, r, StreamTag::kOuterBoundary);
    PathConfig xi(grid, kernel.support());
    fill_reference_paths(xi, xi_rng);
    RngStream rng = make_stream(seed, r, StreamTag::kKernel);
    return kernel.sample(xi, inner, rng, 0.0, false).partition.mean;
  });
  return Estimate::from_samples(values);
}

// ---------------------------------------------------------------------------
// DLR consistency.

struct DlrBudget {
  std::size_t outer = 5000;
  std::size_t inner = 200;
  double z_threshold = 3.0;
  double ess_fraction = 0.1;
  double max_ess_failure_rate = 0.05;
};

struct DlrTestResult {
  std::string name;
  Estimate left;        // E_{P_n}[g]
  Estimate right;       // E_{P_n}[Pi^{H,+}_Lambda g]
  Estimate difference;  // paired over outer replicas
  double z = 0.0;
  bool pass = true;
};

struct DlrReport {
  std::vector<DlrTestResult> tests;
  std::size_t outer = 0;
  std::size_t inner = 0;
  std::size_t ess_failures = 0;
  double ess_failure_rate = 0.0;
  double ess_min = 0.0;
  double ess_mean = 0.0;
  double z_threshold = 3.0;
  bool pass = true;
};

/// Checks  E_{P_n}[g] = E_{P_n}[ Pi^{H,+}_Lambda(xi, g) ]  for each test g.
///
/// Requires Lambda^{++} within Lambda_n and every test support within Lambda_n.
/// Each outer replica xi ~ P_n gives the pair (g(xi), weighted kernel mean);
/// the z-score is that of the paired difference.
inline DlrReport dlr_check(const DriftSpec& b, const SimConfig& cfg, const Box& region, const InitialLaw& mu,
                           std::span<const LocalFunction> tests, const DlrBudget& budget, int threads = 0) {
  cfg.validate();
  const Box box = cfg.box();
  const Box plus2 = enlarge(enlarge(region, b.range()), b.range());
  if (region.empty() || !plus2.is_subset_of(box)) {
    throw PreconditionError("DLR check requires Lambda^{++} inside Lambda_n");
  }
  Box extra;
  for (const auto& g : tests) {
    if (!g.support.is_subset_of(box)) throw PreconditionError("support of test '" + g.name + "' leaves Lambda_n");
    extra = extra.united(g.support);
  }
  if (budget.outer < 2 || budget.inner < 1) throw PreconditionError("DLR budget too small");

  PnSampler sampler(b, cfg, mu);
  const KernelSampler kernel(b, region, extra);
  const Site origin = Site::origin(cfg.d);

  struct Outer {
    std::vector<double> left, right;
    double ess = 0.0;
    bool reliable = true;
  };
  auto outs = parallel_map<Outer>(budget.outer, threads, [&](std::size_t r) {
    const Replica xi = sampler.replica(r);
    Outer o;
    for (const auto& g : tests) o.left.push_back(g(ShiftedView(xi.paths, origin)));
    RngStream rng = make_stream(cfg.seed, r, StreamTag::kKernel);
    KernelResult diag;
    o.right = kernel.expectations(xi.paths, tests, budget.inner, rng, budget.ess_fraction, diag);
    o.ess = diag.ensemble.ess;
    o.reliable = diag.reliable;
    return o;
  });

  DlrReport rep;
  rep.outer = budget.outer;
  rep.inner = budget.inner;
  rep.z_threshold = budget.z_threshold;
  rep.ess_min = std::numeric_limits<double>::infinity();
  for (const auto& o : outs) {
    rep.ess_failures += o.reliable ? 0 : 1;
    rep.ess_min = std::min(rep.ess_min, o.ess);
    rep.ess_mean += o.ess / static_cast<double>(outs.size());
  }
  rep.ess_failure_rate = static_cast<double>(rep.ess_failures) / static_cast<double>(outs.size());
  rep.pass = rep.ess_failure_rate < budget.max_ess_failure_rate;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    std::vector<double> l, rr;
    for (const auto& o : outs) {
      l.push_back(o.left[t]);
      rr.push_back(o.right[t]);
    }
    DlrTestResult res;
    res.name = tests[t].name;
    res.left = Estimate::from_samples(l);
    res.right = Estimate::from_samples(rr);
    res.difference = paired_difference(l, rr);
    res.z = z_value(res.difference.mean, res.difference.std_error, 1e-12 * (1.0 + std::abs(res.left.mean)));
    res.pass = std::abs(res.z) <= budget.z_threshold;
    rep.pass = rep.pass && res.pass;
    rep.tests.push_back(std::move(res));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Free energy.

/// Sites i of Lambda_n with i + [-diam, diam]^d inside Lambda_n, diam the diameter of Delta.
inline Box interior_sites(const Box& region, int diameter) {
  std::vector<Site> out;
  for (const auto& i : region) {
    if (Box::centered(i.dim(), diameter).translated(i).is_subset_of(region)) out.push_back(i);
  }
  return Box(std::move(out));
}

struct FreeEnergySample {
  double mismatch = 0.0;    // (1/2) h sum_k (beta - b)^2
  double definition = 0.0;  // (1/2) h sum beta^2 - (ito_b - (1/2) h sum b^2)
};

/// Per-replica free-energy terms for an ensemble simulated under `beta`,
/// averaged over the interior sites (margin = the larger diameter of the two ranges).
class FreeEnergyEvaluator {
 public:
  FreeEnergyEvaluator(DriftSpec b, DriftSpec beta, const Box& region, const Box& support)
      : b_(std::move(b)), beta_(std::move(beta)) {
    const int margin = std::max(b_.range().diameter(), beta_.range().diameter());
    interior_ = interior_sites(region, margin);
    if (interior_.empty()) throw PreconditionError("no interior sites: box too small for the interaction range");
    table_b_ = SlotTable(interior_, b_.range(), support);
    table_beta_ = SlotTable(interior_, beta_.range(), support);
  }

  const Box& interior() const { return interior_; }

  FreeEnergySample operator()(const PathConfig& x) const {
    const int m = x.grid().steps();
    const double h = x.grid().step();
    FreeEnergySample s;
    for (std::size_t p = 0; p < interior_.size(); ++p) {
      const DriftWindow wb(x, interior_[p], table_b_.for_site(p));
      const DriftWindow wbeta(x, interior_[p], table_beta_.for_site(p));
      auto path = x.path(interior_[p]);
      double mis = 0.0, beta_sq = 0.0, b_sq = 0.0, ito = 0.0;
      for (int k = 0; k < m; ++k) {
        const double bv = b_(wb, k), betav = beta_(wbeta, k);
        const auto kk = static_cast<std::size_t>(k);
        mis += (betav - bv) * (betav - bv);
        beta_sq += betav * betav;
        b_sq += bv * bv;
        ito += bv * (path[kk + 1] - path[kk]);
      }
      s.mismatch += 0.5 * h * mis;
      s.definition += 0.5 * h * beta_sq - (ito - 0.5 * h * b_sq);
    }
    const auto cnt = static_cast<double>(interior_.size());
    s.mismatch /= cnt;
    s.definition /= cnt;
    if (!std::isfinite(s.mismatch) || !std::isfinite(s.definition)) throw NumericalError("non-finite free energy");
    return s;
  }

 private:
  DriftSpec b_, beta_;
  Box interior_;
  SlotTable table_b_, table_beta_;
};

struct FreeEnergyReport {
  Estimate mismatch;
  Estimate definition;
  Estimate difference;  // paired, definition - mismatch
  double agreement_z = 0.0;
  std::size_t interior_sites = 0;
};

inline FreeEnergyReport free_energy_report(std::span<const FreeEnergySample> xs, std::size_t interior) {
  std::vector<double> a, d;
  for (const auto& s : xs) {
    a.push_back(s.mismatch);
    d.push_back(s.definition);
  }
  FreeEnergyReport rep;
  rep.mismatch = Estimate::from_samples(a);
  rep.definition = Estimate::from_samples(d);
  rep.difference = paired_difference(d, a);
  rep.agreement_z = z_score(rep.difference, 0.0);
  rep.interior_sites = interior;
  return rep;
}

namespace detail {
inline std::vector<FreeEnergySample> free_energy_samples(const DriftSpec& b, const DriftSpec& beta, const Ensemble& e,
                                                         int threads) {
  if (e.replicas.empty()) throw PreconditionError("empty ensemble");
  const FreeEnergyEvaluator ev(b, beta, e.region(), e.replicas.front().paths.support());
  return parallel_map<FreeEnergySample>(e.replicas.size(), threads,
                                        [&](std::size_t r) { return ev(e.replicas[r].paths); });
}
}  // namespace detail

/// (1/2) E int (beta - b)^2 dt per interior site, for e simulated under beta.
inline Estimate free_energy_mismatch(const DriftSpec& b, const DriftSpec& beta, const Ensemble& e, int threads = 0) {
  const auto xs = detail::free_energy_samples(b, beta, e, threads);
  std::vector<double> v;
  for (const auto& s : xs) v.push_back(s.mismatch);
  return Estimate::from_samples(v);
}

/// Entropy minus initial entropy minus energy, per interior site. With a
/// product initial law the entropy of the simulated law is taken as
/// I(q;m) + (1/2) E int beta^2 dt, so the I(q;m) terms cancel.
inline Estimate free_energy_definition(const DriftSpec& b, const DriftSpec& beta, const Ensemble& e,
                                       int threads = 0) {
  const auto xs = detail::free_energy_samples(b, beta, e, threads);
  std::vector<double> v;
  for (const auto& s : xs) v.push_back(s.definition);
  return Estimate::from_samples(v);
}

/// Simulates P_n under beta and evaluates both free-energy estimators for b.
inline FreeEnergyReport free_energy_run(const DriftSpec& b, const DriftSpec& beta, const SimConfig& cfg,
                                        const InitialLaw& mu, int threads = 0) {
  PnSampler sampler(beta, cfg, mu);
  const FreeEnergyEvaluator ev(b, beta, sampler.region(), sampler.support());
  auto xs = map_replicas<FreeEnergySample>(sampler, cfg.replicas, threads,
                                           [&](const Replica& x) { return ev(x.paths); });
  return free_energy_report(xs, ev.interior().size());
}

// ---------------------------------------------------------------------------
// Weighted l2 moment bound.

struct MomentRow {
  int n = 0;
  double sum_gamma = 0.0;  // sum of gamma over Lambda_n
  double bracket = 0.0;    // 1 + E_mu ||X_Lambda(0)||^2_gamma + ||xi^*_{outside}(1)||^2_gamma
  Estimate moment;         // E ||X^*(1)||^2_gamma over the simulated support
  Estimate ratio;          // moment / bracket
  Estimate per_gamma;      // moment / sum_gamma (diagnostic)
  std::optional<EntropyRow> entropy;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  double slope = 0.0;
  double slope_se = 0.0;
  double slope_z = 0.0;
  double max_over_min = 0.0;
  double ratio_tolerance = 10.0;
  double z_threshold = 3.0;
  bool bounded = true;   // max/min ratio within tolerance
  bool no_trend = true;  // |slope z| <= threshold
  std::optional<EntropySweep> entropy;
  bool pass = true;
};

/// Weighted least squares of y on x with weights 1/se^2: (slope, se(slope)).
inline std::pair<double, double> weighted_slope(std::span<const double> x, std::span<const double> y,
                                                std::span<const double> se) {
  if (x.size() < 2) throw PreconditionError("slope needs at least two points");
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = 1.0 / std::max(se[i] * se[i], 1e-300);
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  return {sxy / sxx, std::sqrt(1.0 / sxx)};
}

/// For each n: E ||X^*(1)||^2_gamma under P_n with frozen outside field xi,
/// the bracket of the moment bound, and their ratio; then a trend test of
/// the ratio in n. When mu has a density the per-site entropy sweep is
/// computed from the same replicas.
inline MomentReport moment_bound_report(const DriftSpec& b, const SimConfig& base, std::span<const int> sizes,
                                        const FrozenField& xi, const InitialLaw& mu, int threads = 0,
                                        double ratio_tolerance = 10.0, double z_threshold = 3.0) {
  MomentReport rep;
  rep.ratio_tolerance = ratio_tolerance;
  rep.z_threshold = z_threshold;
  const bool with_entropy = mu.has_density();
  EntropySweep sweep;
  sweep.z_threshold = z_threshold;
  struct Sample {
    double moment = 0.0;
    EntropySample entropy;
  };
  for (int n : sizes) {
    SimConfig cfg = base;
    cfg.n = n;
    cfg.boundary = BoundaryKind::kFrozen;
    cfg.frozen = xi;
    cfg.seed = base.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(n);
    PnSampler sampler(b, cfg, mu);
    const Box& support = sampler.support();
    const Box outside = support.minus(sampler.region());
    std::vector<double> gam(support.size());
    for (std::size_t r = 0; r < support.size(); ++r) gam[r] = gamma(support[r]);
    const HamiltonianEvaluator ham(b, sampler.region(), support);
    const int m = cfg.steps;
    auto xs = map_replicas<Sample>(sampler, cfg.replicas, threads, [&](const Replica& x) {
      Sample s;
      for (std::size_t r = 0; r < support.size(); ++r) {
        const double star = running_max(x.paths.row(r), m);
        s.moment += gam[r] * star * star;
      }
      if (with_entropy) s.entropy = entropy_sample(ham, x, mu);
      return s;
    });
    MomentRow row;
    row.n = n;
    row.sum_gamma = gamma_mass(sampler.region());
    double outside_norm = 0.0;
    {
      PathConfig frozen(cfg.grid(), outside);
      xi.fill(frozen, outside);
      outside_norm = weighted_sq_norm(frozen.running_max_at(m));
    }
    row.bracket = 1.0 + mu.second_moment() * row.sum_gamma + outside_norm;
    std::vector<double> mom, rat, per;
    for (const auto& s : xs) {
      mom.push_back(s.moment);
      rat.push_back(s.moment / row.bracket);
      per.push_back(s.moment / row.sum_gamma);
    }
    row.moment = Estimate::from_samples(mom);
    row.ratio = Estimate::from_samples(rat);
    row.per_gamma = Estimate::from_samples(per);
    if (with_entropy) {
      std::vector<EntropySample> es;
      es.reserve(xs.size());
      for (auto& s : xs) es.push_back(std::move(s.entropy));
      row.entropy = entropy_row(n, es);
      sweep.rows.push_back(*row.entropy);
    }
    rep.rows.push_back(std::move(row));
  }
  std::vector<double> x, y, se;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rep.rows) {
    x.push_back(r.n);
    y.push_back(r.ratio.mean);
    se.push_back(r.ratio.std_error);
    lo = std::min(lo, r.ratio.mean);
    hi = std::max(hi, r.ratio.mean);
  }
  rep.max_over_min = hi / lo;
  rep.bounded = rep.max_over_min <= ratio_tolerance;
  if (rep.rows.size() >= 2) {
    auto [slope, slope_se] = weighted_slope(x, y, se);
    rep.slope = slope;
    rep.slope_se = slope_se;
    rep.slope_z = z_value(slope, slope_se);
    rep.no_trend = std::abs(rep.slope_z) <= z_threshold;
  }
  rep.pass = rep.bounded && rep.no_trend;
  if (with_entropy) {
    finish_entropy_sweep(sweep, mu);
    rep.entropy = sweep;
    rep.pass = rep.pass && sweep.bounded;
  }
  return rep;
}

}  // namespace pathgibbs

#endif  // PATHGIBBS_GIBBS_HPP
