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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pathgibbs/gibbs.hpp"

namespace pathgibbs {
namespace {

DriftSpec barycentre() { return barycentre_delay_drift(1, 1, 0.25, 1.0, 0.0, -1.0, 0.0); }

SimConfig config(int n, int steps, std::size_t replicas, std::uint64_t seed = 21) {
  SimConfig c;
  c.n = n;
  c.steps = steps;
  c.replicas = replicas;
  c.seed = seed;
  return c;
}

PathConfig random_config(const Box& support, int steps, std::uint64_t seed) {
  PathConfig c(TimeGrid(steps), support);
  RngStream rng(seed, 0);
  fill_reference_paths(c, rng);
  return c;
}

TEST(Hamiltonian, ClosedForms) {
  PathConfig w(TimeGrid(10), Box::centered(1, 1));
  for (int k = 0; k <= 10; ++k) w.path(Site({0}))[k] = 0.3 + k / 10.0;  // increment 1
  EXPECT_EQ(hamiltonian(zero_drift(1), Box({Site({0})}), w), 0.0);
  EXPECT_NEAR(hamiltonian(constant_drift(1, 1.0), Box({Site({0})}), w), -0.5, 1e-12);
  EXPECT_NEAR(hamiltonian(constant_drift(1, 0.6), Box({Site({0})}), w), -(0.6 - 0.18), 1e-12);
  EXPECT_THROW(hamiltonian(barycentre(), Box({Site({1})}), w), MissingSiteError);
}

TEST(Hamiltonian, AdditiveOverTheBoundaryRing) {
  const DriftSpec b = barycentre_delay_drift(1, 1, 0.2, 0.5, 0.4, -1.0, 0.1);
  const Box region({Site({-1}), Site({0})});
  const Box plus = enlarge(region, b.range());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PathConfig w = random_config(Box::centered(1, 4), 30, seed);
    const double lhs = hamiltonian(b, plus, w);
    const double rhs = hamiltonian(b, region, w) + boundary_hamiltonian(b, region, w);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(GirsanovDensity, ClosedForms) {
  const Ensemble z = sample_Pn(zero_drift(1), config(2, 20, 10), InitialLaw::reference(), 1);
  for (const auto& r : z.replicas) EXPECT_EQ(girsanov_log_density(zero_drift(1), r, InitialLaw::reference()), 0.0);

  const double c = 0.7;
  const Ensemble e = sample_Pn(constant_drift(1, c), config(2, 20, 10), InitialLaw::reference(), 1);
  for (const auto& r : e.replicas) {
    double expect = 0.0;
    for (const auto& i : r.region) expect += c * (r.paths.value(i, 20) - r.paths.value(i, 0)) - c * c / 2.0;
    EXPECT_NEAR(girsanov_log_density(constant_drift(1, c), r, InitialLaw::reference()), expect, 1e-12);
  }
  EXPECT_THROW(girsanov_log_density(constant_drift(1, c), e.replicas[0], Dirac{0.0}), PreconditionError);
}

TEST(Entropy, ClosedForms) {
  const Ensemble zm = sample_Pn(zero_drift(1), config(2, 20, 4000), InitialLaw::reference(), 1);
  EXPECT_EQ(entropy_per_site(zero_drift(1), zm, InitialLaw::reference(), 1).mean, 0.0);
  EXPECT_EQ(entropy_per_site_formula(zero_drift(1), zm, InitialLaw::reference(), 1).mean, 0.0);

  const InitialLaw shifted = GaussianProduct{1.0, 1.0};
  const Ensemble zs = sample_Pn(zero_drift(1), config(2, 20, 4000), shifted, 1);
  const Estimate es = entropy_per_site(zero_drift(1), zs, shifted, 1);
  EXPECT_NEAR(es.mean, 0.5, 3.0 * es.std_error);

  const double c = 0.7;
  const Ensemble ce = sample_Pn(constant_drift(1, c), config(2, 40, 4000), InitialLaw::reference(), 1);
  const Estimate direct = entropy_per_site(constant_drift(1, c), ce, InitialLaw::reference(), 1);
  const Estimate formula = entropy_per_site_formula(constant_drift(1, c), ce, InitialLaw::reference(), 1);
  EXPECT_NEAR(direct.mean, 0.245, 3.0 * direct.std_error);
  EXPECT_NEAR(formula.mean, 0.245, 1e-12);
  EXPECT_NEAR(formula.std_error, 0.0, 1e-12);
}

TEST(Entropy, EstimatorsAgreeOnInteractingDrift) {
  const DriftSpec b = barycentre_delay_drift(1, 1, 0.25, 0.5, 0.5, -0.5, -0.3);
  const InitialLaw mu = GaussianProduct{0.2, 0.8};
  const Ensemble e = sample_Pn(b, config(3, 40, 3000), mu, 1);
  const auto xs = entropy_samples(b, e, mu, 1);
  const EntropyRow row = entropy_row(3, xs);
  EXPECT_LE(std::abs(row.agreement_z), 3.0);
  EXPECT_GE(row.direct.mean, -3.0 * row.direct.std_error);
}

TEST(Entropy, SweepIsBounded) {
  const std::vector<int> sizes{1, 2, 3};
  const EntropySweep s = entropy_sweep(barycentre(), config(1, 40, 1500), sizes, InitialLaw::reference(), 1);
  EXPECT_TRUE(s.agreement);
  EXPECT_TRUE(s.bounded);
  EXPECT_NEAR(s.bound, 0.5, 1e-12);  // I(m;m) = 0 and b^2 = 1
}

TEST(GirsanovNormalization, ExponentialMartingaleHasUnitMean) {
  for (const auto& b : {zero_drift(1), constant_drift(1, 0.5), ou_drift(1, 1.0), barycentre(),
                        running_integral_drift(1, 0.0, -1.0)}) {
    for (const Box& region : {Box({Site({0})}), Box::centered(1, 1)}) {
      const Estimate e = girsanov_normalization(b, region, 20000, 50, 3, 1);
      EXPECT_LE(std::abs(z_score(e, 1.0)), 3.5) << b.description() << " mean " << e.mean << " se " << e.std_error;
    }
  }
}

TEST(Kernel, ZeroDriftHasUnitWeights) {
  const PathConfig xi = random_config(Box::centered(1, 3), 20, 4);
  RngStream rng(1, 2);
  const KernelResult k = kernel_hplus(zero_drift(1), Box({Site({0})}), xi, 50, rng);
  for (double lw : k.ensemble.log_weights) EXPECT_EQ(lw, 0.0);
  EXPECT_EQ(k.partition.mean, 1.0);
  EXPECT_EQ(k.partition.std_error, 0.0);
  EXPECT_DOUBLE_EQ(k.ensemble.ess, 50.0);
  EXPECT_TRUE(k.reliable);
}

TEST(Kernel, NoInteractionMeansConstantWeights) {
  const PathConfig xi = random_config(Box::centered(1, 3), 20, 5);
  RngStream rng(1, 3);
  const KernelResult k = kernel_hplus(ou_drift(1, 1.0), Box({Site({0}), Site({1})}), xi, 40, rng);
  for (double lw : k.ensemble.log_weights) EXPECT_EQ(lw, k.ensemble.log_weights.front());
  EXPECT_DOUBLE_EQ(k.ensemble.ess, 40.0);
}

TEST(Kernel, Pi0StartsFromFrozenInitialValue) {
  PathConfig xi(TimeGrid(20), Box::centered(1, 2));
  xi.path(Site({0}))[0] = 2.0;
  RngStream rng(4, 4);
  std::vector<double> ends;
  for (int j = 0; j < 4000; ++j) {
    const PathConfig w = sample_kernel_h(zero_drift(1), Box({Site({0})}), xi, rng);
    EXPECT_EQ(w.value(Site({0}), 0), 2.0);
    ends.push_back(w.value(Site({0}), 20));
  }
  const Estimate m = Estimate::from_samples(ends);
  EXPECT_NEAR(m.mean, 2.0, 3.0 * m.std_error);
}

TEST(Kernel, PiHMatchesDirectSimulation) {
  // Pi^H with an OU drift against an independent Euler simulation of the same SDE.
  const int steps = 40;
  PathConfig xi(TimeGrid(steps), Box::centered(1, 1));
  xi.path(Site({0}))[0] = 1.5;
  RngStream rng(8, 8);
  std::vector<double> a;
  for (int j = 0; j < 6000; ++j) a.push_back(sample_kernel_h(ou_drift(1, 1.0), Box({Site({0})}), xi, rng).value(Site({0}), steps));
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  std::vector<double> b;
  const double h = 1.0 / steps;
  for (int j = 0; j < 6000; ++j) {
    double x = 1.5;
    for (int k = 0; k < steps; ++k) x += -x * h + std::sqrt(h) * nd(gen);
    b.push_back(x);
  }
  const Estimate ma = Estimate::from_samples(a), mb = Estimate::from_samples(b);
  EXPECT_LE(std::abs(combined_z(ma, mb)), 3.5);
  std::vector<double> a2, b2;
  for (double v : a) a2.push_back(v * v);
  for (double v : b) b2.push_back(v * v);
  EXPECT_LE(std::abs(combined_z(Estimate::from_samples(a2), Estimate::from_samples(b2))), 3.5);
}

TEST(Kernel, PartitionFunctionHasUnitMeanUnderReference) {
  const Estimate z = partition_mean_under_reference(barycentre(), Box({Site({0})}), 3000, 20, 50, 6, 1);
  EXPECT_LE(std::abs(z_score(z, 1.0)), 3.5) << z.mean << " +- " << z.std_error;
}

TEST(Kernel, RequiresCoverage) {
  const PathConfig xi = random_config(Box::centered(1, 1), 10, 1);
  RngStream rng(1, 1);
  EXPECT_THROW(kernel_hplus(barycentre(), Box({Site({0})}), xi, 5, rng), PreconditionError);
}

std::vector<LocalFunction> dlr_tests() {
  return {local_value_capped(Site({0}), 1.0, 5.0), local_square(Site({0}), 0.5),
          local_indicator_positive(Site({0}), 1.0)};
}

TEST(Dlr, ZeroDriftAndInitialValueTests) {
  DlrBudget budget;
  budget.outer = 400;
  budget.inner = 20;
  const auto tests = dlr_tests();
  const DlrReport rep =
      dlr_check(zero_drift(1), config(2, 20, 1), Box({Site({0})}), InitialLaw::reference(), tests, budget, 1);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.ess_failures, 0u);

  const std::vector<LocalFunction> init{local_square(Site({0}), 0.0)};
  const DlrReport r0 = dlr_check(barycentre(), config(3, 20, 1), Box({Site({0})}), GaussianProduct{0.3, 1.5}, init,
                                 budget, 1);
  EXPECT_EQ(r0.tests[0].z, 0.0);
  EXPECT_NEAR(r0.tests[0].left.mean, r0.tests[0].right.mean, 1e-12);
}

TEST(Dlr, InteractingDriftSmallBudget) {
  DlrBudget budget;
  budget.outer = 800;
  budget.inner = 50;
  const auto tests = dlr_tests();
  const DlrReport rep =
      dlr_check(barycentre(), config(4, 40, 1), Box({Site({0})}), InitialLaw::reference(), tests, budget, 1);
  for (const auto& t : rep.tests) EXPECT_LE(std::abs(t.z), 3.0) << t.name;
  EXPECT_LT(rep.ess_failure_rate, 0.05);
}

TEST(Dlr, RejectsBadGeometry) {
  DlrBudget budget;
  budget.outer = 10;
  budget.inner = 2;
  const auto tests = dlr_tests();
  EXPECT_THROW(dlr_check(barycentre(), config(2, 10, 1), Box({Site({0})}), InitialLaw::reference(), tests, budget, 1),
               PreconditionError);
  const std::vector<LocalFunction> far{local_value(Site({7}), 1.0)};
  EXPECT_THROW(dlr_check(barycentre(), config(4, 10, 1), Box({Site({0})}), InitialLaw::reference(), far, budget, 1),
               PreconditionError);
}

TEST(FreeEnergy, InteriorSites) {
  EXPECT_EQ(interior_sites(Box::cube(1, 4), 2), Box::range_cube(1, -2, 1));
  EXPECT_EQ(interior_sites(Box::cube(1, 2), 0), Box::cube(1, 2));
  EXPECT_TRUE(interior_sites(Box::cube(1, 1), 2).empty());
}

TEST(FreeEnergy, DeterministicCases) {
  const Ensemble same = sample_Pn(barycentre(), config(4, 20, 50), InitialLaw::reference(), 1);
  EXPECT_EQ(free_energy_mismatch(barycentre(), barycentre(), same, 1).mean, 0.0);

  const Ensemble shifted = sample_Pn(constant_drift(1, 1.0), config(2, 20, 50), InitialLaw::reference(), 1);
  const Estimate m = free_energy_mismatch(constant_drift(1, 0.5), constant_drift(1, 1.0), shifted, 1);
  EXPECT_NEAR(m.mean, 0.125, 1e-12);
  EXPECT_NEAR(m.std_error, 0.0, 1e-12);
  EXPECT_THROW(free_energy_mismatch(barycentre(), barycentre(), sample_Pn(barycentre(), config(1, 5, 2), Dirac{0.0}, 1), 1),
               PreconditionError);
}

TEST(FreeEnergy, OrnsteinUhlenbeckMismatchMatchesSecondMoments) {
  const int steps = 100;
  const double kappa = 1.2, h = 1.0 / steps;
  const Ensemble e = sample_Pn(ou_drift(1, kappa), config(2, steps, 6000), Dirac{0.0}, 1);
  const Estimate m = free_energy_mismatch(ou_drift(1, 1.0), ou_drift(1, kappa), e, 1);
  const Estimate d = free_energy_definition(ou_drift(1, 1.0), ou_drift(1, kappa), e, 1);
  // Exact Euler second moments v_{k+1} = (1 - kappa h)^2 v_k + h.
  double v = 0.0, integral = 0.0;
  for (int k = 0; k < steps; ++k) {
    integral += v * h;
    v = (1.0 - kappa * h) * (1.0 - kappa * h) * v + h;
  }
  const double expected = 0.5 * 0.04 * integral;
  const double continuum = 0.02 * (1.0 - (1.0 - std::exp(-2.0 * kappa)) / (2.0 * kappa)) / (2.0 * kappa);
  EXPECT_NEAR(expected, continuum, 0.02 * continuum);
  EXPECT_NEAR(m.mean, expected, 4.0 * m.std_error);
  EXPECT_NEAR(d.mean, expected, 4.0 * d.std_error);
}

TEST(FreeEnergy, DefinitionMatchesMismatch) {
  const DriftSpec b = barycentre();
  const FreeEnergyReport same = free_energy_run(b, b, config(4, 40, 2000), InitialLaw::reference(), 1);
  EXPECT_EQ(same.mismatch.mean, 0.0);
  EXPECT_LE(std::abs(z_score(same.definition, 0.0)), 3.0);
  const FreeEnergyReport off = free_energy_run(b, offset_drift(b, 0.5), config(4, 40, 2000), InitialLaw::reference(), 1);
  EXPECT_NEAR(off.mismatch.mean, 0.125, 1e-12);
  EXPECT_LE(std::abs(off.agreement_z), 3.0);
  EXPECT_EQ(off.interior_sites, 4u);
}

TEST(FreeEnergy, NonNegativeWithinNoise) {
  const std::vector<std::pair<DriftSpec, DriftSpec>> pairs{
      {ou_drift(1, 1.0), ou_drift(1, 0.5)},
      {barycentre(), constant_drift(1, 0.3)},
      {running_integral_drift(1, 0.0, -1.0), zero_drift(1)}};
  std::uint64_t seed = 40;
  for (const auto& [b, beta] : pairs) {
    const FreeEnergyReport r = free_energy_run(b, beta, config(3, 40, 1500, seed++), InitialLaw::reference(), 1);
    EXPECT_GE(r.mismatch.mean, 0.0);
    EXPECT_GE(r.definition.mean, -3.0 * r.definition.std_error) << b.description() << " vs " << beta.description();
    EXPECT_LE(std::abs(r.agreement_z), 3.5);
  }
}

TEST(Moments, WeightedSlope) {
  const std::vector<double> x{1, 2, 3, 4}, y{1.0, 3.0, 5.0, 7.0}, se{0.1, 0.1, 0.1, 0.1};
  const auto [slope, slope_se] = weighted_slope(x, y, se);
  EXPECT_NEAR(slope, 2.0, 1e-12);
  EXPECT_NEAR(slope_se, 0.1 / std::sqrt(5.0), 1e-12);
}

TEST(Moments, ZeroDriftMatchesBrownianRunningMax) {
  const int steps = 50;
  // Independent oracle: E[max_k |B(t_k)|^2] from a separate generator.
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd;
  double acc = 0.0;
  const int oracle_samples = 200000;
  for (int j = 0; j < oracle_samples; ++j) {
    double b = 0.0, mx = 0.0;
    for (int k = 0; k < steps; ++k) {
      b += std::sqrt(1.0 / steps) * nd(gen);
      mx = std::max(mx, std::abs(b));
    }
    acc += mx * mx;
  }
  const double max_sq = acc / oracle_samples;
  const std::vector<int> sizes{1, 2};
  const MomentReport rep =
      moment_bound_report(zero_drift(1), config(1, steps, 6000), sizes, FrozenField::zero(), Dirac{0.0}, 1);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.bracket, 1.0);
    EXPECT_NEAR(row.moment.mean, max_sq * row.sum_gamma, 4.0 * row.moment.std_error + 0.01 * max_sq);
  }
  EXPECT_FALSE(rep.entropy.has_value());
}

TEST(Moments, ScaledBoundaryScalesTheBracket) {
  const std::vector<int> sizes{1, 2};
  const auto b = barycentre();
  const MomentReport one = moment_bound_report(b, config(1, 20, 500), sizes, FrozenField::constant(1.0), Dirac{0.0}, 1);
  const MomentReport two =
      moment_bound_report(b, config(1, 20, 500), sizes, FrozenField::constant(1.0).scaled(2.0), Dirac{0.0}, 1);
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    EXPECT_NEAR(two.rows[r].bracket - 1.0, 4.0 * (one.rows[r].bracket - 1.0), 1e-12);
    EXPECT_TRUE(std::isfinite(two.rows[r].ratio.mean));
  }
  EXPECT_TRUE(two.bounded);
}

}  // namespace
}  // namespace pathgibbs
