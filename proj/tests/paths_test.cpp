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

#include <random>

#include "pathgibbs/paths.hpp"

namespace pathgibbs {
namespace {

std::vector<double> random_path(std::mt19937_64& gen, int m) {
  std::normal_distribution<double> nd;
  std::vector<double> p(static_cast<std::size_t>(m) + 1);
  for (auto& v : p) v = nd(gen);
  return p;
}

TEST(TimeGrid, Basics) {
  const TimeGrid g(200);
  EXPECT_DOUBLE_EQ(g.time(0), 0.0);
  EXPECT_DOUBLE_EQ(g.time(200), 1.0);
  EXPECT_DOUBLE_EQ(g.step(), 0.005);
  EXPECT_EQ(g.index_at_or_below(0.5), 100);
  EXPECT_EQ(g.index_at_or_below(0.5049), 100);
  EXPECT_EQ(g.index_at_or_below(-1.0), 0);
  EXPECT_THROW(TimeGrid(0), PreconditionError);
}

TEST(RunningMax, Examples) {
  const std::vector<double> c(11, 3.0);
  for (int k = 0; k <= 10; ++k) EXPECT_DOUBLE_EQ(running_max(c, k), 3.0);
  const TimeGrid g(10);
  std::vector<double> p;
  for (int k = 0; k <= 10; ++k) p.push_back(-2.0 * g.time(k));
  EXPECT_DOUBLE_EQ(running_max(p, 10), 2.0);
  EXPECT_THROW(running_max(p, 11), PreconditionError);
}

TEST(RunningMax, MatchesBruteForceMonotoneAndSignInvariant) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_path(gen, 30);
    auto neg = p;
    for (auto& v : neg) v = -v;
    double prev = 0.0;
    for (int k = 0; k <= 30; ++k) {
      double brute = 0.0;
      for (int l = 0; l <= k; ++l) brute = std::max(brute, std::abs(p[static_cast<std::size_t>(l)]));
      const double rm = running_max(p, k);
      EXPECT_EQ(rm, brute);
      EXPECT_EQ(running_max(neg, k), rm);
      EXPECT_GE(rm, prev);
      prev = rm;
    }
    EXPECT_EQ(running_max(p, 0), std::abs(p[0]));
  }
}

TEST(ItoSum, Examples) {
  std::mt19937_64 gen(3);
  const auto p = random_path(gen, 20);
  EXPECT_DOUBLE_EQ(ito_sum(std::vector<double>(20, 0.0), p), 0.0);
  EXPECT_NEAR(ito_sum(std::vector<double>(20, 1.5), p), 1.5 * (p[20] - p[0]), 1e-12);

  // integrand p(t_k), p(t) = t: sum_k (k/M)(1/M) = (M-1)/(2M).
  const int m = 50;
  const TimeGrid g(m);
  std::vector<double> lin, integrand;
  for (int k = 0; k <= m; ++k) lin.push_back(g.time(k));
  for (int k = 0; k < m; ++k) integrand.push_back(g.time(k));
  EXPECT_NEAR(ito_sum(integrand, lin), (m - 1.0) / (2.0 * m), 1e-14);
  EXPECT_THROW(ito_sum(integrand, integrand), PreconditionError);
}

TEST(ItoSum, LinearAndAdditiveOverSplits) {
  std::mt19937_64 gen(5);
  const auto p = random_path(gen, 40);
  auto f = random_path(gen, 39);
  auto g = random_path(gen, 39);
  std::vector<double> comb(40);
  for (int k = 0; k < 40; ++k) comb[k] = 2.0 * f[k] - 0.5 * g[k];
  EXPECT_NEAR(ito_sum(comb, p), 2.0 * ito_sum(f, p) - 0.5 * ito_sum(g, p), 1e-12);
  const std::span<const double> fs(f), ps(p);
  const double split = ito_sum(fs.subspan(0, 17), ps.subspan(0, 18)) + ito_sum(fs.subspan(17), ps.subspan(17));
  EXPECT_NEAR(split, ito_sum(f, p), 1e-12);
}

PathConfig config_with(const Box& support, int m, double base) {
  PathConfig c(TimeGrid(m), support);
  for (std::size_t r = 0; r < c.rows(); ++r) {
    for (std::size_t k = 0; k < c.grid().points(); ++k) c.row(r)[k] = base + 10.0 * r + 0.1 * k;
  }
  return c;
}

TEST(Concat, IdentityCases) {
  const PathConfig inner = config_with(Box({Site({0})}), 4, 1.0);
  const PathConfig empty(TimeGrid(4), Box{});
  EXPECT_EQ(concat(inner, empty), inner);
  EXPECT_EQ(concat(empty, inner), inner);
}

TEST(Concat, RoutesLookupsToTheRightSource) {
  const PathConfig inner = config_with(Box({Site({0})}), 4, 100.0);
  const PathConfig outer = config_with(Box({Site({-1}), Site({1})}), 4, -100.0);
  const PathConfig c = concat(inner, outer);
  EXPECT_EQ(c.value(Site({0}), 2), inner.value(Site({0}), 2));
  EXPECT_EQ(c.value(Site({-1}), 3), outer.value(Site({-1}), 3));
  EXPECT_EQ(c.value(Site({1}), 1), outer.value(Site({1}), 1));
  EXPECT_THROW(concat(inner, inner), PreconditionError);
  EXPECT_THROW(concat(inner, config_with(Box({Site({3})}), 5, 0.0)), PreconditionError);
}

TEST(Concat, AssociativeAndCommutesWithShift) {
  const PathConfig a = config_with(Box({Site({0, 0})}), 3, 1.0);
  const PathConfig b = config_with(Box({Site({1, 0}), Site({0, 1})}), 3, 2.0);
  const PathConfig c = config_with(Box({Site({-1, -1})}), 3, 3.0);
  EXPECT_EQ(concat(concat(a, b), c), concat(a, concat(b, c)));
  const Site i({2, -1});
  EXPECT_EQ(shift_config(concat(a, b), i), concat(shift_config(a, i), shift_config(b, i)));
}

TEST(ShiftConfig, ZeroCoordinateOfShiftIsSiteValue) {
  const PathConfig c = config_with(Box::centered(1, 2), 3, 0.0);
  const PathConfig s = shift_config(c, Site({1}));
  EXPECT_EQ(s.value(Site({0}), 2), c.value(Site({1}), 2));
  const ShiftedView v(c, Site({1}));
  EXPECT_EQ(v.value(Site({-1}), 3), c.value(Site({0}), 3));
  EXPECT_THROW(v.path(Site({2})), MissingSiteError);
}

}  // namespace
}  // namespace pathgibbs
