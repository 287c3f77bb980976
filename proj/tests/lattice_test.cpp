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

#include "pathgibbs/lattice.hpp"

namespace pathgibbs {
namespace {

RealConfig random_config(std::mt19937_64& gen, int dim, int radius) {
  RealConfig x{Box::centered(dim, radius), {}};
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < x.support.size(); ++i) x.values.push_back(nd(gen));
  return x;
}

TEST(Lattice, CubeCardinalityAndBounds) {
  for (int d = 1; d <= 3; ++d) {
    for (int n = 1; n <= 3; ++n) {
      const Box b = Box::cube(d, n);
      EXPECT_EQ(b.size(), static_cast<std::size_t>(std::pow(2 * n, d)));
      EXPECT_TRUE(b.contains(Site::origin(d)));
    }
  }
  const Box b = Box::cube(1, 4);
  EXPECT_EQ(b.sites().front(), Site({-4}));
  EXPECT_EQ(b.sites().back(), Site({3}));
  EXPECT_THROW(Box::cube(1, 0), PreconditionError);
}

TEST(Lattice, InteractionRangeMustContainOrigin) {
  EXPECT_THROW(InteractionRange(Box({Site({1})})), PreconditionError);
  const auto r = InteractionRange::centered(2, 1);
  EXPECT_EQ(r.size(), 9u);
  EXPECT_EQ(r.radius(), 1);
  EXPECT_EQ(r.diameter(), 2);
  EXPECT_EQ(r.offsets()[r.origin_slot()], Site::origin(2));
}

TEST(Lattice, EnlargeExamples) {
  const auto delta = InteractionRange::centered(1, 1);
  EXPECT_EQ(enlarge(Box({Site({0})}), delta), Box({Site({-1}), Site({0}), Site({1})}));

  const InteractionRange forward(Box({Site({0}), Site({1})}));
  EXPECT_EQ(enlarge(Box({Site({0}), Site({1})}), forward), Box({Site({-1}), Site({0}), Site({1})}));

  const Box irregular({Site({0, 0}), Site({2, -1}), Site({5, 5})});
  EXPECT_EQ(enlarge(irregular, InteractionRange::self(2)), irregular);
}

TEST(Lattice, EnlargeIsMonotoneAndExtensive) {
  const InteractionRange delta(Box({Site({0, 0}), Site({1, 0}), Site({0, -2})}));
  const Box small({Site({0, 0}), Site({1, 1})});
  const Box big = small.united(Box({Site({3, 0}), Site({-1, 2})}));
  EXPECT_TRUE(small.is_subset_of(enlarge(small, delta)));
  EXPECT_TRUE(enlarge(small, delta).is_subset_of(enlarge(big, delta)));
  const Box twice = enlarge(enlarge(small, delta), delta);
  EXPECT_TRUE(enlarge(small, delta).is_subset_of(twice));
}

TEST(Lattice, GammaValues) {
  EXPECT_DOUBLE_EQ(gamma(Site({0})), 1.0);
  EXPECT_DOUBLE_EQ(gamma(Site({0, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(gamma(Site({1})), 0.25);
  // sup-norm |(1,1)| = 1, so (1+1)^{-3}.
  EXPECT_DOUBLE_EQ(gamma(Site({1, 1})), 0.125);
  EXPECT_DOUBLE_EQ(gamma(Site({-3, 2})), gamma(Site({3, -2})));
}

TEST(Lattice, GammaMassIncreasesAndIsBounded) {
  for (int d = 1; d <= 2; ++d) {
    // Full-lattice sum: sum_r (#sites at sup-norm r) (1+r)^{-(d+1)}, truncated far out.
    double full = 1.0;
    for (int r = 1; r < 200000; ++r) {
      const double shell = std::pow(2 * r + 1, d) - std::pow(2 * r - 1, d);
      full += shell * std::pow(1.0 + r, -(d + 1));
    }
    double prev = 0.0;
    for (int n = 1; n <= 64; ++n) {
      const double m = gamma_mass(Box::cube(d, n));
      EXPECT_GT(m, prev);
      EXPECT_LT(m, full);
      prev = m;
    }
  }
}

TEST(Lattice, WeightedNormExamples) {
  const Box s1({Site({0}), Site({1})});
  EXPECT_DOUBLE_EQ(weighted_sq_norm(s1, std::vector<double>{0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(weighted_sq_norm(Box({Site({0})}), std::vector<double>{2.0}), 4.0);
  EXPECT_DOUBLE_EQ(weighted_sq_norm(s1, std::vector<double>{1.0, 2.0}), 2.0);
  EXPECT_THROW(weighted_sq_norm(s1, std::vector<double>{1.0}), PreconditionError);
}

TEST(Lattice, ShiftIdentityAndUnrolledExample) {
  RealConfig x{Box::centered(1, 2), {0, 0, 1, 0, 0}};
  const RealConfig same = shift_config(x, Site({0}));
  EXPECT_EQ(same.support, x.support);
  EXPECT_EQ(same.values, x.values);
  EXPECT_DOUBLE_EQ(shift_config(x, Site({1})).at(Site({-1})), 1.0);
  EXPECT_THROW(shift_config(x, Site({1})).at(Site({2})), MissingSiteError);
}

TEST(Lattice, ShiftComposesAdditively) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> off(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 3;
    const RealConfig x = random_config(gen, d, 2);
    Site i = Site::origin(d), j = Site::origin(d);
    for (int a = 0; a < d; ++a) {
      i[a] = off(gen);
      j[a] = off(gen);
    }
    const RealConfig lhs = shift_config(shift_config(x, j), i);
    const RealConfig rhs = shift_config(x, i + j);
    ASSERT_EQ(lhs.support, rhs.support);
    // (theta_i theta_j x)_k = x_{i+j+k}
    for (const auto& k : lhs.support) EXPECT_EQ(lhs.at(k), x.at(i + j + k));
  }
}

}  // namespace
}  // namespace pathgibbs
