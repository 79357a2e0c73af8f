// Copyright 2026 The shuffle-amp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shuffle_amp/oracle.h"

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "shuffle_amp/clone_pairs.h"
#include "shuffle_amp/divergence.h"

namespace shuffle_amp {
namespace {

TEST(ExactShuffleTest, SingleUserIsRandomizedResponse) {
  const int data[] = {2};
  ExactDist<Rational> d = *ExactShuffledKrr<Rational>(Rational(2), 3, data);
  ASSERT_EQ(d.mass.size(), 3u);
  EXPECT_EQ(d.mass.at({0, 1, 0}), Rational(1, 2));
  EXPECT_EQ(d.mass.at({1, 0, 0}), Rational(1, 4));
  EXPECT_EQ(d.mass.at({0, 0, 1}), Rational(1, 4));
}

TEST(ExactShuffleTest, TwoUsersHandValues) {
  // Binary response with e = 2, both users holding 1: each reports 1 with
  // probability 2/3.
  const int data[] = {1, 1};
  ExactDist<Rational> d = *ExactShuffledKrr<Rational>(Rational(2), 2, data);
  EXPECT_EQ(d.mass.at({2, 0}), Rational(4, 9));
  EXPECT_EQ(d.mass.at({1, 1}), Rational(4, 9));
  EXPECT_EQ(d.mass.at({0, 2}), Rational(1, 9));
  const int mixed[] = {1, 2};
  ExactDist<Rational> m = *ExactShuffledKrr<Rational>(Rational(2), 2, mixed);
  EXPECT_EQ(m.mass.at({2, 0}), Rational(2, 9));
  EXPECT_EQ(m.mass.at({1, 1}), Rational(5, 9));
}

TEST(ExactShuffleTest, TotalIsExactlyOne) {
  const int data[] = {1, 3, 2, 4, 4};
  EXPECT_EQ(ExactShuffledKrr<Rational>(Rational(2), 4, data)->Total(),
            Rational(1));
  const Float50 e = exp(Float50(1.7));
  const Float50 total = ExactShuffledKrr<Float50>(e, 4, data)->Total();
  EXPECT_LT(abs(total - 1), Float50(1e-45));
}

TEST(ExactShuffleTest, PermutationInvariant) {
  const int a[] = {1, 2, 3, 3};
  const int b[] = {3, 1, 3, 2};
  EXPECT_EQ(ExactShuffledKrr<Rational>(Rational(2), 3, a)->mass,
            ExactShuffledKrr<Rational>(Rational(2), 3, b)->mass);
}

TEST(ExactShuffleTest, CapsAreEnforced) {
  std::vector<int> nine(9, 1);
  EXPECT_EQ(ExactShuffledKrr<Rational>(Rational(2), 2, nine).status().code(),
            absl::StatusCode::kResourceExhausted);
  const int data[] = {1};
  EXPECT_EQ(ExactShuffledKrr<Rational>(Rational(2), 5, data).status().code(),
            absl::StatusCode::kResourceExhausted);
  const int bad[] = {4};
  EXPECT_FALSE(ExactShuffledKrr<Rational>(Rational(2), 3, bad).ok());
}

TEST(OracleTest, IdenticalDatasetsGiveZero) {
  const int x[] = {1, 2, 3};
  const double eps[] = {0.0};
  const double alphas[] = {2.0};
  OracleTable t = *OracleDivergences(Float50(1), 3, x, x, eps, alphas);
  EXPECT_EQ(t.hockey_forward[0], Float50(0));
  EXPECT_LT(abs(t.renyi_backward[0]), Float50(1e-45));
  const int far[] = {2, 1, 3};
  EXPECT_FALSE(OracleDivergences(Float50(1), 3, x, far, eps, alphas).ok());
  ExactDist<Float50> d = *ExactShuffledKrr<Float50>(exp(Float50(1)), 3, x);
  ExactTupleLaw law = *FullCountLaw(d);
  EXPECT_EQ(ExactHockeyStick(law, law, Float50(0)), Float50(0));
  EXPECT_LT(abs(ExactRenyi(law, law, Float50(3))), Float50(1e-45));
}

TEST(OracleTest, TernaryMatchesThreeSymbolPair) {
  const double eps0 = std::log(2.0);
  const int x0[] = {1, 3, 3, 3};
  const int x1[] = {2, 3, 3, 3};
  ExactTupleLaw p =
      ProjectOnesTwos(*ExactShuffledKrr<Rational>(Rational(2), 3, x0));
  ExactTupleLaw q =
      ProjectOnesTwos(*ExactShuffledKrr<Rational>(Rational(2), 3, x1));
  DistPair pair = *BuildPair3Sym({eps0, 4, 1.0 / (2.0 + 2.0), 0.0}, 0.0);
  ExactTupleLaw ep = ToExactLaw(pair.p);
  ExactTupleLaw eq = ToExactLaw(pair.q);
  ASSERT_EQ(ep.size(), p.size());
  for (const auto& [t, m] : p) {
    ASSERT_TRUE(ep.count(t));
    EXPECT_LT(abs(ep.at(t) - m), Float50(1e-15));
    EXPECT_LT(abs(eq.at(t) - q.at(t)), Float50(1e-15));
  }
}

TEST(OracleTest, ProjectionCannotIncreaseDivergence) {
  const Float50 e = exp(Float50(1.5));
  const int x0[] = {1, 3, 2, 3};
  const int x1[] = {2, 3, 2, 3};
  ExactDist<Float50> d0 = *ExactShuffledKrr<Float50>(e, 3, x0);
  ExactDist<Float50> d1 = *ExactShuffledKrr<Float50>(e, 3, x1);
  ExactTupleLaw full0 = *FullCountLaw(d0), full1 = *FullCountLaw(d1);
  ExactTupleLaw ones0 = ProjectOnes(d0), ones1 = ProjectOnes(d1);
  for (double eps : {0.0, 0.3, 1.0}) {
    EXPECT_LE(ExactHockeyStick(ones0, ones1, Float50(eps)),
              ExactHockeyStick(full0, full1, Float50(eps)) + Float50(1e-40));
  }
  EXPECT_LE(ExactRenyi(ones0, ones1, Float50(2)),
            ExactRenyi(full0, full1, Float50(2)) + Float50(1e-40));
}

TEST(OracleTest, EnginesContainOracleValues) {
  const double eps0 = 1.0;
  const int x0[] = {1, 3, 3, 3, 3};
  const int x1[] = {2, 3, 3, 3, 3};
  const double eps_grid[] = {0.0, 0.4};
  const double alpha_grid[] = {2.0, 5.0};
  OracleTable table =
      *OracleDivergences(Float50(eps0), 3, x0, x1, eps_grid, alpha_grid);
  const double e = std::exp(eps0);
  DistPair pair = *BuildPair3Sym({eps0, 5, 1.0 / (e + 2.0), 0.0}, 0.0);
  for (size_t i = 0; i < 2; ++i) {
    Enclosure h = *HockeyStick(pair.p, pair.q, eps_grid[i]);
    const double want = static_cast<double>(table.hockey_forward[i]);
    EXPECT_TRUE(h.Contains(want, 1e-13)) << want;
    // The full count law is finer than the (ones, twos) projection.
    Enclosure r = *Renyi(pair.p, pair.q, alpha_grid[i]);
    EXPECT_LE(r.lower,
              static_cast<double>(table.renyi_forward[i]) + 1e-13);
  }
}

TEST(OracleTest, RenyiInfiniteWithoutSupport) {
  ExactTupleLaw p = {{{1, 0, 0}, Float50(1)}};
  ExactTupleLaw q = {{{0, 1, 0}, Float50(1)}};
  EXPECT_TRUE(isinf(ExactRenyi(p, q, Float50(2))));
  EXPECT_EQ(ExactHockeyStick(p, q, Float50(0)), Float50(1));
}

TEST(OracleTest, MarginalSumsMass) {
  ExactTupleLaw law = {{{1, 0, 0}, Float50(0.25)},
                       {{1, 2, 0}, Float50(0.25)},
                       {{0, 1, 1}, Float50(0.5)}};
  ExactTupleLaw m = MarginalN0(law);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at({1, 0, 0}), Float50(0.5));
}

}  // namespace
}  // namespace shuffle_amp
