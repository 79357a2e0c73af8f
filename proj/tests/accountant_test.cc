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

#include "shuffle_amp/accountant.h"

#include <cmath>

#include "gtest/gtest.h"

namespace shuffle_amp {
namespace {

RdpCurve Gaussian(double sigma) {
  RdpCurve c;
  c.alphas = DefaultAlphaGrid();
  for (double a : c.alphas) c.eps.push_back(a / (2 * sigma * sigma));
  c.provenance = "gaussian";
  return c;
}

TEST(AlphaGridTest, SortedAndCoversRange) {
  std::vector<double> g = DefaultAlphaGrid();
  ASSERT_FALSE(g.empty());
  EXPECT_DOUBLE_EQ(g.front(), 1.25);
  EXPECT_LE(g.back(), 1024.0);
  EXPECT_GT(g.back() * std::pow(2.0, 0.25), 1024.0);
  for (size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
  for (int a = 2; a <= 64; ++a) {
    EXPECT_NE(std::find(g.begin(), g.end(), static_cast<double>(a)), g.end());
  }
}

TEST(ComposeTest, Linear) {
  RdpCurve a = Gaussian(2.0);
  RdpCurve b = Gaussian(3.0);
  const RdpCurve both[] = {a, b};
  RdpCurve sum = *ComposeRdp(both);
  RdpCurve rep = ComposeRepeated(a, 5);
  for (size_t i = 0; i < a.alphas.size(); ++i) {
    EXPECT_DOUBLE_EQ(sum.eps[i], a.eps[i] + b.eps[i]);
    EXPECT_NEAR(rep.eps[i], 5 * a.eps[i], 1e-12 * rep.eps[i]);
  }
  EXPECT_TRUE(sum.Validate().ok());
}

TEST(ComposeTest, EmptyListIsZeroCurve) {
  RdpCurve z = *ComposeRdp({});
  EXPECT_EQ(z.alphas, DefaultAlphaGrid());
  for (double e : z.eps) EXPECT_EQ(e, 0.0);
  auto floor_at = [&](double delta) {
    double v = INFINITY;
    for (double a : z.alphas) {
      v = std::min(v, std::log(1 / (a * delta)) / (a - 1) + std::log1p(-1 / a));
    }
    return v;
  };
  // A finite grid leaves a positive floor at small delta. At delta = 0.1 the
  // largest orders already push the minimum below 0, which is clamped.
  EXPECT_GT(floor_at(1e-6), 0.0);
  EXPECT_NEAR(RdpToAdp(z, 1e-6)->point.eps, floor_at(1e-6), 1e-15);
  EXPECT_LT(floor_at(0.1), 0.0);
  EXPECT_EQ(RdpToAdp(z, 0.1)->point.eps, 0.0);
}

TEST(ComposeTest, GridMismatchIsRejected) {
  RdpCurve a = Gaussian(1.0);
  RdpCurve b = a;
  b.alphas[3] += 0.01;
  const RdpCurve both[] = {a, b};
  EXPECT_EQ(ComposeRdp(both).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ComposeTest, ValidateCatchesBadCurves) {
  RdpCurve c = Gaussian(1.0);
  c.eps[0] = -1.0;
  EXPECT_FALSE(c.Validate().ok());
  c = Gaussian(1.0);
  c.alphas[0] = 1.0;
  EXPECT_FALSE(c.Validate().ok());
  c = Gaussian(1.0);
  c.eps.pop_back();
  EXPECT_FALSE(c.Validate().ok());
}

TEST(ConversionTest, MatchesGridMinimum) {
  RdpCurve c = Gaussian(5.0);
  const double delta = 1e-6;
  RdpConversion r = *RdpToAdp(c, delta);
  double best = INFINITY;
  for (size_t i = 0; i < c.alphas.size(); ++i) {
    const double a = c.alphas[i];
    best = std::min(best, c.eps[i] + std::log(1 / (a * delta)) / (a - 1) +
                              std::log1p(-1 / a));
  }
  EXPECT_NEAR(r.point.eps, best, 1e-12);
  EXPECT_EQ(r.point.delta, delta);
}

TEST(ConversionTest, MonotoneInDelta) {
  RdpCurve c = Gaussian(3.0);
  EXPECT_GE(RdpToAdp(c, 1e-9)->point.eps, RdpToAdp(c, 1e-6)->point.eps);
  EXPECT_FALSE(RdpToAdp(c, 0.0).ok());
  EXPECT_FALSE(RdpToAdp(c, 1.0).ok());
}

TEST(ConversionTest, FinerGridNeverHurts) {
  RdpCurve coarse;
  coarse.alphas = {2.0, 8.0, 32.0};
  for (double a : coarse.alphas) coarse.eps.push_back(a / 50.0);
  RdpCurve fine = Gaussian(5.0);
  EXPECT_LE(RdpToAdp(fine, 1e-6)->point.eps,
            RdpToAdp(coarse, 1e-6)->point.eps + 1e-15);
}

TEST(AdvancedTest, SingleRoundAndSmallEps) {
  AdpPoint one = *AdvancedComposition(0.5, 1e-7, 1, 1e-6);
  EXPECT_NEAR(one.eps,
              0.5 * std::sqrt(2 * std::log(1e6)) + 0.5 * std::expm1(0.5),
              1e-14);
  EXPECT_NEAR(one.delta, 1.1e-6, 1e-20);
  AdpPoint tiny = *AdvancedComposition(1e-12, 0.0, 1000, 1e-6);
  EXPECT_LT(tiny.eps, 1e-9);
}

TEST(AdvancedTest, ReferenceValue) {
  const long double eps = 0.1L, T = 1000.0L;
  const long double want =
      eps * std::sqrt(2 * T * std::log(1e6L)) + T * eps * std::expm1(eps);
  AdpPoint p = *AdvancedComposition(0.1, 1e-8, 1000, 1e-6);
  EXPECT_NEAR(p.eps, static_cast<double>(want), 1e-12);
  EXPECT_NEAR(p.delta, 1e-5 + 1e-6, 1e-18);
  EXPECT_FALSE(AdvancedComposition(0.1, 1e-8, 0, 1e-6).ok());
}

TEST(CompareTest, CrossoverIsWhereRenyiStaysAhead) {
  // A pure eps-DP round: the Renyi curve min(eps, alpha eps^2 / 2) against
  // advanced composition at the same eps.
  const double eps = 0.3;
  RdpCurve c;
  c.alphas = DefaultAlphaGrid();
  for (double a : c.alphas) c.eps.push_back(std::min(eps, a * eps * eps / 2));
  const int64_t rounds[] = {1, 10, 100, 1000};
  CompositionComparison cmp = *CompareComposition(
      c, [&](double) -> absl::StatusOr<double> { return eps; }, rounds, 1e-6);
  ASSERT_EQ(cmp.rows.size(), 4u);
  int64_t expect = 0;
  for (size_t i = 0; i < 4; ++i) {
    bool ahead_from_here = true;
    for (size_t j = i; j < 4; ++j) {
      ahead_from_here &= cmp.rows[j].rdp_eps < cmp.rows[j].advanced_eps;
    }
    if (ahead_from_here) {
      expect = cmp.rows[i].rounds;
      break;
    }
  }
  EXPECT_EQ(cmp.crossover, expect);
  EXPECT_GT(cmp.crossover, 0);
  EXPECT_LT(cmp.rows[3].rdp_eps, cmp.rows[3].advanced_eps);
}

TEST(CompareTest, PerRoundErrorsPropagate) {
  RdpCurve c = Gaussian(4.0);
  const int64_t rounds[] = {10};
  auto fail = [](double) -> absl::StatusOr<double> {
    return absl::FailedPreconditionError("nope");
  };
  EXPECT_EQ(CompareComposition(c, fail, rounds, 1e-6).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

}  // namespace
}  // namespace shuffle_amp
