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

#include "shuffle_amp/divergence.h"

#include <omp.h>

#include <cmath>

#include "gtest/gtest.h"
#include "shuffle_amp/clone_pairs.h"

namespace shuffle_amp {
namespace {

DistPair General(double eps0, int64_t n, double trunc) {
  return *BuildPair3Sym({eps0, n, 1.0 / (std::exp(eps0) + 1.0), 0.0}, trunc);
}

DistPair Ternary(double eps0, int64_t n, double trunc) {
  const double e = std::exp(eps0);
  return *BuildPair4Sym({eps0, n, 1.0 / (e + 3.0), 2.0 / (e + 3.0)}, trunc);
}

// Direct sums over atoms, for small fully enumerated pairs.
double DirectHockey(const CountDist& p, const CountDist& q, double eps) {
  double s = 0.0;
  p.ForEachAtom([&](const CountTuple& t, LogProb lp) {
    const LogProb lq = q.LogMass(t);
    const double qm = lq == kLogZero ? 0.0 : std::exp(lq);
    s += std::max(0.0, std::exp(lp) - std::exp(eps) * qm);
  });
  return s;
}

TEST(DivergenceTest, IdenticalDistributionsGiveZero) {
  DistPair pair = General(1.0, 40, 0.0);
  EXPECT_EQ(HockeyStick(pair.p, pair.p, 0.0)->upper, 0.0);
  EXPECT_NEAR(Renyi(pair.p, pair.p, 3.0)->upper, 0.0, 1e-14);
  EXPECT_NEAR(KullbackLeibler(pair.p, pair.p)->upper, 0.0, 1e-15);
  EXPECT_EQ(PrivacyLossTail(pair.p, pair.p, 0.1)->upper, 0.0);
}

TEST(DivergenceTest, HockeyMatchesDirectSum) {
  DistPair pair = Ternary(1.5, 25, 0.0);
  for (double eps : {0.0, 0.1, 0.7, 1.5}) {
    Enclosure h = *HockeyStick(pair.p, pair.q, eps);
    EXPECT_NEAR(h.lower, DirectHockey(pair.p, pair.q, eps), 1e-15);
    EXPECT_EQ(h.width(), 0.0);
  }
  EXPECT_NEAR(HockeyStick(pair.p, pair.q, 1.5)->upper, 0.0, 1e-15);
}

TEST(DivergenceTest, KernelsAgreeWithReference) {
  for (const DistPair& pair : {General(3.0, 5000, 1e-15), Ternary(2.0, 800, 1e-15),
                               *BuildPairBinaryRR(2.0, 3000)}) {
    for (bool fwd : {true, false}) {
      const CountDist& a = fwd ? pair.p : pair.q;
      const CountDist& b = fwd ? pair.q : pair.p;
      auto close = [](const Enclosure& x, const Enclosure& y) {
        EXPECT_NEAR(x.lower, y.lower, 1e-12 * std::max(1.0, std::fabs(y.lower)));
        EXPECT_NEAR(x.upper, y.upper, 1e-12 * std::max(1.0, std::fabs(y.upper)));
      };
      close(*HockeyStick(a, b, 0.2), *reference::HockeyStick(a, b, 0.2));
      close(*Renyi(a, b, 5.0), *reference::Renyi(a, b, 5.0));
      close(*KullbackLeibler(a, b), *reference::KullbackLeibler(a, b));
      close(*PrivacyLossTail(a, b, 0.3), *reference::PrivacyLossTail(a, b, 0.3));
    }
  }
}

TEST(DivergenceTest, TruncatedEnclosuresContainFullValues) {
  const double eps0 = 2.0;
  DistPair full = General(eps0, 400, 0.0);
  DistPair cut = General(eps0, 400, 1e-6);
  for (double eps : {0.0, 0.2, 0.5}) {
    const double v = HockeyStick(full.p, full.q, eps)->upper;
    EXPECT_TRUE(HockeyStick(cut.p, cut.q, eps)->Contains(v, 1e-15)) << eps;
  }
  for (double alpha : {1.5, 2.0, 8.0}) {
    const double v = Renyi(full.p, full.q, alpha)->upper;
    Enclosure e = *Renyi(cut.p, cut.q, alpha);
    EXPECT_TRUE(e.Contains(v, 1e-14)) << alpha << " " << e.lower << " " << v
                                      << " " << e.upper;
  }
  const double kl = KullbackLeibler(full.p, full.q)->upper;
  EXPECT_TRUE(KullbackLeibler(cut.p, cut.q)->Contains(kl, 1e-15));
  const double tail = PrivacyLossTail(full.p, full.q, 0.3)->upper;
  EXPECT_TRUE(PrivacyLossTail(cut.p, cut.q, 0.3)->Contains(tail, 1e-15));
}

TEST(DivergenceTest, RenyiCurveMatchesSingleOrders) {
  DistPair pair = General(4.0, 2000, 1e-20);
  const double alphas[] = {1.25, 2.0, 3.5, 10.0};
  std::vector<Enclosure> curve = *RenyiCurve(pair.p, pair.q, alphas);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(curve[i].upper, Renyi(pair.p, pair.q, alphas[i])->upper);
  }
  for (size_t i = 1; i < 4; ++i) EXPECT_GE(curve[i].upper, curve[i - 1].lower);
}

TEST(DivergenceTest, RenyiNeverExceedsRatioBound) {
  DistPair pair = General(1.0, 200, 1e-8);
  for (double alpha : {2.0, 50.0, 1000.0}) {
    EXPECT_LE(Renyi(pair.p, pair.q, alpha)->upper, 1.0 + 1e-15);
  }
}

TEST(DivergenceTest, KlIsNonNegativeAndBelowRenyi) {
  DistPair pair = Ternary(1.0, 300, 0.0);
  const double kl = KullbackLeibler(pair.p, pair.q)->upper;
  EXPECT_GT(kl, 0.0);
  EXPECT_LE(kl, Renyi(pair.p, pair.q, 1.5)->upper);
}

TEST(DivergenceTest, TailCountsStrictExceedanceOnly) {
  // Two atoms: losses ln 2 and -ln 2 under Q. eps = ln 2 is a tie.
  std::vector<std::pair<CountTuple, LogProb>> pa = {
      {{1, 0, 0}, std::log(2.0 / 3.0)}, {{0, 1, 0}, std::log(1.0 / 3.0)}};
  std::vector<std::pair<CountTuple, LogProb>> qa = {
      {{1, 0, 0}, std::log(1.0 / 3.0)}, {{0, 1, 0}, std::log(2.0 / 3.0)}};
  CountDist p = *CountDist::FromAtoms(2, 1, pa, kLogZero, 2.0);
  CountDist q = *CountDist::FromAtoms(2, 1, qa, kLogZero, 2.0);
  Enclosure tie = *PrivacyLossTail(p, q, std::log(2.0));
  EXPECT_EQ(tie.lower, 0.0);
  EXPECT_NEAR(tie.upper, 1.0, 1e-15);
  EXPECT_NEAR(PrivacyLossTail(p, q, 0.5)->lower, 1.0, 1e-15);
  EXPECT_EQ(PrivacyLossTail(p, q, 0.8)->upper, 0.0);
}

TEST(DivergenceTest, MissingQAtomRules) {
  std::vector<std::pair<CountTuple, LogProb>> pa = {
      {{1, 0, 0}, std::log(0.5)}, {{0, 1, 0}, std::log(0.5)}};
  std::vector<std::pair<CountTuple, LogProb>> qa = {{{1, 0, 0}, std::log(0.999)}};
  CountDist p = *CountDist::FromAtoms(2, 1, pa, kLogZero, 2.0);
  CountDist q = *CountDist::FromAtoms(2, 1, qa, std::log(0.001), 2.0);
  EXPECT_EQ(Renyi(p, q, 2.0).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(KullbackLeibler(p, q).status().code(),
            absl::StatusCode::kFailedPrecondition);
  // The missing atom has Q mass in [0, 0.001].
  Enclosure h = *HockeyStick(p, q, 0.0);
  EXPECT_NEAR(h.upper, 0.5, 1e-15);
  EXPECT_NEAR(h.lower, 0.499, 1e-15);
}

TEST(DivergenceTest, ArgumentErrors) {
  DistPair two = General(1.0, 5, 0.0);
  DistPair three = Ternary(1.0, 5, 0.0);
  EXPECT_EQ(HockeyStick(two.p, three.q, 0.0).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(HockeyStick(two.p, two.q, -0.1).ok());
  EXPECT_FALSE(Renyi(two.p, two.q, 1.0).ok());
  EXPECT_FALSE(PrivacyLossTail(two.p, two.q, -1.0).ok());
}

TEST(DivergenceTest, ResultsDoNotDependOnThreadCount) {
  DistPair pair = General(3.0, 20000, 1e-15);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Enclosure h1 = *HockeyStick(pair.p, pair.q, 0.1);
  const Enclosure r1 = *Renyi(pair.p, pair.q, 4.0);
  omp_set_num_threads(4);
  const Enclosure h4 = *HockeyStick(pair.p, pair.q, 0.1);
  const Enclosure r4 = *Renyi(pair.p, pair.q, 4.0);
  omp_set_num_threads(saved);
  EXPECT_EQ(h1.upper, h4.upper);
  EXPECT_EQ(h1.lower, h4.lower);
  EXPECT_EQ(r1.upper, r4.upper);
}

}  // namespace
}  // namespace shuffle_amp
