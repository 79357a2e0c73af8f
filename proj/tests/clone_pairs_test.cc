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

#include "shuffle_amp/clone_pairs.h"

#include <cmath>
#include <map>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gtest/gtest.h"

namespace shuffle_amp {
namespace {

using Float50 = boost::multiprecision::cpp_bin_float_50;
using Law = std::map<CountTuple, Float50>;

// Convolution over users: each other user adds symbol 0 or 1 with
// probability p_o each and symbol 2 with probability q_o; user 1 adds symbol
// j with weight w[j]. Independent of the closed form used by the builders.
Law BruteForce(int64_t n, double p_o, double q_o, const double w[3]) {
  Law law = {{CountTuple{0, 0, 0}, Float50(1)}};
  auto step = [&](const Float50 probs[4]) {
    Law next;
    for (const auto& [t, m] : law) {
      for (int j = 0; j < 4; ++j) {
        if (probs[j] == 0) continue;
        CountTuple u = t;
        if (j < 3) ++u[j];
        next[u] += m * probs[j];
      }
    }
    law = std::move(next);
  };
  const Float50 first[4] = {w[0], w[1], w[2], Float50(0)};
  step(first);
  const Float50 other[4] = {p_o, p_o, q_o, Float50(1) - 2 * Float50(p_o) - q_o};
  for (int64_t i = 1; i < n; ++i) step(other);
  return law;
}

void ExpectMatches(const CountDist& d, const Law& full, double tol) {
  // Arity-2 distributions do not record the middle symbol.
  Law law;
  for (const auto& [t, m] : full) {
    law[d.arity() == 2 ? CountTuple{t[0], t[1], 0} : t] += m;
  }
  int matched = 0;
  for (const auto& [t, m] : law) {
    const double want = static_cast<double>(m);
    const LogProb lp = d.LogMass(t);
    const double got = lp == kLogZero ? 0.0 : std::exp(lp);
    EXPECT_NEAR(got, want, tol) << t[0] << "," << t[1] << "," << t[2];
    matched += want > 0.0;
  }
  int stored = 0;
  d.ForEachAtom([&](const CountTuple&, LogProb) { ++stored; });
  EXPECT_EQ(stored, matched);
}

Law Swap01(const Law& law) {
  Law out;
  for (const auto& [t, m] : law) out[CountTuple{t[1], t[0], t[2]}] = m;
  return out;
}

TEST(ClonePairsTest, ThreeSymbolMatchesBruteForce) {
  for (double eps0 : {0.5, 2.0}) {
    const double e = std::exp(eps0);
    for (double p : {1.0 / (e + 1.0), 0.3 / (e + 1.0)}) {
      for (int64_t n : {1, 2, 3, 7, 12}) {
        DistPair pair = *BuildPair3Sym({eps0, n, p, 0.0}, 0.0);
        const double w[3] = {e * p, p, 1.0 - (e + 1.0) * p};
        Law law = BruteForce(n, p, 0.0, w);
        ExpectMatches(pair.p, law, 1e-14);
        ExpectMatches(pair.q, Swap01(law), 1e-14);
      }
    }
  }
}

TEST(ClonePairsTest, FourSymbolMatchesBruteForce) {
  const double eps0 = 1.0;
  const double e = std::exp(eps0);
  for (int k : {3, 5}) {
    const double p = 1.0 / (e + k - 1.0);
    const double q = (k - 2.0) / (e + k - 1.0);
    for (int64_t n : {1, 2, 4, 9}) {
      DistPair pair = *BuildPair4Sym({eps0, n, p, q}, 0.0);
      const double w[3] = {e * p, p, 1.0 - (e + 1.0) * p};
      Law law = BruteForce(n, p, q, w);
      ExpectMatches(pair.p, law, 1e-14);
      ExpectMatches(pair.q, Swap01(law), 1e-14);
    }
  }
}

TEST(ClonePairsTest, FourSymbolAtTwoUsersHasNineAtoms) {
  const double e = std::exp(1.0);
  DistPair pair = *BuildPair4Sym({1.0, 2, 1.0 / (e + 2.0), 1.0 / (e + 2.0)}, 0.0);
  int atoms = 0;
  pair.p.ForEachAtom([&](const CountTuple&, LogProb) { ++atoms; });
  EXPECT_EQ(atoms, 9);
}

TEST(ClonePairsTest, Fmt20AndBinaryMixtureMatchBruteForce) {
  const double eps0 = 1.5;
  const double e = std::exp(eps0);
  const double w[3] = {e / (e + 1.0), 1.0 / (e + 1.0), 0.0};
  for (int64_t n : {1, 4, 10}) {
    DistPair fmt = *BuildPairFmt20(eps0, n, 0.0);
    ExpectMatches(fmt.p, BruteForce(n, 0.5 * std::exp(-eps0), 0.0, w), 1e-14);
    DistPair mix = *BuildPairBinaryMixture(eps0, n, 0.1, 0.0);
    ExpectMatches(mix.p, BruteForce(n, 0.1, 0.0, w), 1e-14);
    ExpectMatches(mix.q, Swap01(BruteForce(n, 0.1, 0.0, w)), 1e-14);
  }
}

TEST(ClonePairsTest, BinaryRandomizedResponse) {
  const double eps0 = std::log(2.0);
  // n = 2, p = 1/3: P(ones = 2) = (2/3)(1/3), Q(ones = 2) = (1/3)(1/3).
  DistPair pair = *BuildPairBinaryRR(eps0, 2, 0.0);
  EXPECT_NEAR(std::exp(pair.p.LogMass({2, 0, 0})), 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(std::exp(pair.q.LogMass({2, 0, 0})), 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(std::exp(pair.p.LogMass({0, 2, 0})), 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(std::exp(pair.q.LogMass({0, 2, 0})), 4.0 / 9.0, 1e-15);
  EXPECT_FALSE(pair.p.IsMirrorOf(pair.q));
}

TEST(ClonePairsTest, TruncationKeepsExactValuesAndBoundsTheRest) {
  const double eps0 = 2.0;
  const double e = std::exp(eps0);
  for (double trunc : {1e-4, 1e-10}) {
    for (bool four : {false, true}) {
      CloneParams params{eps0, 300, 1.0 / (e + 3.0), four ? 2.0 / (e + 3.0) : 0.0};
      if (!four) params.p = 1.0 / (e + 1.0);
      DistPair full = *(four ? BuildPair4Sym(params, 0.0) : BuildPair3Sym(params, 0.0));
      DistPair cut =
          *(four ? BuildPair4Sym(params, trunc) : BuildPair3Sym(params, trunc));
      EXPECT_LT(cut.p.num_atoms(), full.p.num_atoms());
      double kept = 0.0;
      cut.p.ForEachAtom([&](const CountTuple& t, LogProb lp) {
        EXPECT_NEAR(lp, full.p.LogMass(t), 1e-12);
        kept += std::exp(full.p.LogMass(t));
      });
      const double outside = 1.0 - kept;
      EXPECT_LE(outside, std::exp(cut.p.dropped_tail()) + 1e-14);
      EXPECT_LE(std::exp(cut.p.dropped_tail()), trunc * (1.0 + 1e-9));
    }
  }
}

TEST(ClonePairsTest, ValidationErrors) {
  const double e = std::exp(1.0);
  EXPECT_FALSE(BuildPair3Sym({1.0, 10, 1.01 / (e + 1.0), 0.0}).ok());
  EXPECT_FALSE(BuildPair3Sym({1.0, 0, 0.1, 0.0}).ok());
  EXPECT_FALSE(BuildPair3Sym({-1.0, 10, 0.1, 0.0}).ok());
  EXPECT_FALSE(BuildPair3Sym({1.0, 10, 0.1, 0.2}).ok());
  EXPECT_FALSE(BuildPair4Sym({1.0, 10, 0.1, 0.0}).ok());
  EXPECT_FALSE(BuildPair4Sym({1.0, 10, 0.1, 0.85}).ok());
  EXPECT_FALSE(BuildPair3Sym({1.0, 10, 0.1, 0.0}, 1.5).ok());
  EXPECT_FALSE(BuildPairFmt20(0.0, 10).ok());
  EXPECT_TRUE(ValidateCloneParams({1.0, 10, 1.0 / (e + 1.0), 0.0}).ok());
}

TEST(ClonePairsTest, SizeCapIsEnforced) {
  const double e = std::exp(1.0);
  absl::StatusOr<DistPair> big =
      BuildPair3Sym({1.0, 1000000, 1.0 / (e + 1.0), 0.0}, 0.0);
  EXPECT_EQ(big.status().code(), absl::StatusCode::kResourceExhausted);
}

TEST(ClonePairsTest, ZeroEpsGivesIdenticalDistributions) {
  DistPair pair = *BuildPair3Sym({0.0, 50, 0.5, 0.0}, 0.0);
  pair.p.ForEachAtom([&](const CountTuple& t, LogProb lp) {
    EXPECT_NEAR(pair.q.LogMass(t), lp, 1e-12);
  });
}

}  // namespace
}  // namespace shuffle_amp
