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

#include "shuffle_amp/numkit.h"

#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gtest/gtest.h"

namespace shuffle_amp {
namespace {

using Float50 = boost::multiprecision::cpp_bin_float_50;

// ln C(n, k) + k ln p + (n-k) ln(1-p) at 50 digits.
double ReferenceLnPmf(int64_t k, int64_t n, double p) {
  Float50 pp = p;
  Float50 v = boost::math::lgamma(Float50(n + 1)) -
              boost::math::lgamma(Float50(k + 1)) -
              boost::math::lgamma(Float50(n - k + 1));
  if (k > 0) v += Float50(k) * log(pp);
  if (n - k > 0) v += Float50(n - k) * log1p(-pp);
  return static_cast<double>(v);
}

TEST(LogAddTest, MatchesDirectSum) {
  EXPECT_NEAR(LogAdd(std::log(0.25), std::log(0.5)), std::log(0.75), 1e-15);
  EXPECT_EQ(LogAdd(kLogZero, -3.0), -3.0);
  EXPECT_EQ(LogAdd(-3.0, kLogZero), -3.0);
  EXPECT_EQ(LogAdd(kLogZero, kLogZero), kLogZero);
  EXPECT_NEAR(LogAdd(-800.0, -800.0), -800.0 + std::log(2.0), 1e-12);
}

TEST(LogSubTest, SlackAndErrors) {
  EXPECT_NEAR(*LogSub(std::log(0.75), std::log(0.5)), std::log(0.25), 1e-15);
  EXPECT_EQ(*LogSub(-1.0, -1.0), kLogZero);
  EXPECT_EQ(*LogSub(-1.0, -1.0 + 1e-13), kLogZero);
  EXPECT_EQ(*LogSub(-2.0, kLogZero), -2.0);
  EXPECT_FALSE(LogSub(-1.0, -0.5).ok());
  EXPECT_FALSE(LogSub(std::nan(""), 0.0).ok());
}

TEST(LogSumExpTest, StableForWideSpreads) {
  std::vector<double> xs = {-1000.0, -1000.0, -1000.0 + std::log(2.0)};
  EXPECT_NEAR(LogSumExp(xs), -1000.0 + std::log(4.0), 1e-12);
  std::vector<double> empty;
  EXPECT_EQ(LogSumExp(empty), kLogZero);
  std::vector<double> zeros = {kLogZero, kLogZero};
  EXPECT_EQ(LogSumExp(zeros), kLogZero);
}

TEST(CompensatedSumTest, RecoversCancelledLowBits) {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000000; ++i) s += 1e-16;
  EXPECT_NEAR(s.value(), 1.0 + 1e-10, 1e-22);
}

TEST(StirlingErrorTest, MatchesLogGamma) {
  for (int64_t n : {1, 2, 7, 15, 16, 30, 36, 81, 501, 100000}) {
    Float50 x = n;
    Float50 ref = boost::math::lgamma(x + 1) - (x + 0.5) * log(x) + x -
                  0.5 * log(2 * boost::math::constants::pi<Float50>());
    EXPECT_NEAR(StirlingError(n), static_cast<double>(ref),
                1e-16 + 1e-13 * static_cast<double>(ref))
        << "n=" << n;
  }
}

TEST(LnBinomPmfTest, MatchesHighPrecisionReference) {
  const int64_t ns[] = {1, 5, 16, 100, 1000, 1000000};
  const double ps[] = {0.5, 0.1, 1.0 / (std::exp(4.0) + 1.0), 0.9, 1e-6};
  for (int64_t n : ns) {
    for (double p : ps) {
      for (int64_t k : {int64_t{0}, int64_t{1}, n / 3, n / 2, n - 1, n}) {
        if (k < 0 || k > n) continue;
        const double ref = ReferenceLnPmf(k, n, p);
        const double got = *LnBinomPmf(k, n, p);
        if (ref < -700.0) continue;
        EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::fabs(ref)))
            << "k=" << k << " n=" << n << " p=" << p;
      }
    }
  }
}

TEST(LnBinomPmfTest, EdgeCasesAndErrors) {
  EXPECT_EQ(*LnBinomPmf(0, 10, 0.0), 0.0);
  EXPECT_EQ(*LnBinomPmf(1, 10, 0.0), kLogZero);
  EXPECT_EQ(*LnBinomPmf(10, 10, 1.0), 0.0);
  EXPECT_EQ(*LnBinomPmf(0, 0, 0.3), 0.0);
  EXPECT_FALSE(LnBinomPmf(11, 10, 0.5).ok());
  EXPECT_FALSE(LnBinomPmf(-1, 10, 0.5).ok());
  EXPECT_FALSE(LnBinomPmf(1, 10, 1.5).ok());
}

TEST(LnBinomPmfTest, SumsToOne) {
  for (double p : {0.5, 0.02, 0.93}) {
    std::vector<double> lp;
    for (int64_t k = 0; k <= 5000; ++k) lp.push_back(LnBinomPmfUnchecked(k, 5000, p));
    EXPECT_NEAR(LogSumExp(lp), 0.0, 1e-13) << "p=" << p;
  }
}

// The reported outside mass must bound the true outside mass, and each side
// must respect its budget.
TEST(BinomCentralRangeTest, TailBoundIsValid) {
  for (int64_t n : {10, 1000, 200000}) {
    for (double p : {0.5, 0.01, 0.3, 0.97}) {
      for (double budget : {1e-6, 1e-15, 1e-30}) {
        CountRange r = BinomCentralRange(n, p, budget);
        ASSERT_LE(r.lo, r.hi);
        std::vector<double> below, above;
        for (int64_t k = 0; k < r.lo; ++k) below.push_back(LnBinomPmfUnchecked(k, n, p));
        for (int64_t k = r.hi + 1; k <= n; ++k) above.push_back(LnBinomPmfUnchecked(k, n, p));
        const double lb = LogSumExp(below);
        const double la = LogSumExp(above);
        EXPECT_LE(lb, std::log(budget) + 1e-12);
        EXPECT_LE(la, std::log(budget) + 1e-12);
        EXPECT_LE(LogAdd(lb, la), r.ln_outside + 1e-9)
            << "n=" << n << " p=" << p << " budget=" << budget;
      }
    }
  }
}

TEST(BinomCentralRangeTest, ZeroBudgetKeepsEverything) {
  CountRange r = BinomCentralRange(50, 0.2, 0.0);
  EXPECT_EQ(r.lo, 0);
  EXPECT_EQ(r.hi, 50);
  EXPECT_EQ(r.ln_outside, kLogZero);
}

TEST(SymmetricHalfRangeTest, IsSymmetricAndValid) {
  for (int64_t n : {1, 2, 9, 100, 5001}) {
    CountRange r = SymmetricHalfRange(n, 1e-12);
    EXPECT_EQ(r.lo + r.hi, n);
    std::vector<double> out;
    for (int64_t k = 0; k <= n; ++k) {
      if (k < r.lo || k > r.hi) out.push_back(LnBinomPmfUnchecked(k, n, 0.5));
    }
    EXPECT_LE(LogSumExp(out), r.ln_outside + 1e-9);
  }
}

TEST(BisectMonotoneTest, BracketsCrossing) {
  auto f = [](double x) { return std::exp(-x); };
  absl::StatusOr<Bracket> b = BisectMonotone(f, 0.5, 0.0, 5.0, 1e-9);
  ASSERT_TRUE(b.ok());
  EXPECT_LE(b->hi - b->lo, 1e-9);
  EXPECT_GE(f(b->lo), 0.5);
  EXPECT_LE(f(b->hi), 0.5);
  EXPECT_NEAR(b->hi, std::log(2.0), 1e-9);
}

TEST(BisectMonotoneTest, OutOfRangeTarget) {
  auto f = [](double x) { return 1.0 - x; };
  EXPECT_EQ(BisectMonotone(f, 2.0, 0.0, 1.0, 1e-6).status().code(),
            absl::StatusCode::kOutOfRange);
  EXPECT_EQ(BisectMonotone(f, -1.0, 0.0, 1.0, 1e-6).status().code(),
            absl::StatusCode::kOutOfRange);
  EXPECT_EQ(BisectMonotone(f, 0.5, 1.0, 0.0, 1e-6).status().code(),
            absl::StatusCode::kInvalidArgument);
}

}  // namespace
}  // namespace shuffle_amp
