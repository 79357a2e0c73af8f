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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace shuffle_amp {
namespace {

constexpr double kLn2Pi = 1.837877066409345483560659472811;

// Remainders for n <= 15, where the asymptotic series is not yet accurate.
// lgammal carries enough guard digits that the cancellation still leaves
// close to full double precision.
const std::array<double, 16>& SmallStirlingErrors() {
  static const std::array<double, 16> table = [] {
    std::array<double, 16> t{};
    t[0] = 0.0;
    for (int i = 1; i < 16; ++i) {
      long double n = i;
      long double v = lgammal(n + 1.0L) - (n + 0.5L) * logl(n) + n -
                      0.5L * static_cast<long double>(kLn2Pi);
      t[i] = static_cast<double>(v);
    }
    return t;
  }();
  return table;
}

// x ln(x/np) + np - x, evaluated without cancellation when x is close to np.
double Deviance(double x, double np) {
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

struct SideResult {
  int64_t end = 0;
  LogProb tail = kLogZero;
};

// Lowest k in [0, mode] such that Pr[X < k] <= budget, scanning inward from
// a point far enough out that its own pmf is negligible.
SideResult LowerSide(int64_t n, double p, int64_t mode, LogProb ln_budget) {
  auto lpmf = [&](int64_t k) { return LnBinomPmfUnchecked(k, n, p); };
  if (mode == 0) return {0, kLogZero};
  int64_t f = mode;
  int64_t step = 1;
  while (f > 0 && lpmf(f) >= ln_budget - 40.0) {
    f = std::max<int64_t>(0, mode - step);
    step *= 2;
  }
  LogProb tail = kLogZero;
  if (f > 0) {
    // Binomial pmfs are log-concave, so below f the terms shrink at least
    // geometrically with the ratio at f. Below the mode pmf(k) <= pmf(f)
    // also holds, which caps the sum by f * pmf(f).
    double rho = static_cast<double>(f) * (1.0 - p) /
                 (static_cast<double>(n - f + 1) * p);
    LogProb flat = lpmf(f) + std::log(static_cast<double>(f));
    tail = flat;
    if (rho < 1.0) {
      tail = std::min(flat, lpmf(f) + std::log(rho) - std::log1p(-rho));
    }
  }
  int64_t c = f;
  while (c < mode) {
    LogProb next = LogAdd(tail, lpmf(c));
    if (next > ln_budget) break;
    tail = next;
    ++c;
  }
  return {c, tail};
}

// Mirror of LowerSide: highest k in [mode, n] with Pr[X > k] <= budget.
SideResult UpperSide(int64_t n, double p, int64_t mode, LogProb ln_budget) {
  auto lpmf = [&](int64_t k) { return LnBinomPmfUnchecked(k, n, p); };
  if (mode == n) return {n, kLogZero};
  int64_t g = mode;
  int64_t step = 1;
  while (g < n && lpmf(g) >= ln_budget - 40.0) {
    g = std::min<int64_t>(n, mode + step);
    step *= 2;
  }
  LogProb tail = kLogZero;
  if (g < n) {
    double rho = static_cast<double>(n - g) * p /
                 (static_cast<double>(g + 1) * (1.0 - p));
    LogProb flat = lpmf(g) + std::log(static_cast<double>(n - g));
    tail = flat;
    if (rho < 1.0) {
      tail = std::min(flat, lpmf(g) + std::log(rho) - std::log1p(-rho));
    }
  }
  int64_t c = g;
  while (c > mode) {
    LogProb next = LogAdd(tail, lpmf(c));
    if (next > ln_budget) break;
    tail = next;
    --c;
  }
  return {c, tail};
}

int64_t BinomMode(int64_t n, double p) {
  double m = std::floor(static_cast<double>(n + 1) * p);
  return std::clamp<int64_t>(static_cast<int64_t>(m), 0, n);
}

}  // namespace

LogProb LogAdd(LogProb a, LogProb b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

absl::StatusOr<LogProb> LogSub(LogProb a, LogProb b, double slack) {
  if (std::isnan(a) || std::isnan(b)) {
    return absl::InvalidArgumentError("LogSub: NaN argument");
  }
  if (b == kLogZero) return a;
  if (a < b - slack) {
    return absl::InvalidArgumentError(
        absl::StrFormat("LogSub: a=%.17g below b=%.17g", a, b));
  }
  if (a <= b) return kLogZero;
  return a + std::log(-std::expm1(b - a));
}

LogProb LogSumExp(absl::Span<const double> xs) {
  double hi = kLogZero;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kLogZero) return kLogZero;
  if (std::isinf(hi)) return hi;
  CompensatedSum sum;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum.value());
}

double StirlingError(int64_t n) {
  constexpr double kS0 = 1.0 / 12.0;
  constexpr double kS1 = 1.0 / 360.0;
  constexpr double kS2 = 1.0 / 1260.0;
  constexpr double kS3 = 1.0 / 1680.0;
  constexpr double kS4 = 1.0 / 1188.0;
  if (n <= 15) return SmallStirlingErrors()[n];
  double x = static_cast<double>(n);
  double nn = x * x;
  if (n > 500) return (kS0 - kS1 / nn) / x;
  if (n > 80) return (kS0 - (kS1 - kS2 / nn) / nn) / x;
  if (n > 35) return (kS0 - (kS1 - (kS2 - kS3 / nn) / nn) / nn) / x;
  return (kS0 - (kS1 - (kS2 - (kS3 - kS4 / nn) / nn) / nn) / nn) / x;
}

LogProb LnBinomPmfUnchecked(int64_t k, int64_t n, double p) {
  if (k < 0 || k > n) return kLogZero;
  double q = 1.0 - p;
  if (p == 0.0) return k == 0 ? 0.0 : kLogZero;
  if (q == 0.0) return k == n ? 0.0 : kLogZero;
  double nd = static_cast<double>(n);
  if (k == 0) {
    if (n == 0) return 0.0;
    return p < 0.1 ? -Deviance(nd, nd * q) - nd * p : nd * std::log(q);
  }
  if (k == n) {
    return q < 0.1 ? -Deviance(nd, nd * p) - nd * q : nd * std::log(p);
  }
  double kd = static_cast<double>(k);
  double lc = StirlingError(n) - StirlingError(k) - StirlingError(n - k) -
              Deviance(kd, nd * p) - Deviance(nd - kd, nd * q);
  double lf = kLn2Pi + std::log(kd) + std::log1p(-kd / nd);
  return lc - 0.5 * lf;
}

absl::StatusOr<LogProb> LnBinomPmf(int64_t k, int64_t n, double p) {
  if (n < 0 || k < 0 || k > n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("LnBinomPmf: k=%d outside [0, n=%d]", k, n));
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("LnBinomPmf: p=%g outside [0, 1]", p));
  }
  return LnBinomPmfUnchecked(k, n, p);
}

CountRange BinomCentralRange(int64_t n, double p, double side_budget) {
  if (n <= 0) return {0, 0, kLogZero};
  if (p <= 0.0) return {0, 0, kLogZero};
  if (p >= 1.0) return {n, n, kLogZero};
  if (!(side_budget > 0.0)) return {0, n, kLogZero};
  LogProb ln_budget = std::log(side_budget);
  int64_t mode = BinomMode(n, p);
  SideResult low = LowerSide(n, p, mode, ln_budget);
  SideResult high = UpperSide(n, p, mode, ln_budget);
  return {low.end, high.end, LogAdd(low.tail, high.tail)};
}

CountRange SymmetricHalfRange(int64_t n, double side_budget) {
  if (n <= 0) return {0, 0, kLogZero};
  if (!(side_budget > 0.0)) return {0, n, kLogZero};
  SideResult low = LowerSide(n, 0.5, n / 2, std::log(side_budget));
  if (low.tail == kLogZero) return {low.end, n - low.end, kLogZero};
  return {low.end, n - low.end, low.tail + std::numbers::ln2};
}

absl::StatusOr<Bracket> BisectMonotone(const std::function<double(double)>& f,
                                       double target, double lo, double hi,
                                       double tol) {
  if (!(tol > 0.0) || !(lo <= hi)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("BisectMonotone: bad interval [%g, %g] or tol %g", lo,
                        hi, tol));
  }
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (std::isnan(f_lo) || std::isnan(f_hi)) {
    return absl::InternalError("BisectMonotone: f returned NaN");
  }
  if (target > f_lo || target < f_hi) {
    return absl::OutOfRangeError(absl::StrFormat(
        "BisectMonotone: target %.6g outside [f(hi)=%.6g, f(lo)=%.6g]", target,
        f_hi, f_lo));
  }
  while (hi - lo > tol) {
    double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    double f_mid = f(mid);
    if (std::isnan(f_mid)) {
      return absl::InternalError("BisectMonotone: f returned NaN");
    }
    if (f_mid > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return Bracket{lo, hi};
}

}  // namespace shuffle_amp
