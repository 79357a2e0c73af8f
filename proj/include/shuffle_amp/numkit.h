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

// Log-domain scalar numerics. Every probability in the library is carried as
// a natural log so that masses far below the double range stay usable.

#ifndef SHUFFLE_AMP_NUMKIT_H_
#define SHUFFLE_AMP_NUMKIT_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace shuffle_amp {

// Natural log of a probability. -infinity encodes probability zero.
using LogProb = double;

inline constexpr LogProb kLogZero = -std::numeric_limits<double>::infinity();

// Default absolute slack tolerated by LogSub before it reports a domain error.
inline constexpr double kLogSubSlack = 1e-12;

// log(e^a + e^b). -infinity is the identity.
LogProb LogAdd(LogProb a, LogProb b);

// log(e^a - e^b). Returns -infinity when a <= b within `slack`, and
// InvalidArgument when b exceeds a by more than `slack`.
absl::StatusOr<LogProb> LogSub(LogProb a, LogProb b,
                               double slack = kLogSubSlack);

// Neumaier-compensated running sum. Sums of millions of atoms otherwise drift
// by about 1e-12.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    Add(x);
    return *this;
  }
  CompensatedSum& operator+=(const CompensatedSum& other) {
    Add(other.sum_);
    Add(other.comp_);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log(sum_i e^{x_i}), stable for arbitrary spreads.
LogProb LogSumExp(absl::Span<const double> xs);

// ln Pr[Bin(n, p) = k]. Uses the saddle-point form (Stirling remainders plus
// the deviance term) rather than log-gamma differences, which lose about
// log10(n) digits to cancellation at large n.
absl::StatusOr<LogProb> LnBinomPmf(int64_t k, int64_t n, double p);

// Same as LnBinomPmf without argument checks; returns -infinity for k
// outside [0, n]. For inner loops whose arguments are valid by construction.
LogProb LnBinomPmfUnchecked(int64_t k, int64_t n, double p);

// Stirling remainder ln n! - ln(sqrt(2 pi n) (n/e)^n).
double StirlingError(int64_t n);

// Interval [lo, hi] of Bin(n, p) whose two omitted tails each carry at most
// `side_budget`. `ln_outside` bounds ln Pr[X < lo or X > hi] from above.
// A non-positive budget returns the full support [0, n].
struct CountRange {
  int64_t lo = 0;
  int64_t hi = 0;
  LogProb ln_outside = kLogZero;
};
CountRange BinomCentralRange(int64_t n, double p, double side_budget);

// Same as BinomCentralRange for Bin(n, 1/2) but forced symmetric:
// hi = n - lo.
CountRange SymmetricHalfRange(int64_t n, double side_budget);

// Result of a bisection on a nonincreasing f: f(lo) >= target >= f(hi) and
// hi - lo <= tol. Upper-bound callers read hi, lower-bound callers read lo.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

// Bisects a nonincreasing f on [lo, hi] for the crossing of `target`.
// Requires f(hi) <= target <= f(lo); OutOfRange otherwise. When f(lo) equals
// the target the bracket collapses onto lo.
absl::StatusOr<Bracket> BisectMonotone(const std::function<double(double)>& f,
                                       double target, double lo, double hi,
                                       double tol);

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_NUMKIT_H_
