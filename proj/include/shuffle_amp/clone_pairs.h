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

// Builders for the clone distribution pairs. In every construction n-1
// "other" users each land on symbol 0 or 1 with probability p_o apiece (and,
// for the 4-symbol pair, on symbol 2 with probability q), while user 1 adds a
// single unit according to a three-way branch. With C the number of others on
// symbols 0/1 and A ~ Bin(C, 1/2) the split between them, the first
// distribution is the law of
//
//   (A, C - A, N2) + branch,  branch = (1,0,0) | (0,1,0) | (0,0,1)
//
// with branch weights (w0, w1, w2). The second distribution swaps w0 and w1,
// which is the same as exchanging the first two coordinates, so it is stored
// as a mirrored view of the first.

#ifndef SHUFFLE_AMP_CLONE_PAIRS_H_
#define SHUFFLE_AMP_CLONE_PAIRS_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_amp/count_dist.h"

namespace shuffle_amp {

// Default tail budget per distribution.
inline constexpr double kDefaultTrunc = 1e-15;

// Builders refuse supports larger than this many atoms.
inline constexpr int64_t kDefaultMaxAtoms = 200'000'000;

struct CloneParams {
  double eps0 = 0.0;
  int64_t n = 1;
  double p = 0.0;  // clone probability
  double q = 0.0;  // middle-symbol probability, 0 for the 3-symbol pair
};

// Checks 0 <= p <= 1/(e^eps0 + 1), 0 <= q <= 1 - 2p, n >= 1.
absl::Status ValidateCloneParams(const CloneParams& params);

struct DistPair {
  CountDist p;
  CountDist q;
};

// `trunc` is the tail budget per distribution. trunc = 0 keeps the full
// support, which is only practical at small n.

// User 1 branches (e^eps0 p, p, 1 - (e^eps0 + 1) p); others clone with
// probability p per symbol. Arity 2.
absl::StatusOr<DistPair> BuildPair3Sym(const CloneParams& params,
                                       double trunc = kDefaultTrunc);

// As BuildPair3Sym with others also landing on the middle symbol with
// probability q, counted in n2. User 1's third branch increments n2.
absl::StatusOr<DistPair> BuildPair4Sym(const CloneParams& params,
                                       double trunc = kDefaultTrunc);

// Others clone with probability e^{-eps0}/2 per symbol; user 1 branches
// (e^eps0, 1, 0) / (e^eps0 + 1).
absl::StatusOr<DistPair> BuildPairFmt20(double eps0, int64_t n,
                                        double trunc = kDefaultTrunc);

// Others clone with probability p per symbol; user 1 branches
// (e^eps0, 1, 0) / (e^eps0 + 1). This is the pair whose privacy-loss tail is
// bounded in closed form by TailEps.
absl::StatusOr<DistPair> BuildPairBinaryMixture(double eps0, int64_t n,
                                                double p,
                                                double trunc = kDefaultTrunc);

// Count of ones among n binary randomized-response reports when user 1 holds
// 1 versus 0 and everyone else holds 0: Bern(e^eps0 p) + Bin(n-1, p) against
// Bern(p) + Bin(n-1, p) with p = 1/(e^eps0 + 1). Stored as arity-2 tuples
// (ones, n - ones). Not mirror-symmetric.
absl::StatusOr<DistPair> BuildPairBinaryRR(double eps0, int64_t n,
                                           double trunc = kDefaultTrunc);

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_CLONE_PAIRS_H_
