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

// Amplification bounds for n shuffled eps0-DP reports.
//
// Numeric bounds evaluate divergences of a clone pair and invert delta(eps)
// by bisection. Upper bounds use the upper side of every enclosure and the
// upper end of the bisection bracket; lower bounds use the lower sides.
//
// The general clone bound (p = 1/(e^eps0 + 1)) is only proven for randomizers
// that decompose with that p for every pair of inputs. Selecting it requires
// either ExtremalClassAck or a decomposition witness.

#ifndef SHUFFLE_AMP_BOUNDS_H_
#define SHUFFLE_AMP_BOUNDS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "shuffle_amp/clone_pairs.h"
#include "shuffle_amp/decompose.h"
#include "shuffle_amp/divergence.h"
#include "shuffle_amp/numkit.h"

namespace shuffle_amp {

struct AdpPoint {
  double eps = 0.0;
  double delta = 0.0;
};

struct SubGaussianTail {
  double sigma = 0.0;
  double delta_min = 0.0;
  double eps0 = 0.0;
};

inline constexpr double kDefaultTol = 1e-4;
// Renyi slack grows like tail * e^{(alpha-1) eps0}, so RDP needs far smaller
// tails than delta queries do.
inline constexpr double kDefaultRdpTrunc = 1e-30;
inline constexpr double kDefaultRdpConstant = 1536.0;

// Caller's statement that every local randomizer decomposes with
// p = 1/(e^eps0 + 1).
struct ExtremalClassAck {
  explicit ExtremalClassAck() = default;
};
inline constexpr ExtremalClassAck kRandomizersInExtremalClass{};

class BoundVariant {
 public:
  enum class Kind { kGeneralExtremal, kFmt20, kCustom };

  static BoundVariant GeneralExtremal(ExtremalClassAck);
  // Accepts a witness whose p is 1/(e^eps0 + 1) and that reconstructs its
  // matrix to 1e-10; the bound must then be queried at the witness's eps0.
  static absl::StatusOr<BoundVariant> GeneralExtremal(
      const DecompositionResult& witness);
  static BoundVariant Fmt20();
  static BoundVariant Custom(double p, double q);
  static BoundVariant Custom(const DecompositionResult& decomposition);

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  double q() const { return q_; }
  std::string name() const;

  // Builds the clone pair this variant evaluates.
  absl::StatusOr<DistPair> BuildPair(double eps0, int64_t n,
                                     double trunc) const;

 private:
  BoundVariant(Kind kind, double p, double q, double witness_eps0)
      : kind_(kind), p_(p), q_(q), witness_eps0_(witness_eps0) {}

  Kind kind_;
  double p_ = 0.0;
  double q_ = 0.0;
  double witness_eps0_ = -1.0;  // < 0 when not tied to a witness
};

// Divergences of a fixed pair in both directions. Building the pair is the
// expensive step; a PairEvaluator is reused across many eps or alpha queries.
class PairEvaluator {
 public:
  explicit PairEvaluator(DistPair pair) : pair_(std::move(pair)) {}

  // Hockey-stick enclosure of max(D(P||Q), D(Q||P)).
  absl::StatusOr<Enclosure> Delta(double eps) const;
  // Renyi enclosures of max(D(P||Q), D(Q||P)).
  absl::StatusOr<std::vector<Enclosure>> Renyi(
      absl::Span<const double> alphas) const;

  const DistPair& pair() const { return pair_; }

 private:
  DistPair pair_;
};

struct EpsBound {
  AdpPoint point;
  Bracket bracket;
  Enclosure delta_at_eps;
  // delta could not be met even at eps0; point.eps is eps0.
  bool infeasible_delta = false;
};

struct NumericOptions {
  double trunc = kDefaultTrunc;
  double tol = kDefaultTol;
};

// Smallest bracketed eps in [0, eps0] with Delta(eps).upper <= delta.
absl::StatusOr<EpsBound> EpsUpperFromPair(const PairEvaluator& evaluator,
                                          double eps0, double delta,
                                          double tol = kDefaultTol);

// Largest bracketed eps in [0, eps0] with Delta(eps).lower > delta, or 0.
absl::StatusOr<EpsBound> EpsLowerFromPair(const PairEvaluator& evaluator,
                                          double eps0, double delta,
                                          double tol = kDefaultTol);

absl::StatusOr<EpsBound> EpsUpperNumeric(double eps0, int64_t n, double delta,
                                         const BoundVariant& variant,
                                         const NumericOptions& options = {});

// Closed form ln(1 + (e^eps0 - 1)(4 sqrt(2 ln(4/delta)) / sqrt((e^eps0+1) n)
// + 4/n)). FailedPrecondition unless eps0 <= ln(n / (8 ln(2/delta)) - 1).
absl::StatusOr<AdpPoint> EpsUpperAnalytic(double eps0, int64_t n,
                                          double delta);

// Privacy-loss tail level of BuildPairBinaryMixture:
// ln(1 + tanh(eps0/2) (sqrt(32 ln(4/delta)) / sqrt(p n) + 4/(p n))).
// eps0 = +infinity drops the tanh factor. FailedPrecondition unless
// n >= 8 ln(2/delta) / p.
absl::StatusOr<double> TailEps(double eps0, int64_t n, double p, double delta);

// Upper end of the Renyi enclosure of the variant's pair.
absl::StatusOr<double> RdpUpperNumeric(double eps0, int64_t n, double alpha,
                                       const BoundVariant& variant,
                                       double trunc = kDefaultRdpTrunc);
absl::StatusOr<std::vector<Enclosure>> RdpCurveNumeric(
    double eps0, int64_t n, absl::Span<const double> alphas,
    const BoundVariant& variant, double trunc = kDefaultRdpTrunc);

// alpha c (1 - e^{-eps0})^2 e^eps0 / n, for 1 < alpha < n / (32 eps0 e^eps0).
// The default c = 6 * 16^2 follows sigma = 16 sqrt(e^eps0 / n) and
// D^alpha <= 6 alpha sigma^2.
absl::StatusOr<double> RdpUpperClosedForm(double eps0, int64_t n, double alpha,
                                          double c = kDefaultRdpConstant);

struct AdpToRdpResult {
  double value = 0.0;
  // delta_min <= e^{-alpha eps0} alpha^2 sigma^2 / 4, under which value is at
  // most `simplified` = 3 alpha^2 sigma^2 / (alpha - 1).
  bool condition_holds = false;
  double simplified = 0.0;
};

// (1/(alpha-1)) ln(e^{2 alpha^2 sigma^2} + 4 delta_min e^{alpha eps0}).
absl::StatusOr<AdpToRdpResult> AdpToRdp(const SubGaussianTail& tail,
                                        double alpha);

// Pairs used for k-ary randomized response. Upper: the 4-symbol pair with
// p = 1/(e+k-1), q = (k-2)/(e+k-1) (3-symbol when k = 2). Lower: the
// 3-symbol pair at p = 1/(e+k-1), or BuildPairBinaryRR when k = 2.
absl::StatusOr<DistPair> BuildKrrUpperPair(double eps0, int k, int64_t n,
                                           double trunc);
absl::StatusOr<DistPair> BuildKrrLowerPair(double eps0, int k, int64_t n,
                                           double trunc);

absl::StatusOr<EpsBound> KrrUpperEps(double eps0, int k, int64_t n,
                                     double delta,
                                     const NumericOptions& options = {});
absl::StatusOr<Enclosure> KrrUpperRdp(double eps0, int k, int64_t n,
                                      double alpha,
                                      double trunc = kDefaultRdpTrunc);
absl::StatusOr<EpsBound> KrrLowerEps(double eps0, int k, int64_t n,
                                     double delta,
                                     const NumericOptions& options = {});
absl::StatusOr<Enclosure> KrrLowerRdp(double eps0, int k, int64_t n,
                                      double alpha,
                                      double trunc = kDefaultRdpTrunc);

// Largest certified Renyi lower bound among shuffled binary and ternary
// randomized response, one value per alpha. Any general upper bound must sit
// above these.
absl::StatusOr<std::vector<double>> RdpLowerCurve(
    double eps0, int64_t n, absl::Span<const double> alphas,
    double trunc = kDefaultRdpTrunc);

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_BOUNDS_H_
