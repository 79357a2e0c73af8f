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

// Divergences between two CountDists, returned as enclosures that stay valid
// when both supports are truncated.
//
// An atom missing from a distribution (outside its rows, or stored as
// -infinity) has unknown mass in [0, dropped_tail]. The enclosures below use
// that range and nothing else, so they hold for every completion of the
// truncated supports that respects max_ratio_bound.
//
// The parallel kernels split work by row and add the per-row partial sums in
// row order, so results do not depend on the thread count. The functions in
// namespace `reference` walk atoms one at a time with a lookup into the other
// distribution; they exist to cross-check the kernels.

#ifndef SHUFFLE_AMP_DIVERGENCE_H_
#define SHUFFLE_AMP_DIVERGENCE_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "shuffle_amp/count_dist.h"

namespace shuffle_amp {

struct Enclosure {
  double lower = 0.0;
  double upper = 0.0;
  std::string slack_source;

  double width() const { return upper - lower; }
  bool Contains(double v, double tol = 0.0) const {
    return v >= lower - tol && v <= upper + tol;
  }
};

// sum_x max(0, P(x) - e^eps Q(x)).
absl::StatusOr<Enclosure> HockeyStick(const CountDist& p, const CountDist& q,
                                      double eps);

// (1/(alpha-1)) ln E_Q[(P/Q)^alpha] for alpha > 1. A retained P atom with no
// retained Q atom is an error.
absl::StatusOr<Enclosure> Renyi(const CountDist& p, const CountDist& q,
                                double alpha);

// Renyi for several orders in one pass over the atoms.
absl::StatusOr<std::vector<Enclosure>> RenyiCurve(
    const CountDist& p, const CountDist& q, absl::Span<const double> alphas);

// KL(P || Q).
absl::StatusOr<Enclosure> KullbackLeibler(const CountDist& p,
                                          const CountDist& q);

// Pr_{x ~ Q}[ |ln(P(x)/Q(x))| > eps ]. Atoms whose loss lies within 1e-12 of
// eps count toward the upper end only.
absl::StatusOr<Enclosure> PrivacyLossTail(const CountDist& p,
                                          const CountDist& q, double eps);

namespace reference {

absl::StatusOr<Enclosure> HockeyStick(const CountDist& p, const CountDist& q,
                                      double eps);
absl::StatusOr<Enclosure> Renyi(const CountDist& p, const CountDist& q,
                                double alpha);
absl::StatusOr<Enclosure> KullbackLeibler(const CountDist& p,
                                          const CountDist& q);
absl::StatusOr<Enclosure> PrivacyLossTail(const CountDist& p,
                                          const CountDist& q, double eps);

}  // namespace reference
}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_DIVERGENCE_H_
