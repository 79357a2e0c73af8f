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

// Renyi-curve composition and conversion to (eps, delta).

#ifndef SHUFFLE_AMP_ACCOUNTANT_H_
#define SHUFFLE_AMP_ACCOUNTANT_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "shuffle_amp/bounds.h"

namespace shuffle_amp {

struct RdpCurve {
  std::vector<double> alphas;  // strictly increasing, all > 1
  std::vector<double> eps;     // eps[i] >= 0 at alphas[i]
  std::string provenance;

  absl::Status Validate() const;
  // "alpha,eps" header then one row per order.
  std::string ToCsv() const;
};

// 1.25 * 2^{j/4} up to 1024 together with the integers 2..64, sorted.
std::vector<double> DefaultAlphaGrid();

// Pointwise sum. The empty list gives the zero curve on DefaultAlphaGrid().
absl::StatusOr<RdpCurve> ComposeRdp(absl::Span<const RdpCurve> curves);
RdpCurve ComposeRepeated(const RdpCurve& curve, int64_t rounds);

struct RdpConversion {
  AdpPoint point;
  double alpha = 0.0;  // order attaining the minimum
};

// min over the grid of eps(a) + ln(1/(a delta))/(a-1) + ln(1 - 1/a),
// clamped at 0.
absl::StatusOr<RdpConversion> RdpToAdp(const RdpCurve& curve, double delta);

// (eps sqrt(2T ln(1/delta')) + T eps (e^eps - 1), T delta + delta').
absl::StatusOr<AdpPoint> AdvancedComposition(double eps, double delta,
                                             int64_t rounds,
                                             double delta_prime);

struct CompositionRow {
  int64_t rounds = 0;
  double rdp_eps = 0.0;
  double rdp_alpha = 0.0;
  double advanced_eps = 0.0;
};

struct CompositionComparison {
  std::vector<CompositionRow> rows;
  // Smallest T in the grid from which the Renyi route stays below advanced
  // composition; 0 when there is none.
  int64_t crossover = 0;
};

// Both routes target total failure probability `delta`. The Renyi route
// converts the T-fold composition of `curve` at delta. Advanced composition
// spends delta/2 as delta' and runs each round at delta/(2T), with the
// per-round eps taken from `per_round_eps(delta_round)`.
absl::StatusOr<CompositionComparison> CompareComposition(
    const RdpCurve& curve,
    const std::function<absl::StatusOr<double>(double)>& per_round_eps,
    absl::Span<const int64_t> rounds, double delta);

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_ACCOUNTANT_H_
