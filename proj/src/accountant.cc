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

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_format.h"

namespace shuffle_amp {

absl::Status RdpCurve::Validate() const {
  if (alphas.size() != eps.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("curve has %d orders but %d values", alphas.size(),
                        eps.size()));
  }
  for (size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 1.0) || (i > 0 && !(alphas[i] > alphas[i - 1]))) {
      return absl::InvalidArgumentError(
          "orders must exceed 1 and increase strictly");
    }
    if (!(eps[i] >= 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("eps(%g) = %g is negative", alphas[i], eps[i]));
    }
  }
  return absl::OkStatus();
}

std::string RdpCurve::ToCsv() const {
  std::string out = "alpha,eps\n";
  for (size_t i = 0; i < alphas.size(); ++i) {
    absl::StrAppendFormat(&out, "%.15e,%.15e\n", alphas[i], eps[i]);
  }
  return out;
}

std::vector<double> DefaultAlphaGrid() {
  std::vector<double> grid;
  for (int j = 0;; ++j) {
    const double a = 1.25 * std::exp2(j / 4.0);
    if (a > 1024.0) break;
    grid.push_back(a);
  }
  for (int a = 2; a <= 64; ++a) grid.push_back(a);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

absl::StatusOr<RdpCurve> ComposeRdp(absl::Span<const RdpCurve> curves) {
  RdpCurve out;
  if (curves.empty()) {
    out.alphas = DefaultAlphaGrid();
    out.eps.assign(out.alphas.size(), 0.0);
    out.provenance = "zero";
    return out;
  }
  out.alphas = curves.front().alphas;
  out.eps.assign(out.alphas.size(), 0.0);
  for (size_t c = 0; c < curves.size(); ++c) {
    if (absl::Status st = curves[c].Validate(); !st.ok()) return st;
    if (curves[c].alphas != out.alphas) {
      return absl::InvalidArgumentError(
          absl::StrFormat("curve %d uses a different order grid", c));
    }
    for (size_t i = 0; i < out.eps.size(); ++i) out.eps[i] += curves[c].eps[i];
  }
  out.provenance = curves.size() == 1
                       ? curves.front().provenance
                       : absl::StrFormat("compose(%d)", curves.size());
  return out;
}

RdpCurve ComposeRepeated(const RdpCurve& curve, int64_t rounds) {
  RdpCurve out = curve;
  for (double& e : out.eps) e *= static_cast<double>(rounds);
  out.provenance = absl::StrFormat("%s x%d", curve.provenance, rounds);
  return out;
}

absl::StatusOr<RdpConversion> RdpToAdp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta=%g must lie in (0, 1)", delta));
  }
  if (absl::Status st = curve.Validate(); !st.ok()) return st;
  if (curve.alphas.empty()) {
    return absl::InvalidArgumentError("curve has no orders");
  }
  RdpConversion best;
  best.point.delta = delta;
  best.point.eps = std::numeric_limits<double>::infinity();
  const double ln_delta = std::log(delta);
  for (size_t i = 0; i < curve.alphas.size(); ++i) {
    const double a = curve.alphas[i];
    const double v = curve.eps[i] + (-std::log(a) - ln_delta) / (a - 1.0) +
                     std::log1p(-1.0 / a);
    if (v < best.point.eps) {
      best.point.eps = v;
      best.alpha = a;
    }
  }
  best.point.eps = std::max(0.0, best.point.eps);
  return best;
}

absl::StatusOr<AdpPoint> AdvancedComposition(double eps, double delta,
                                             int64_t rounds,
                                             double delta_prime) {
  if (rounds < 1 || !(eps >= 0.0) || !(delta >= 0.0 && delta <= 1.0) ||
      !(delta_prime > 0.0 && delta_prime < 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need T >= 1, eps >= 0, delta in [0,1], delta' in (0,1); got T=%d "
        "eps=%g delta=%g delta'=%g",
        rounds, eps, delta, delta_prime));
  }
  const double t = static_cast<double>(rounds);
  return AdpPoint{
      eps * std::sqrt(2.0 * t * std::log(1.0 / delta_prime)) +
          t * eps * std::expm1(eps),
      t * delta + delta_prime};
}

absl::StatusOr<CompositionComparison> CompareComposition(
    const RdpCurve& curve,
    const std::function<absl::StatusOr<double>(double)>& per_round_eps,
    absl::Span<const int64_t> rounds, double delta) {
  if (rounds.empty()) return absl::InvalidArgumentError("empty T grid");
  CompositionComparison out;
  for (int64_t t : rounds) {
    if (t < 1) return absl::InvalidArgumentError("T must be >= 1");
    CompositionRow row;
    row.rounds = t;
    absl::StatusOr<RdpConversion> rdp =
        RdpToAdp(ComposeRepeated(curve, t), delta);
    if (!rdp.ok()) return rdp.status();
    row.rdp_eps = rdp->point.eps;
    row.rdp_alpha = rdp->alpha;
    const double delta_round = delta / (2.0 * static_cast<double>(t));
    absl::StatusOr<double> eps_round = per_round_eps(delta_round);
    if (!eps_round.ok()) return eps_round.status();
    absl::StatusOr<AdpPoint> adv =
        AdvancedComposition(*eps_round, delta_round, t, delta / 2.0);
    if (!adv.ok()) return adv.status();
    row.advanced_eps = adv->eps;
    out.rows.push_back(row);
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const CompositionRow& a, const CompositionRow& b) {
              return a.rounds < b.rounds;
            });
  for (size_t i = out.rows.size(); i-- > 0;) {
    if (!(out.rows[i].rdp_eps < out.rows[i].advanced_eps)) break;
    out.crossover = out.rows[i].rounds;
  }
  return out;
}

}  // namespace shuffle_amp
