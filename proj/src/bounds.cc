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

#include "shuffle_amp/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace shuffle_amp {
namespace {

absl::Status CheckDelta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta=%g must lie in (0, 1)", delta));
  }
  return absl::OkStatus();
}

absl::Status CheckEps0(double eps0) {
  if (!(eps0 >= 0.0) || !std::isfinite(eps0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps0=%g must be finite and >= 0", eps0));
  }
  return absl::OkStatus();
}

Enclosure MaxOf(const Enclosure& a, const Enclosure& b) {
  Enclosure out;
  out.lower = std::max(a.lower, b.lower);
  out.upper = std::max(a.upper, b.upper);
  out.slack_source = a.slack_source;
  return out;
}

// Wraps a fallible evaluation for BisectMonotone, remembering the first error.
class Probe {
 public:
  template <typename F>
  std::function<double(double)> Wrap(F&& f) {
    return [this, f](double x) -> double {
      absl::StatusOr<double> v = f(x);
      if (!v.ok()) {
        if (status_.ok()) status_ = v.status();
        return std::numeric_limits<double>::quiet_NaN();
      }
      return *v;
    };
  }
  const absl::Status& status() const { return status_; }

 private:
  absl::Status status_;
};

absl::StatusOr<DistPair> BuildKrrPair(double eps0, int k, int64_t n,
                                      double trunc, bool upper) {
  if (absl::Status st = CheckEps0(eps0); !st.ok()) return st;
  if (k < 2) {
    return absl::InvalidArgumentError(absl::StrFormat("k=%d must be >= 2", k));
  }
  const double e = std::exp(eps0);
  const double p = 1.0 / (e + k - 1.0);
  if (upper) {
    if (k == 2) return BuildPair3Sym({eps0, n, p, 0.0}, trunc);
    return BuildPair4Sym({eps0, n, p, (k - 2.0) / (e + k - 1.0)}, trunc);
  }
  if (k == 2) return BuildPairBinaryRR(eps0, n, trunc);
  return BuildPair3Sym({eps0, n, p, 0.0}, trunc);
}

}  // namespace

BoundVariant BoundVariant::GeneralExtremal(ExtremalClassAck) {
  return BoundVariant(Kind::kGeneralExtremal, 0.0, 0.0, -1.0);
}

absl::StatusOr<BoundVariant> BoundVariant::GeneralExtremal(
    const DecompositionResult& witness) {
  const double target = 1.0 / (std::exp(witness.eps0) + 1.0);
  if (std::fabs(witness.p - target) > 1e-9 || witness.residual > 1e-10) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "witness has p=%.12g (need %.12g) and residual %.3g; it does not "
        "place the randomizer in the class the general bound covers",
        witness.p, target, witness.residual));
  }
  return BoundVariant(Kind::kGeneralExtremal, 0.0, 0.0, witness.eps0);
}

BoundVariant BoundVariant::Fmt20() {
  return BoundVariant(Kind::kFmt20, 0.0, 0.0, -1.0);
}

BoundVariant BoundVariant::Custom(double p, double q) {
  return BoundVariant(Kind::kCustom, p, q, -1.0);
}

BoundVariant BoundVariant::Custom(const DecompositionResult& decomposition) {
  return BoundVariant(Kind::kCustom, decomposition.p, decomposition.q,
                      decomposition.eps0);
}

std::string BoundVariant::name() const {
  switch (kind_) {
    case Kind::kGeneralExtremal:
      return "general-extremal";
    case Kind::kFmt20:
      return "fmt20";
    case Kind::kCustom:
      return "custom";
  }
  return "unknown";
}

absl::StatusOr<DistPair> BoundVariant::BuildPair(double eps0, int64_t n,
                                                 double trunc) const {
  if (absl::Status st = CheckEps0(eps0); !st.ok()) return st;
  if (witness_eps0_ >= 0.0 && std::fabs(witness_eps0_ - eps0) > 1e-12) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "variant was derived at eps0=%.17g but queried at %.17g",
        witness_eps0_, eps0));
  }
  switch (kind_) {
    case Kind::kGeneralExtremal:
      return BuildPair3Sym({eps0, n, 1.0 / (std::exp(eps0) + 1.0), 0.0},
                           trunc);
    case Kind::kFmt20:
      return BuildPairFmt20(eps0, n, trunc);
    case Kind::kCustom:
      if (q_ > 0.0) return BuildPair4Sym({eps0, n, p_, q_}, trunc);
      return BuildPair3Sym({eps0, n, p_, 0.0}, trunc);
  }
  return absl::InternalError("unknown variant");
}

absl::StatusOr<Enclosure> PairEvaluator::Delta(double eps) const {
  absl::StatusOr<Enclosure> forward = HockeyStick(pair_.p, pair_.q, eps);
  if (!forward.ok()) return forward.status();
  // Exchanging n0 and n1 maps (P, Q) onto (Q, P).
  if (pair_.p.IsMirrorOf(pair_.q)) return forward;
  absl::StatusOr<Enclosure> backward = HockeyStick(pair_.q, pair_.p, eps);
  if (!backward.ok()) return backward.status();
  return MaxOf(*forward, *backward);
}

absl::StatusOr<std::vector<Enclosure>> PairEvaluator::Renyi(
    absl::Span<const double> alphas) const {
  absl::StatusOr<std::vector<Enclosure>> forward =
      RenyiCurve(pair_.p, pair_.q, alphas);
  if (!forward.ok()) return forward.status();
  if (pair_.p.IsMirrorOf(pair_.q)) return forward;
  absl::StatusOr<std::vector<Enclosure>> backward =
      RenyiCurve(pair_.q, pair_.p, alphas);
  if (!backward.ok()) return backward.status();
  std::vector<Enclosure> out;
  out.reserve(alphas.size());
  for (size_t i = 0; i < alphas.size(); ++i) {
    out.push_back(MaxOf((*forward)[i], (*backward)[i]));
  }
  return out;
}

absl::StatusOr<EpsBound> EpsUpperFromPair(const PairEvaluator& evaluator,
                                          double eps0, double delta,
                                          double tol) {
  if (absl::Status st = CheckDelta(delta); !st.ok()) return st;
  if (absl::Status st = CheckEps0(eps0); !st.ok()) return st;
  EpsBound out;
  out.point.delta = delta;
  absl::StatusOr<Enclosure> at_zero = evaluator.Delta(0.0);
  if (!at_zero.ok()) return at_zero.status();
  if (at_zero->upper <= delta) {
    out.delta_at_eps = *at_zero;
    return out;
  }
  absl::StatusOr<Enclosure> at_top = evaluator.Delta(eps0);
  if (!at_top.ok()) return at_top.status();
  if (at_top->upper > delta) {
    out.point.eps = eps0;
    out.bracket = {eps0, eps0};
    out.delta_at_eps = *at_top;
    out.infeasible_delta = true;
    return out;
  }
  Probe probe;
  auto f = probe.Wrap([&](double eps) -> absl::StatusOr<double> {
    absl::StatusOr<Enclosure> d = evaluator.Delta(eps);
    if (!d.ok()) return d.status();
    return d->upper;
  });
  absl::StatusOr<Bracket> bracket = BisectMonotone(f, delta, 0.0, eps0, tol);
  if (!probe.status().ok()) return probe.status();
  if (!bracket.ok()) return bracket.status();
  out.bracket = *bracket;
  out.point.eps = bracket->hi;
  absl::StatusOr<Enclosure> at_eps = evaluator.Delta(out.point.eps);
  if (!at_eps.ok()) return at_eps.status();
  out.delta_at_eps = *at_eps;
  return out;
}

absl::StatusOr<EpsBound> EpsLowerFromPair(const PairEvaluator& evaluator,
                                          double eps0, double delta,
                                          double tol) {
  if (absl::Status st = CheckDelta(delta); !st.ok()) return st;
  if (absl::Status st = CheckEps0(eps0); !st.ok()) return st;
  EpsBound out;
  out.point.delta = delta;
  absl::StatusOr<Enclosure> at_zero = evaluator.Delta(0.0);
  if (!at_zero.ok()) return at_zero.status();
  if (at_zero->lower <= delta) {
    out.delta_at_eps = *at_zero;
    return out;
  }
  Probe probe;
  auto f = probe.Wrap([&](double eps) -> absl::StatusOr<double> {
    absl::StatusOr<Enclosure> d = evaluator.Delta(eps);
    if (!d.ok()) return d.status();
    return d->lower;
  });
  absl::StatusOr<Bracket> bracket = BisectMonotone(f, delta, 0.0, eps0, tol);
  if (!probe.status().ok()) return probe.status();
  if (!bracket.ok()) return bracket.status();
  out.bracket = *bracket;
  out.point.eps = bracket->lo;
  absl::StatusOr<Enclosure> at_eps = evaluator.Delta(out.point.eps);
  if (!at_eps.ok()) return at_eps.status();
  out.delta_at_eps = *at_eps;
  return out;
}

absl::StatusOr<EpsBound> EpsUpperNumeric(double eps0, int64_t n, double delta,
                                         const BoundVariant& variant,
                                         const NumericOptions& options) {
  if (absl::Status st = CheckDelta(delta); !st.ok()) return st;
  absl::StatusOr<DistPair> pair = variant.BuildPair(eps0, n, options.trunc);
  if (!pair.ok()) return pair.status();
  PairEvaluator evaluator(*std::move(pair));
  return EpsUpperFromPair(evaluator, eps0, delta, options.tol);
}

absl::StatusOr<AdpPoint> EpsUpperAnalytic(double eps0, int64_t n,
                                          double delta) {
  if (absl::Status st = CheckEps0(eps0); !st.ok()) return st;
  if (!(delta > 0.0 && delta <= 1.0) || n < 1) {
    return absl::InvalidArgumentError("need delta in (0, 1] and n >= 1");
  }
  const double nd = static_cast<double>(n);
  const double ratio = nd / (8.0 * std::log(2.0 / delta)) - 1.0;
  if (!(ratio > 0.0) || eps0 > std::log(ratio)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "closed form needs eps0 <= ln(n/(8 ln(2/delta)) - 1)%s, got %g",
        ratio > 0.0 ? absl::StrFormat(" = %.6g", std::log(ratio))
                    : std::string(", which no eps0 meets at this n and delta"),
        eps0));
  }
  const double e = std::exp(eps0);
  const double inner = 4.0 * std::sqrt(2.0 * std::log(4.0 / delta)) /
                           std::sqrt((e + 1.0) * nd) +
                       4.0 / nd;
  return AdpPoint{std::log1p(std::expm1(eps0) * inner), delta};
}

absl::StatusOr<double> TailEps(double eps0, int64_t n, double p,
                               double delta) {
  if (!(eps0 >= 0.0)) return absl::InvalidArgumentError("eps0 must be >= 0");
  if (!(delta > 0.0 && delta <= 1.0) || n < 1) {
    return absl::InvalidArgumentError("need delta in (0, 1] and n >= 1");
  }
  const double p_max =
      std::isinf(eps0) ? 0.5 : 1.0 / (std::exp(eps0) + 1.0);
  if (!(p > 0.0) || p > p_max * (1.0 + 1e-12)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("p=%g outside (0, %g]", p, p_max));
  }
  const double pn = p * static_cast<double>(n);
  if (pn < 8.0 * std::log(2.0 / delta)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "tail bound needs n >= 8 ln(2/delta)/p = %.6g, got %d",
        8.0 * std::log(2.0 / delta) / p, n));
  }
  const double factor = std::isinf(eps0) ? 1.0 : std::tanh(eps0 / 2.0);
  return std::log1p(factor * (std::sqrt(32.0 * std::log(4.0 / delta)) /
                                  std::sqrt(pn) +
                              4.0 / pn));
}

absl::StatusOr<std::vector<Enclosure>> RdpCurveNumeric(
    double eps0, int64_t n, absl::Span<const double> alphas,
    const BoundVariant& variant, double trunc) {
  absl::StatusOr<DistPair> pair = variant.BuildPair(eps0, n, trunc);
  if (!pair.ok()) return pair.status();
  return PairEvaluator(*std::move(pair)).Renyi(alphas);
}

absl::StatusOr<double> RdpUpperNumeric(double eps0, int64_t n, double alpha,
                                       const BoundVariant& variant,
                                       double trunc) {
  const double alphas[] = {alpha};
  absl::StatusOr<std::vector<Enclosure>> curve =
      RdpCurveNumeric(eps0, n, alphas, variant, trunc);
  if (!curve.ok()) return curve.status();
  return curve->front().upper;
}

absl::StatusOr<double> RdpUpperClosedForm(double eps0, int64_t n, double alpha,
                                          double c) {
  if (absl::Status st = CheckEps0(eps0); !st.ok()) return st;
  if (n < 1 || !(c > 0.0)) {
    return absl::InvalidArgumentError("need n >= 1 and c > 0");
  }
  if (!(alpha > 1.0)) {
    return absl::OutOfRangeError(absl::StrFormat("alpha=%g must be > 1", alpha));
  }
  const double nd = static_cast<double>(n);
  if (eps0 > 0.0) {
    const double limit = nd / (32.0 * eps0 * std::exp(eps0));
    if (!(alpha < limit)) {
      return absl::OutOfRangeError(absl::StrFormat(
          "alpha=%g must be below n/(32 eps0 e^eps0) = %.6g", alpha, limit));
    }
  }
  const double shrink = -std::expm1(-eps0);
  return alpha * c * shrink * shrink * std::exp(eps0) / nd;
}

absl::StatusOr<AdpToRdpResult> AdpToRdp(const SubGaussianTail& tail,
                                        double alpha) {
  if (!(alpha > 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha=%g must be > 1", alpha));
  }
  if (!(tail.sigma >= 0.0) || !(tail.delta_min >= 0.0) ||
      tail.delta_min > 1.0 || !(tail.eps0 >= 0.0)) {
    return absl::InvalidArgumentError("invalid sub-Gaussian tail parameters");
  }
  const double x = alpha * alpha * tail.sigma * tail.sigma;
  LogProb extra = tail.delta_min > 0.0 ? std::log(4.0 * tail.delta_min) +
                                             alpha * tail.eps0
                                       : kLogZero;
  AdpToRdpResult out;
  out.value = LogAdd(2.0 * x, extra) / (alpha - 1.0);
  out.simplified = 3.0 * x / (alpha - 1.0);
  out.condition_holds =
      tail.delta_min <= std::exp(-alpha * tail.eps0) * x / 4.0;
  if (out.condition_holds && out.value > out.simplified * (1.0 + 1e-12)) {
    return absl::InternalError(absl::StrFormat(
        "moment bound %.17g exceeds 3 alpha^2 sigma^2/(alpha-1) = %.17g",
        out.value, out.simplified));
  }
  return out;
}

absl::StatusOr<DistPair> BuildKrrUpperPair(double eps0, int k, int64_t n,
                                           double trunc) {
  return BuildKrrPair(eps0, k, n, trunc, /*upper=*/true);
}

absl::StatusOr<DistPair> BuildKrrLowerPair(double eps0, int k, int64_t n,
                                           double trunc) {
  return BuildKrrPair(eps0, k, n, trunc, /*upper=*/false);
}

absl::StatusOr<EpsBound> KrrUpperEps(double eps0, int k, int64_t n,
                                     double delta,
                                     const NumericOptions& options) {
  if (absl::Status st = CheckDelta(delta); !st.ok()) return st;
  absl::StatusOr<DistPair> pair = BuildKrrUpperPair(eps0, k, n, options.trunc);
  if (!pair.ok()) return pair.status();
  return EpsUpperFromPair(PairEvaluator(*std::move(pair)), eps0, delta,
                          options.tol);
}

absl::StatusOr<Enclosure> KrrUpperRdp(double eps0, int k, int64_t n,
                                      double alpha, double trunc) {
  absl::StatusOr<DistPair> pair = BuildKrrUpperPair(eps0, k, n, trunc);
  if (!pair.ok()) return pair.status();
  const double alphas[] = {alpha};
  absl::StatusOr<std::vector<Enclosure>> r =
      PairEvaluator(*std::move(pair)).Renyi(alphas);
  if (!r.ok()) return r.status();
  return r->front();
}

absl::StatusOr<EpsBound> KrrLowerEps(double eps0, int k, int64_t n,
                                     double delta,
                                     const NumericOptions& options) {
  if (absl::Status st = CheckDelta(delta); !st.ok()) return st;
  absl::StatusOr<DistPair> pair = BuildKrrLowerPair(eps0, k, n, options.trunc);
  if (!pair.ok()) return pair.status();
  return EpsLowerFromPair(PairEvaluator(*std::move(pair)), eps0, delta,
                          options.tol);
}

absl::StatusOr<Enclosure> KrrLowerRdp(double eps0, int k, int64_t n,
                                      double alpha, double trunc) {
  absl::StatusOr<DistPair> pair = BuildKrrLowerPair(eps0, k, n, trunc);
  if (!pair.ok()) return pair.status();
  const double alphas[] = {alpha};
  absl::StatusOr<std::vector<Enclosure>> r =
      PairEvaluator(*std::move(pair)).Renyi(alphas);
  if (!r.ok()) return r.status();
  return r->front();
}

absl::StatusOr<std::vector<double>> RdpLowerCurve(
    double eps0, int64_t n, absl::Span<const double> alphas, double trunc) {
  std::vector<double> best(alphas.size(), 0.0);
  for (int k : {2, 3}) {
    absl::StatusOr<DistPair> pair = BuildKrrLowerPair(eps0, k, n, trunc);
    if (!pair.ok()) return pair.status();
    absl::StatusOr<std::vector<Enclosure>> r =
        PairEvaluator(*std::move(pair)).Renyi(alphas);
    if (!r.ok()) return r.status();
    for (size_t i = 0; i < alphas.size(); ++i) {
      best[i] = std::max(best[i], (*r)[i].lower);
    }
  }
  return best;
}

}  // namespace shuffle_amp
