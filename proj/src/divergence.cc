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

#include "shuffle_amp/divergence.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <optional>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace shuffle_amp {
namespace {

constexpr double kTieTolerance = 1e-12;

absl::Status CheckArity(const CountDist& p, const CountDist& q) {
  if (p.arity() != q.arity()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "arity mismatch: P has %d, Q has %d", p.arity(), q.arity()));
  }
  return absl::OkStatus();
}

absl::Status CheckAlpha(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha=%g must be finite and > 1", alpha));
  }
  return absl::OkStatus();
}

absl::Status MissingQAtom() {
  return absl::FailedPreconditionError(
      "P has a retained atom where Q has none; the Renyi divergence is not "
      "certifiable");
}

double SafeExp(LogProb x) { return x == kLogZero ? 0.0 : std::exp(x); }

// max(0, e^lp - e^{eps + lq}).
double HockeyTerm(LogProb lp, LogProb eps_plus_lq) {
  if (eps_plus_lq == kLogZero) return std::exp(lp);
  double x = eps_plus_lq - lp;
  if (x >= 0.0) return 0.0;
  return std::exp(lp) * -std::expm1(x);
}

struct HockeySums {
  CompensatedSum lower;
  CompensatedSum upper;
};

// Contribution of one P atom. A missing Q atom is bounded by Q's tail.
void AddHockeyAtom(LogProb lp, LogProb lq, double eps, LogProb q_tail,
                   HockeySums& sums) {
  if (lq != kLogZero) {
    double t = HockeyTerm(lp, eps + lq);
    sums.lower += t;
    sums.upper += t;
    return;
  }
  sums.upper += std::exp(lp);
  sums.lower += HockeyTerm(lp, q_tail == kLogZero ? kLogZero : eps + q_tail);
}

Enclosure FinishHockey(const HockeySums& sums, const CountDist& p) {
  Enclosure out;
  out.lower = sums.lower.value();
  out.upper = std::min(1.0, sums.upper.value() + SafeExp(p.dropped_tail()));
  out.upper = std::max(out.upper, out.lower);
  out.slack_source =
      absl::StrFormat("P.dropped_tail=%.3e", SafeExp(p.dropped_tail()));
  return out;
}

Enclosure FinishRenyi(LogProb ln_moment, double alpha, const CountDist& p) {
  const double ln_m = std::log(p.max_ratio_bound());
  Enclosure out;
  out.lower = std::max(0.0, ln_moment / (alpha - 1.0));
  LogProb slack = p.dropped_tail() == kLogZero
                      ? kLogZero
                      : p.dropped_tail() + (alpha - 1.0) * ln_m;
  out.upper = LogAdd(ln_moment, slack) / (alpha - 1.0);
  out.upper = std::min(out.upper, ln_m);
  out.lower = std::min(out.lower, ln_m);
  out.upper = std::max(out.upper, out.lower);
  out.slack_source = absl::StrFormat(
      "P.dropped_tail * max_ratio^(alpha-1) = exp(%.6g)", slack);
  return out;
}

Enclosure FinishKl(double core, const CountDist& p) {
  const double slack = std::log(p.max_ratio_bound()) * SafeExp(p.dropped_tail());
  Enclosure out;
  out.lower = std::max(0.0, core - slack);
  out.upper = std::max(out.lower, core + slack);
  out.slack_source = absl::StrFormat("ln(max_ratio) * P.dropped_tail=%.3e",
                                     slack);
  return out;
}

struct TailSums {
  CompensatedSum lower;
  CompensatedSum upper;
};

// One Q atom of the privacy-loss tail. `lp` may be missing, in which case P's
// mass lies in [0, p_tail].
void AddTailAtom(LogProb lp, LogProb lq, double eps, LogProb p_tail,
                 TailSums& sums) {
  double mass = std::exp(lq);
  if (lp != kLogZero) {
    double loss = std::fabs(lp - lq);
    if (loss > eps + kTieTolerance) {
      sums.lower += mass;
      sums.upper += mass;
    } else if (loss > eps - kTieTolerance) {
      sums.upper += mass;
    }
    return;
  }
  sums.upper += mass;
  if (p_tail == kLogZero || p_tail - lq < -eps - kTieTolerance) {
    sums.lower += mass;
  }
}

Enclosure FinishTail(const TailSums& sums, const CountDist& q) {
  Enclosure out;
  out.lower = std::min(1.0, sums.lower.value());
  out.upper = std::min(1.0, sums.upper.value() + SafeExp(q.dropped_tail()));
  out.upper = std::max(out.upper, out.lower);
  out.slack_source =
      absl::StrFormat("Q.dropped_tail=%.3e", SafeExp(q.dropped_tail()));
  return out;
}

std::optional<CountDist::RowView> MatchingRow(const CountDist& d,
                                              CountDist::RowKey key) {
  std::optional<size_t> i = d.FindRow(key);
  if (!i.has_value()) return std::nullopt;
  return d.row(*i);
}

}  // namespace

absl::StatusOr<Enclosure> HockeyStick(const CountDist& p, const CountDist& q,
                                      double eps) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  if (!(eps >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat("eps=%g < 0", eps));
  }
  const int64_t rows = static_cast<int64_t>(p.num_rows());
  const LogProb q_tail = q.dropped_tail();
  std::vector<HockeySums> partial(rows);
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t r = 0; r < rows; ++r) {
    CountDist::RowView pv = p.row(r);
    std::optional<CountDist::RowView> qv = MatchingRow(q, pv.key);
    HockeySums sums;
    for (int64_t i = 0; i < pv.len; ++i) {
      LogProb lp = pv[i];
      if (lp == kLogZero) continue;
      LogProb lq = qv.has_value() ? qv->at(pv.lo + i) : kLogZero;
      AddHockeyAtom(lp, lq, eps, q_tail, sums);
    }
    partial[r] = sums;
  }
  HockeySums total;
  for (const HockeySums& s : partial) {
    total.lower += s.lower;
    total.upper += s.upper;
  }
  return FinishHockey(total, p);
}

absl::StatusOr<std::vector<Enclosure>> RenyiCurve(
    const CountDist& p, const CountDist& q, absl::Span<const double> alphas) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  for (double a : alphas) {
    if (absl::Status st = CheckAlpha(a); !st.ok()) return st;
  }
  const int64_t rows = static_cast<int64_t>(p.num_rows());
  const size_t num_alpha = alphas.size();
  // Per row and order: log of the row's share of E_Q[(P/Q)^alpha].
  std::vector<LogProb> partial(rows * num_alpha, kLogZero);
  std::atomic<bool> missing{false};
#pragma omp parallel
  {
    std::vector<double> lps;
    std::vector<double> losses;
#pragma omp for schedule(dynamic, 16)
    for (int64_t r = 0; r < rows; ++r) {
      CountDist::RowView pv = p.row(r);
      std::optional<CountDist::RowView> qv = MatchingRow(q, pv.key);
      lps.clear();
      losses.clear();
      for (int64_t i = 0; i < pv.len; ++i) {
        LogProb lp = pv[i];
        if (lp == kLogZero) continue;
        LogProb lq = qv.has_value() ? qv->at(pv.lo + i) : kLogZero;
        if (lq == kLogZero) {
          missing.store(true, std::memory_order_relaxed);
          continue;
        }
        lps.push_back(lp);
        losses.push_back(lp - lq);
      }
      if (lps.empty()) continue;
      for (size_t a = 0; a < num_alpha; ++a) {
        // Q (P/Q)^alpha = P (P/Q)^(alpha-1).
        const double am1 = alphas[a] - 1.0;
        double hi = kLogZero;
        for (size_t j = 0; j < lps.size(); ++j) {
          hi = std::max(hi, lps[j] + am1 * losses[j]);
        }
        CompensatedSum sum;
        for (size_t j = 0; j < lps.size(); ++j) {
          sum += std::exp(lps[j] + am1 * losses[j] - hi);
        }
        partial[r * num_alpha + a] = hi + std::log(sum.value());
      }
    }
  }
  if (missing.load()) return MissingQAtom();
  std::vector<Enclosure> out;
  out.reserve(num_alpha);
  std::vector<LogProb> column(rows);
  for (size_t a = 0; a < num_alpha; ++a) {
    for (int64_t r = 0; r < rows; ++r) column[r] = partial[r * num_alpha + a];
    out.push_back(FinishRenyi(LogSumExp(column), alphas[a], p));
  }
  return out;
}

absl::StatusOr<Enclosure> Renyi(const CountDist& p, const CountDist& q,
                                double alpha) {
  const double alphas[] = {alpha};
  absl::StatusOr<std::vector<Enclosure>> curve = RenyiCurve(p, q, alphas);
  if (!curve.ok()) return curve.status();
  return curve->front();
}

absl::StatusOr<Enclosure> KullbackLeibler(const CountDist& p,
                                          const CountDist& q) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  const int64_t rows = static_cast<int64_t>(p.num_rows());
  std::vector<CompensatedSum> partial(rows);
  std::atomic<bool> missing{false};
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t r = 0; r < rows; ++r) {
    CountDist::RowView pv = p.row(r);
    std::optional<CountDist::RowView> qv = MatchingRow(q, pv.key);
    CompensatedSum sum;
    for (int64_t i = 0; i < pv.len; ++i) {
      LogProb lp = pv[i];
      if (lp == kLogZero) continue;
      LogProb lq = qv.has_value() ? qv->at(pv.lo + i) : kLogZero;
      if (lq == kLogZero) {
        missing.store(true, std::memory_order_relaxed);
        continue;
      }
      sum += std::exp(lp) * (lp - lq);
    }
    partial[r] = sum;
  }
  if (missing.load()) return MissingQAtom();
  CompensatedSum core;
  for (const CompensatedSum& s : partial) core += s;
  return FinishKl(core.value(), p);
}

absl::StatusOr<Enclosure> PrivacyLossTail(const CountDist& p,
                                          const CountDist& q, double eps) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  if (!(eps >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat("eps=%g < 0", eps));
  }
  const int64_t rows = static_cast<int64_t>(q.num_rows());
  const LogProb p_tail = p.dropped_tail();
  std::vector<TailSums> partial(rows);
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t r = 0; r < rows; ++r) {
    CountDist::RowView qv = q.row(r);
    std::optional<CountDist::RowView> pv = MatchingRow(p, qv.key);
    TailSums sums;
    for (int64_t i = 0; i < qv.len; ++i) {
      LogProb lq = qv[i];
      if (lq == kLogZero) continue;
      LogProb lp = pv.has_value() ? pv->at(qv.lo + i) : kLogZero;
      AddTailAtom(lp, lq, eps, p_tail, sums);
    }
    partial[r] = sums;
  }
  TailSums total;
  for (const TailSums& s : partial) {
    total.lower += s.lower;
    total.upper += s.upper;
  }
  return FinishTail(total, q);
}

namespace reference {

absl::StatusOr<Enclosure> HockeyStick(const CountDist& p, const CountDist& q,
                                      double eps) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  if (!(eps >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat("eps=%g < 0", eps));
  }
  HockeySums sums;
  p.ForEachAtom([&](const CountTuple& t, LogProb lp) {
    AddHockeyAtom(lp, q.LogMass(t), eps, q.dropped_tail(), sums);
  });
  return FinishHockey(sums, p);
}

absl::StatusOr<Enclosure> Renyi(const CountDist& p, const CountDist& q,
                                double alpha) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  if (absl::Status st = CheckAlpha(alpha); !st.ok()) return st;
  std::vector<double> terms;
  bool missing = false;
  p.ForEachAtom([&](const CountTuple& t, LogProb lp) {
    LogProb lq = q.LogMass(t);
    if (lq == kLogZero) {
      missing = true;
      return;
    }
    terms.push_back(alpha * lp - (alpha - 1.0) * lq);
  });
  if (missing) return MissingQAtom();
  return FinishRenyi(LogSumExp(terms), alpha, p);
}

absl::StatusOr<Enclosure> KullbackLeibler(const CountDist& p,
                                          const CountDist& q) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  CompensatedSum core;
  bool missing = false;
  p.ForEachAtom([&](const CountTuple& t, LogProb lp) {
    LogProb lq = q.LogMass(t);
    if (lq == kLogZero) {
      missing = true;
      return;
    }
    core += std::exp(lp) * (lp - lq);
  });
  if (missing) return MissingQAtom();
  return FinishKl(core.value(), p);
}

absl::StatusOr<Enclosure> PrivacyLossTail(const CountDist& p,
                                          const CountDist& q, double eps) {
  if (absl::Status st = CheckArity(p, q); !st.ok()) return st;
  if (!(eps >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat("eps=%g < 0", eps));
  }
  TailSums sums;
  q.ForEachAtom([&](const CountTuple& t, LogProb lq) {
    AddTailAtom(p.LogMass(t), lq, eps, p.dropped_tail(), sums);
  });
  return FinishTail(sums, q);
}

}  // namespace reference
}  // namespace shuffle_amp
