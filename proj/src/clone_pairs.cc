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

#include "shuffle_amp/clone_pairs.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "absl/strings/str_format.h"

namespace shuffle_amp {
namespace {

// Relative slack on the p <= 1/(e^eps0 + 1) check so that callers can pass
// the boundary value computed in floating point.
constexpr double kParamSlack = 1e-12;

struct MixtureSpec {
  int arity = 2;
  int64_t n = 1;
  double p_other = 0.0;  // per-symbol clone probability of each other user
  double q_other = 0.0;  // middle-symbol probability (arity 3 only)
  double w0 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double ratio_bound = 1.0;
};

absl::Status CheckTrunc(double trunc) {
  if (!(trunc >= 0.0) || trunc >= 1.0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("trunc=%g must lie in [0, 1)", trunc));
  }
  return absl::OkStatus();
}

// Retained region of the other users' outcome (C, A, N2). Ranges are indexed
// by C - c.lo.
struct OthersRegion {
  CountRange c;
  std::vector<CountRange> a;
  std::vector<CountRange> n2;
  LogProb ln_outside = kLogZero;
};

OthersRegion RetainOthers(const MixtureSpec& spec, double trunc) {
  const int64_t m = spec.n - 1;
  const double two_p = std::min(1.0, 2.0 * spec.p_other);
  const double theta2 =
      spec.arity == 3 ? std::min(1.0, spec.q_other / (1.0 - two_p)) : 0.0;
  const int levels = spec.arity == 3 ? 3 : 2;
  const double side = trunc / levels / 2.0;

  OthersRegion region;
  region.c = BinomCentralRange(m, two_p, side);
  region.ln_outside = region.c.ln_outside;
  for (int64_t c = region.c.lo; c <= region.c.hi; ++c) {
    CountRange a = SymmetricHalfRange(c, side);
    CountRange g{0, 0, kLogZero};
    if (spec.arity == 3) g = BinomCentralRange(m - c, theta2, side);
    region.a.push_back(a);
    region.n2.push_back(g);
    LogProb conditional_out = LogAdd(a.ln_outside, g.ln_outside);
    if (conditional_out != kLogZero) {
      region.ln_outside =
          LogAdd(region.ln_outside,
                 LnBinomPmfUnchecked(c, m, two_p) + conditional_out);
    }
  }
  return region;
}

struct PendingRow {
  CountDist::RowKey key;
  int64_t lo;
  int64_t hi;
};

void Widen(PendingRow& row, int64_t lo, int64_t hi) {
  row.lo = std::min(row.lo, lo);
  row.hi = std::max(row.hi, hi);
}

// Every atom reachable from a retained others-outcome plus one user-1 branch.
std::vector<PendingRow> EnumerateRows(const MixtureSpec& spec,
                                      const OthersRegion& region) {
  const bool shift01 = spec.w0 > 0.0 || spec.w1 > 0.0;
  const bool shift2 = spec.w2 > 0.0;
  const int64_t c_lo = region.c.lo;
  const int64_t c_hi = region.c.hi;
  auto in_c = [&](int64_t c) { return c >= c_lo && c <= c_hi; };
  std::vector<PendingRow> rows;
  for (int64_t s = c_lo; s <= std::min(spec.n, c_hi + 1); ++s) {
    const bool from01 = shift01 && in_c(s - 1);
    const bool from2 = shift2 && in_c(s);
    if (!from01 && !from2) continue;
    if (spec.arity == 2) {
      PendingRow row{{s, 0}, s + 1, -1};
      if (from01) {
        int64_t alo = region.a[s - 1 - c_lo].lo;
        Widen(row, alo, s - alo);
      }
      if (from2) {
        int64_t alo = region.a[s - c_lo].lo;
        Widen(row, alo, s - alo);
      }
      rows.push_back(row);
      continue;
    }
    int64_t g_lo = spec.n + 1;
    int64_t g_hi = -1;
    if (from01) {
      g_lo = std::min(g_lo, region.n2[s - 1 - c_lo].lo);
      g_hi = std::max(g_hi, region.n2[s - 1 - c_lo].hi);
    }
    if (from2) {
      g_lo = std::min(g_lo, region.n2[s - c_lo].lo + 1);
      g_hi = std::max(g_hi, region.n2[s - c_lo].hi + 1);
    }
    for (int64_t g = g_lo; g <= g_hi; ++g) {
      PendingRow row{{s, g}, s + 1, -1};
      if (from01) {
        const CountRange& nr = region.n2[s - 1 - c_lo];
        if (g >= nr.lo && g <= nr.hi) {
          int64_t alo = region.a[s - 1 - c_lo].lo;
          Widen(row, alo, s - alo);
        }
      }
      if (from2) {
        const CountRange& nr = region.n2[s - c_lo];
        if (g - 1 >= nr.lo && g - 1 <= nr.hi) {
          int64_t alo = region.a[s - c_lo].lo;
          Widen(row, alo, s - alo);
        }
      }
      if (row.hi >= row.lo) rows.push_back(row);
    }
  }
  return rows;
}

absl::StatusOr<DistPair> BuildMixturePair(const MixtureSpec& spec,
                                          double trunc) {
  if (absl::Status st = CheckTrunc(trunc); !st.ok()) return st;
  const int64_t m = spec.n - 1;
  const double two_p = std::min(1.0, 2.0 * spec.p_other);
  const double theta2 =
      spec.arity == 3 ? std::min(1.0, spec.q_other / (1.0 - two_p)) : 0.0;

  OthersRegion region = RetainOthers(spec, trunc);
  std::vector<PendingRow> pending = EnumerateRows(spec, region);

  auto storage = std::make_shared<CountDist::Storage>();
  storage->arity = spec.arity;
  storage->n = spec.n;
  storage->dropped_tail = region.ln_outside;
  storage->max_ratio_bound = spec.ratio_bound;
  storage->rows.reserve(pending.size());
  int64_t total = 0;
  for (const PendingRow& r : pending) {
    storage->rows.push_back({r.key, r.lo, r.hi - r.lo + 1, total});
    total += r.hi - r.lo + 1;
  }
  if (total > kDefaultMaxAtoms) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "clone pair support of %d atoms exceeds the cap of %d; raise trunc",
        total, kDefaultMaxAtoms));
  }
  storage->values.assign(total, kLogZero);

  const double ln_w2 = std::log(spec.w2);
  auto ln_pi = [&](int64_t c) { return LnBinomPmfUnchecked(c, m, two_p); };
  auto ln_gamma = [&](int64_t c, int64_t g) {
    if (spec.arity == 2) return 0.0;
    return LnBinomPmfUnchecked(g, m - c, theta2);
  };

  const int64_t num_rows = static_cast<int64_t>(storage->rows.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (int64_t r = 0; r < num_rows; ++r) {
    const CountDist::Row& row = storage->rows[r];
    const int64_t s = row.key.s;
    const int64_t g = row.key.n2;
    // Row-constant parts of the two mixture terms.
    LogProb head01 = kLogZero;
    if (s >= 1) {
      head01 = ln_pi(s - 1) + ln_gamma(s - 1, g) +
               std::log(2.0 / static_cast<double>(s));
    }
    LogProb head2 = kLogZero;
    if (spec.w2 > 0.0) {
      head2 = ln_w2 + ln_pi(s) + (spec.arity == 3 ? ln_gamma(s, g - 1) : 0.0);
    }
    double* out = storage->values.data() + row.offset;
    for (int64_t i = 0; i < row.len; ++i) {
      const int64_t n0 = row.lo + i;
      const int64_t n1 = s - n0;
      LogProb t01 = kLogZero;
      double weight = spec.w0 * static_cast<double>(n0) +
                      spec.w1 * static_cast<double>(n1);
      if (head01 != kLogZero && weight > 0.0) {
        t01 = head01 + std::log(weight);
      }
      LogProb mix = LogAdd(t01, head2);
      out[i] = mix == kLogZero ? kLogZero
                               : LnBinomPmfUnchecked(n0, s, 0.5) + mix;
    }
  }
  std::shared_ptr<const CountDist::Storage> shared = std::move(storage);
  return DistPair{CountDist(shared, false), CountDist(shared, true)};
}

double ExpEps(double eps0) { return std::exp(eps0); }

}  // namespace

absl::Status ValidateCloneParams(const CloneParams& params) {
  if (!(params.eps0 >= 0.0) || !std::isfinite(params.eps0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps0=%g must be finite and >= 0", params.eps0));
  }
  if (params.n < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("n=%d must be >= 1", params.n));
  }
  const double p_max = 1.0 / (ExpEps(params.eps0) + 1.0);
  if (!(params.p >= 0.0) || params.p > p_max * (1.0 + kParamSlack)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "p=%.17g outside [0, 1/(e^eps0+1)=%.17g]", params.p, p_max));
  }
  const double q_max = 1.0 - 2.0 * params.p;
  if (!(params.q >= 0.0) || params.q > q_max + kParamSlack) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "q=%.17g outside [0, 1-2p=%.17g]", params.q, q_max));
  }
  return absl::OkStatus();
}

absl::StatusOr<DistPair> BuildPair3Sym(const CloneParams& params,
                                       double trunc) {
  if (absl::Status st = ValidateCloneParams(params); !st.ok()) return st;
  if (params.q != 0.0) {
    return absl::InvalidArgumentError("3-symbol pair requires q = 0");
  }
  const double e = ExpEps(params.eps0);
  MixtureSpec spec;
  spec.arity = 2;
  spec.n = params.n;
  spec.p_other = params.p;
  spec.w0 = e * params.p;
  spec.w1 = params.p;
  spec.w2 = std::max(0.0, 1.0 - (e + 1.0) * params.p);
  spec.ratio_bound = e;
  return BuildMixturePair(spec, trunc);
}

absl::StatusOr<DistPair> BuildPair4Sym(const CloneParams& params,
                                       double trunc) {
  if (absl::Status st = ValidateCloneParams(params); !st.ok()) return st;
  if (!(params.q > 0.0)) {
    return absl::InvalidArgumentError("4-symbol pair requires q > 0");
  }
  const double e = ExpEps(params.eps0);
  MixtureSpec spec;
  spec.arity = 3;
  spec.n = params.n;
  spec.p_other = params.p;
  spec.q_other = std::min(params.q, 1.0 - 2.0 * params.p);
  spec.w0 = e * params.p;
  spec.w1 = params.p;
  spec.w2 = std::max(0.0, 1.0 - (e + 1.0) * params.p);
  spec.ratio_bound = e;
  return BuildMixturePair(spec, trunc);
}

absl::StatusOr<DistPair> BuildPairFmt20(double eps0, int64_t n, double trunc) {
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("fmt20 pair requires finite eps0 > 0, got %g", eps0));
  }
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  const double e = ExpEps(eps0);
  MixtureSpec spec;
  spec.arity = 2;
  spec.n = n;
  spec.p_other = 0.5 * std::exp(-eps0);
  spec.w0 = e / (e + 1.0);
  spec.w1 = 1.0 / (e + 1.0);
  spec.ratio_bound = e;
  return BuildMixturePair(spec, trunc);
}

absl::StatusOr<DistPair> BuildPairBinaryMixture(double eps0, int64_t n,
                                                double p, double trunc) {
  if (absl::Status st = ValidateCloneParams({eps0, n, p, 0.0}); !st.ok()) {
    return st;
  }
  const double e = ExpEps(eps0);
  MixtureSpec spec;
  spec.arity = 2;
  spec.n = n;
  spec.p_other = p;
  spec.w0 = e / (e + 1.0);
  spec.w1 = 1.0 / (e + 1.0);
  spec.ratio_bound = e;
  return BuildMixturePair(spec, trunc);
}

absl::StatusOr<DistPair> BuildPairBinaryRR(double eps0, int64_t n,
                                           double trunc) {
  if (!(eps0 >= 0.0) || !std::isfinite(eps0)) {
    return absl::InvalidArgumentError("eps0 must be finite and >= 0");
  }
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  if (absl::Status st = CheckTrunc(trunc); !st.ok()) return st;
  const double e = ExpEps(eps0);
  const double p = 1.0 / (e + 1.0);
  const double ep = e / (e + 1.0);
  const int64_t m = n - 1;
  CountRange b = BinomCentralRange(m, p, trunc / 2.0);
  const int64_t lo = b.lo;
  const int64_t hi = std::min(n, b.hi + 1);

  auto make = [&](double w_shift, double w_stay) {
    auto storage = std::make_shared<CountDist::Storage>();
    storage->arity = 2;
    storage->n = n;
    storage->dropped_tail = b.ln_outside;
    storage->max_ratio_bound = e;
    storage->rows.push_back({{n, 0}, lo, hi - lo + 1, 0});
    storage->values.resize(hi - lo + 1);
    const double ln_shift = std::log(w_shift);
    const double ln_stay = std::log(w_stay);
    for (int64_t k = lo; k <= hi; ++k) {
      storage->values[k - lo] =
          LogAdd(ln_shift + LnBinomPmfUnchecked(k - 1, m, p),
                 ln_stay + LnBinomPmfUnchecked(k, m, p));
    }
    return CountDist(std::move(storage), false);
  };
  // 1 - e p = p and 1 - p = e p for p = 1/(e + 1).
  return DistPair{make(ep, p), make(p, ep)};
}

}  // namespace shuffle_amp
