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

#include "shuffle_amp/oracle.h"

#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace shuffle_amp {
namespace {

template <typename T>
Float50 ToFloat50(const T& v) {
  return static_cast<Float50>(v);
}

}  // namespace

template <typename T>
T ExactDist<T>::Total() const {
  T total = 0;
  for (const auto& [c, m] : mass) total += m;
  return total;
}

template <typename T>
absl::StatusOr<ExactDist<T>> ExactShuffledKrr(const T& e, int k,
                                              absl::Span<const int> data,
                                              const OracleCaps& caps) {
  const int n = static_cast<int>(data.size());
  if (k < 2 || n < 1) {
    return absl::InvalidArgumentError("need k >= 2 and a non-empty dataset");
  }
  if (n > caps.max_n || k > caps.max_k) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "n=%d, k=%d exceed the oracle caps n <= %d, k <= %d", n, k,
        caps.max_n, caps.max_k));
  }
  if (!(e >= 1)) return absl::InvalidArgumentError("e^eps0 must be >= 1");
  for (int x : data) {
    if (x < 1 || x > k) {
      return absl::InvalidArgumentError(
          absl::StrFormat("data value %d outside 1..%d", x, k));
    }
  }
  const T denom = e + T(k - 1);
  const T truth = e / denom;
  const T other = T(1) / denom;

  ExactDist<T> dist;
  dist.k = k;
  dist.mass.emplace(std::vector<int>(k, 0), T(1));
  for (int x : data) {
    std::map<std::vector<int>, T> next;
    for (const auto& [counts, m] : dist.mass) {
      for (int y = 1; y <= k; ++y) {
        std::vector<int> c = counts;
        ++c[y - 1];
        next[c] += m * (y == x ? truth : other);
      }
    }
    dist.mass = std::move(next);
  }
  return dist;
}

template <typename T>
ExactTupleLaw ProjectOnesTwos(const ExactDist<T>& dist) {
  ExactTupleLaw out;
  for (const auto& [c, m] : dist.mass) {
    out[CountTuple{c[0], c[1], 0}] += ToFloat50(m);
  }
  return out;
}

template <typename T>
ExactTupleLaw ProjectOnes(const ExactDist<T>& dist) {
  ExactTupleLaw out;
  for (const auto& [c, m] : dist.mass) {
    out[CountTuple{c[0], 0, 0}] += ToFloat50(m);
  }
  return out;
}

template <typename T>
absl::StatusOr<ExactTupleLaw> FullCountLaw(const ExactDist<T>& dist) {
  if (dist.k > 3) {
    return absl::InvalidArgumentError("full count tuples need k <= 3");
  }
  ExactTupleLaw out;
  for (const auto& [c, m] : dist.mass) {
    CountTuple t{0, 0, 0};
    for (int j = 0; j < dist.k; ++j) t[j] = c[j];
    out[t] += ToFloat50(m);
  }
  return out;
}

ExactTupleLaw ToExactLaw(const CountDist& dist) {
  ExactTupleLaw out;
  dist.ForEachAtom([&](const CountTuple& t, LogProb lp) {
    out[t] += boost::multiprecision::exp(Float50(lp));
  });
  return out;
}

ExactTupleLaw MarginalN0(const ExactTupleLaw& law) {
  ExactTupleLaw out;
  for (const auto& [t, m] : law) out[CountTuple{t[0], 0, 0}] += m;
  return out;
}

Float50 ExactHockeyStick(const ExactTupleLaw& p, const ExactTupleLaw& q,
                         const Float50& eps) {
  const Float50 scale = boost::multiprecision::exp(eps);
  Float50 total = 0;
  for (const auto& [t, pm] : p) {
    auto it = q.find(t);
    const Float50 term = pm - scale * (it == q.end() ? Float50(0) : it->second);
    if (term > 0) total += term;
  }
  return total;
}

Float50 ExactRenyi(const ExactTupleLaw& p, const ExactTupleLaw& q,
                   const Float50& alpha) {
  Float50 moment = 0;
  for (const auto& [t, pm] : p) {
    if (pm == 0) continue;
    auto it = q.find(t);
    if (it == q.end() || it->second == 0) {
      return std::numeric_limits<Float50>::infinity();
    }
    moment += boost::multiprecision::pow(pm, alpha) *
              boost::multiprecision::pow(it->second, 1 - alpha);
  }
  return boost::multiprecision::log(moment) / (alpha - 1);
}

absl::StatusOr<OracleTable> OracleDivergences(
    const Float50& eps0, int k, absl::Span<const int> x0,
    absl::Span<const int> x1, absl::Span<const double> eps_grid,
    absl::Span<const double> alpha_grid, const OracleCaps& caps) {
  if (x0.size() != x1.size()) {
    return absl::InvalidArgumentError("datasets differ in size");
  }
  int differing = 0;
  for (size_t i = 0; i < x0.size(); ++i) differing += x0[i] != x1[i];
  if (differing > 1) {
    return absl::InvalidArgumentError("datasets are not neighboring");
  }
  const Float50 e = boost::multiprecision::exp(eps0);
  absl::StatusOr<ExactDist<Float50>> d0 = ExactShuffledKrr(e, k, x0, caps);
  if (!d0.ok()) return d0.status();
  absl::StatusOr<ExactDist<Float50>> d1 = ExactShuffledKrr(e, k, x1, caps);
  if (!d1.ok()) return d1.status();
  absl::StatusOr<ExactTupleLaw> p = FullCountLaw(*d0);
  if (!p.ok()) return p.status();
  absl::StatusOr<ExactTupleLaw> q = FullCountLaw(*d1);
  if (!q.ok()) return q.status();

  OracleTable table;
  table.eps.assign(eps_grid.begin(), eps_grid.end());
  table.alphas.assign(alpha_grid.begin(), alpha_grid.end());
  for (double eps : eps_grid) {
    table.hockey_forward.push_back(ExactHockeyStick(*p, *q, eps));
    table.hockey_backward.push_back(ExactHockeyStick(*q, *p, eps));
  }
  for (double alpha : alpha_grid) {
    if (!(alpha > 1.0)) {
      return absl::InvalidArgumentError("alpha must be > 1");
    }
    table.renyi_forward.push_back(ExactRenyi(*p, *q, alpha));
    table.renyi_backward.push_back(ExactRenyi(*q, *p, alpha));
  }
  return table;
}

template struct ExactDist<Rational>;
template struct ExactDist<Float50>;
template absl::StatusOr<ExactDist<Rational>> ExactShuffledKrr(
    const Rational&, int, absl::Span<const int>, const OracleCaps&);
template absl::StatusOr<ExactDist<Float50>> ExactShuffledKrr(
    const Float50&, int, absl::Span<const int>, const OracleCaps&);
template ExactTupleLaw ProjectOnesTwos(const ExactDist<Rational>&);
template ExactTupleLaw ProjectOnesTwos(const ExactDist<Float50>&);
template ExactTupleLaw ProjectOnes(const ExactDist<Rational>&);
template ExactTupleLaw ProjectOnes(const ExactDist<Float50>&);
template absl::StatusOr<ExactTupleLaw> FullCountLaw(const ExactDist<Rational>&);
template absl::StatusOr<ExactTupleLaw> FullCountLaw(const ExactDist<Float50>&);

}  // namespace shuffle_amp
