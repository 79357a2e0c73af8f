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

// Exact laws of shuffled k-ary randomized response at toy sizes.
//
// The shuffled output of n kRR reports is equivalent to its count vector
// (c_1, ..., c_k). ExactShuffledKrr convolves the n per-user laws exactly in
// the chosen number type: cpp_rational when e^eps0 is rational (eps0 = ln 2
// gives e^eps0 = 2) and cpp_bin_float_50 otherwise.

#ifndef SHUFFLE_AMP_ORACLE_H_
#define SHUFFLE_AMP_ORACLE_H_

#include <map>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "shuffle_amp/count_dist.h"

namespace shuffle_amp {

using Rational = boost::multiprecision::cpp_rational;
using Float50 = boost::multiprecision::cpp_bin_float_50;

struct OracleCaps {
  int max_n = 8;
  int max_k = 4;
};

// Keys are count vectors of length k; entry j counts reports of value j+1.
template <typename T>
struct ExactDist {
  int k = 0;
  std::map<std::vector<int>, T> mass;

  T Total() const;
};

// Law of the count vector when user i holds data[i] in 1..k. `e` is
// e^eps0. ResourceExhausted beyond `caps`.
template <typename T>
absl::StatusOr<ExactDist<T>> ExactShuffledKrr(const T& e, int k,
                                              absl::Span<const int> data,
                                              const OracleCaps& caps = {});

// Exact law over count tuples, as compared against a CountDist.
using ExactTupleLaw = std::map<CountTuple, Float50>;

// g(c) = (c_1, c_2): the number of ones and twos, stored as an arity-2 tuple.
template <typename T>
ExactTupleLaw ProjectOnesTwos(const ExactDist<T>& dist);

// c_1 alone, stored as (c_1, 0, 0).
template <typename T>
ExactTupleLaw ProjectOnes(const ExactDist<T>& dist);

// Retained atoms of a CountDist in Float50.
ExactTupleLaw ToExactLaw(const CountDist& dist);

// (n0, n1, n2) -> (n0, 0, 0), summing masses.
ExactTupleLaw MarginalN0(const ExactTupleLaw& law);

// sum_x max(0, P(x) - e^eps Q(x)).
Float50 ExactHockeyStick(const ExactTupleLaw& p, const ExactTupleLaw& q,
                         const Float50& eps);
// (1/(alpha-1)) ln sum_x P(x)^alpha Q(x)^{1-alpha}; +infinity when some P
// atom has no Q mass.
Float50 ExactRenyi(const ExactTupleLaw& p, const ExactTupleLaw& q,
                   const Float50& alpha);

// Every count vector's law, without projection, as tuples of length <= 3.
// Only defined for k <= 3.
template <typename T>
absl::StatusOr<ExactTupleLaw> FullCountLaw(const ExactDist<T>& dist);

struct OracleTable {
  std::vector<double> eps;
  std::vector<Float50> hockey_forward;   // D(X0 || X1)
  std::vector<Float50> hockey_backward;  // D(X1 || X0)
  std::vector<double> alphas;
  std::vector<Float50> renyi_forward;
  std::vector<Float50> renyi_backward;
};

// Exact divergences between the count-vector laws of X0 and X1, k <= 3.
absl::StatusOr<OracleTable> OracleDivergences(
    const Float50& eps0, int k, absl::Span<const int> x0,
    absl::Span<const int> x1, absl::Span<const double> eps_grid,
    absl::Span<const double> alpha_grid, const OracleCaps& caps = {});

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_ORACLE_H_
