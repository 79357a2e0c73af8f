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

// Mixture decompositions of finite pure-DP local randomizers.
//
// For two distinguished inputs x0, x1 a decomposition is a clone probability
// p, a middle weight q and distributions Q1^0, Q1^1, Q1, Q_i with
//
//   R(x0) = e p Q1^0 + p Q1^1 + (1 - (e+1) p) Q1
//   R(x1) = p Q1^0 + e p Q1^1 + (1 - (e+1) p) Q1
//   R(x)  = p Q1^0 + p Q1^1 + q Q1 + (1 - 2p - q) Q_x   for every input x
//
// where e = exp(eps0). The class of randomizers admitting p = 1/(e+1) for
// every pair (x0, x1) is the one for which the general clone bound applies.

#ifndef SHUFFLE_AMP_DECOMPOSE_H_
#define SHUFFLE_AMP_DECOMPOSE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace shuffle_amp {

struct RandomizerMatrix {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::vector<double>> probs;  // probs[input][output]

  size_t num_inputs() const { return inputs.size(); }
  size_t num_outputs() const { return outputs.size(); }

  // Entries >= 0 and every input row summing to 1 within 1e-10.
  absl::Status Validate() const;
  absl::StatusOr<size_t> InputIndex(const std::string& label) const;

  // CSV with a header of output labels (first header cell is ignored) and one
  // row per input: label, probabilities...
  static absl::StatusOr<RandomizerMatrix> FromCsv(const std::string& path);
  std::string ToCsv() const;
};

// k-ary randomized response: truth with probability e/(e+k-1), each other
// value with probability 1/(e+k-1). Inputs and outputs are "1".."k".
RandomizerMatrix KrrMatrix(int k, double eps0);

// RAPPOR over K values: one-hot encoding, then each bit resampled as
// Bern(alpha) if it was 1 and Bern(beta) if it was 0. Outputs are K-character
// bit strings with character j for coordinate j.
RandomizerMatrix RapporMatrix(int k, double alpha, double beta);

// ln(alpha (1 - beta) / (beta (1 - alpha))), the tight eps0 of RapporMatrix.
double RapporEps0(double alpha, double beta);

// An input-independent randomizer.
RandomizerMatrix UniformMatrix(int num_inputs, int num_outputs);

// max over outputs and input pairs of |ln(R(x)(s) / R(x')(s))|, with 0/0 = 1
// and c/0 = +infinity.
double VerifyLdp(const RandomizerMatrix& r);

// Product-form convex weights over the vertices {1, e^eps}^k reproducing v.
// Only the per-coordinate weights of the e^eps endpoint are stored.
struct HypercubeWeights {
  double eps = 0.0;
  std::vector<double> upper;  // weight of e^eps in coordinate i

  size_t dimension() const { return upper.size(); }
  // Weight of the vertex whose coordinate i is e^eps iff bit i of `vertex`.
  double Weight(uint64_t vertex) const;
  // All 2^k weights; refuses k above `max_dimension`.
  absl::StatusOr<std::vector<double>> Materialize(int max_dimension = 20) const;
  // sum_z weight(z) z, computed from the factors.
  std::vector<double> Mean() const;
};

absl::StatusOr<HypercubeWeights> HypercubeDecompose(absl::Span<const double> v,
                                                    double eps);

struct DecompositionResult {
  double eps0 = 0.0;
  size_t x0 = 0;
  size_t x1 = 1;
  double p = 0.0;
  double q = 0.0;
  std::vector<double> q1_zero;              // Q1^0
  std::vector<double> q1_one;               // Q1^1
  std::vector<double> q1;                   // Q1
  std::vector<std::vector<double>> others;  // Q_x for every input x
  double residual = 0.0;
};

// Max absolute error of the three reconstruction identities over every input
// and output.
double ReconstructionResidual(const RandomizerMatrix& r,
                              const DecompositionResult& d);

// Refines R to an extremal randomizer output by output and reads off the
// clone mass p of (x0, x1), then returns the largest q that keeps every Q_x a
// distribution. FailedPrecondition when R is not eps0-DP.
absl::StatusOr<DecompositionResult> ExtremalParams(const RandomizerMatrix& r,
                                                   size_t x0, size_t x1,
                                                   double eps0);

struct MembershipResult {
  bool member = false;
  // Smallest R(x)(s) - (R(x0)(s) + R(x1)(s)) / (e + 1) over inputs and
  // outputs. The class condition for (x0, x1) is margin >= 0.
  double margin = 0.0;
  // The p = 1/(e+1) decomposition when member, else ExtremalParams.
  DecompositionResult witness;
};

// Whether R decomposes with p = 1/(e^eps0 + 1) for the pair (x0, x1), with
// every input allowed as the value of another user.
absl::StatusOr<MembershipResult> InExtremalClass(const RandomizerMatrix& r,
                                                 size_t x0, size_t x1,
                                                 double eps0);

// The product-Bernoulli components proposed for RAPPOR with x0 = "1",
// x1 = "2" and the other user at "3", p = 1/(e+1), q = 0. Requires k >= 3.
// The residual field records how well they reproduce the matrix.
absl::StatusOr<DecompositionResult> RapporProductComponents(int k, double alpha,
                                                            double beta);

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_DECOMPOSE_H_
