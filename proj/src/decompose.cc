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

#include "shuffle_amp/decompose.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace shuffle_amp {
namespace {

constexpr double kRowSumTolerance = 1e-10;
constexpr double kDpSlack = 1e-9;
constexpr double kCubeSlack = 1e-12;
// Mixture weights below this are treated as absent.
constexpr double kNegligibleWeight = 1e-12;

std::vector<double> Mix(
    std::initializer_list<std::pair<double, const std::vector<double>*>> parts,
    size_t size) {
  std::vector<double> out(size, 0.0);
  for (const auto& [w, v] : parts) {
    if (w == 0.0 || v->empty()) continue;
    for (size_t s = 0; s < size; ++s) out[s] += w * (*v)[s];
  }
  return out;
}

double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

std::vector<double> Scaled(const std::vector<double>& v, double c) {
  std::vector<double> out(v);
  for (double& x : out) x *= c;
  return out;
}

// Clears rounding-level negatives; leaves genuine negatives visible.
void ClampTiny(std::vector<double>& v) {
  for (double& x : v) {
    if (x < 0.0 && x > -1e-13) x = 0.0;
  }
}

absl::Status CheckPair(const RandomizerMatrix& r, size_t x0, size_t x1,
                       double eps0) {
  if (absl::Status st = r.Validate(); !st.ok()) return st;
  if (x0 >= r.num_inputs() || x1 >= r.num_inputs() || x0 == x1) {
    return absl::InvalidArgumentError(
        "x0 and x1 must be two distinct inputs of the matrix");
  }
  if (!(eps0 >= 0.0) || !std::isfinite(eps0)) {
    return absl::InvalidArgumentError("eps0 must be finite and >= 0");
  }
  double eps_hat = VerifyLdp(r);
  if (eps_hat > eps0 + kDpSlack) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "randomizer is %.17g-DP, which exceeds eps0=%.17g", eps_hat, eps0));
  }
  return absl::OkStatus();
}

// Decomposition at eps0 = 0, where every input has the same distribution.
DecompositionResult TrivialDecomposition(const RandomizerMatrix& r, size_t x0,
                                         size_t x1) {
  DecompositionResult d;
  d.eps0 = 0.0;
  d.x0 = x0;
  d.x1 = x1;
  d.p = 0.5;
  d.q = 0.0;
  d.q1_zero = r.probs[x0];
  d.q1_one = r.probs[x0];
  d.q1 = r.probs[x0];
  d.others = r.probs;
  d.residual = ReconstructionResidual(r, d);
  return d;
}

}  // namespace

absl::Status RandomizerMatrix::Validate() const {
  if (inputs.empty() || outputs.empty()) {
    return absl::InvalidArgumentError("randomizer has no inputs or outputs");
  }
  if (probs.size() != inputs.size()) {
    return absl::InvalidArgumentError("probability rows != inputs");
  }
  for (size_t x = 0; x < probs.size(); ++x) {
    if (probs[x].size() != outputs.size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("row %s has %d entries, expected %d", inputs[x],
                          probs[x].size(), outputs.size()));
    }
    double sum = 0.0;
    for (double v : probs[x]) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("row %s has an invalid entry", inputs[x]));
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kRowSumTolerance) {
      return absl::InvalidArgumentError(
          absl::StrFormat("row %s sums to %.17g", inputs[x], sum));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<size_t> RandomizerMatrix::InputIndex(
    const std::string& label) const {
  auto it = std::find(inputs.begin(), inputs.end(), label);
  if (it == inputs.end()) {
    return absl::NotFoundError("no input labelled " + label);
  }
  return static_cast<size_t>(it - inputs.begin());
}

absl::StatusOr<RandomizerMatrix> RandomizerMatrix::FromCsv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("cannot open " + path);
  RandomizerMatrix r;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    absl::string_view sv = absl::StripAsciiWhitespace(line);
    if (sv.empty()) continue;
    std::vector<std::string> cells = absl::StrSplit(sv, ',');
    for (std::string& c : cells) c = std::string(absl::StripAsciiWhitespace(c));
    if (header) {
      header = false;
      r.outputs.assign(cells.begin() + 1, cells.end());
      continue;
    }
    if (cells.size() != r.outputs.size() + 1) {
      return absl::InvalidArgumentError("bad randomizer row: " + line);
    }
    r.inputs.push_back(cells[0]);
    std::vector<double> row;
    for (size_t c = 1; c < cells.size(); ++c) {
      double v;
      if (!absl::SimpleAtod(cells[c], &v)) {
        return absl::InvalidArgumentError("bad probability in row: " + line);
      }
      row.push_back(v);
    }
    r.probs.push_back(std::move(row));
  }
  if (absl::Status st = r.Validate(); !st.ok()) return st;
  return r;
}

std::string RandomizerMatrix::ToCsv() const {
  std::string out = "input," + absl::StrJoin(outputs, ",") + "\n";
  for (size_t x = 0; x < inputs.size(); ++x) {
    out += inputs[x];
    for (double v : probs[x]) out += absl::StrFormat(",%.17g", v);
    out += "\n";
  }
  return out;
}

RandomizerMatrix KrrMatrix(int k, double eps0) {
  RandomizerMatrix r;
  const double e = std::exp(eps0);
  const double denom = e + k - 1.0;
  for (int i = 1; i <= k; ++i) {
    r.inputs.push_back(std::to_string(i));
    r.outputs.push_back(std::to_string(i));
  }
  r.probs.assign(k, std::vector<double>(k, 1.0 / denom));
  for (int i = 0; i < k; ++i) r.probs[i][i] = e / denom;
  return r;
}

RandomizerMatrix RapporMatrix(int k, double alpha, double beta) {
  RandomizerMatrix r;
  const uint64_t num_out = uint64_t{1} << k;
  for (int i = 1; i <= k; ++i) r.inputs.push_back(std::to_string(i));
  for (uint64_t y = 0; y < num_out; ++y) {
    std::string label;
    for (int j = 0; j < k; ++j) label += ((y >> j) & 1) ? '1' : '0';
    r.outputs.push_back(label);
  }
  r.probs.assign(k, std::vector<double>(num_out, 1.0));
  for (int x = 0; x < k; ++x) {
    for (uint64_t y = 0; y < num_out; ++y) {
      double prob = 1.0;
      for (int j = 0; j < k; ++j) {
        const double bias = j == x ? alpha : beta;
        prob *= ((y >> j) & 1) ? bias : 1.0 - bias;
      }
      r.probs[x][y] = prob;
    }
  }
  return r;
}

double RapporEps0(double alpha, double beta) {
  return std::log(alpha * (1.0 - beta) / (beta * (1.0 - alpha)));
}

RandomizerMatrix UniformMatrix(int num_inputs, int num_outputs) {
  RandomizerMatrix r;
  for (int i = 1; i <= num_inputs; ++i) r.inputs.push_back(std::to_string(i));
  for (int j = 1; j <= num_outputs; ++j) {
    r.outputs.push_back(std::to_string(j));
  }
  r.probs.assign(num_inputs, std::vector<double>(num_outputs, 1.0 / num_outputs));
  return r;
}

double VerifyLdp(const RandomizerMatrix& r) {
  double worst = 0.0;
  for (size_t s = 0; s < r.num_outputs(); ++s) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (size_t x = 0; x < r.num_inputs(); ++x) {
      lo = std::min(lo, r.probs[x][s]);
      hi = std::max(hi, r.probs[x][s]);
    }
    if (hi == 0.0) continue;
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::log(hi / lo));
  }
  return worst;
}

double HypercubeWeights::Weight(uint64_t vertex) const {
  double w = 1.0;
  for (size_t i = 0; i < upper.size(); ++i) {
    w *= ((vertex >> i) & 1) ? upper[i] : 1.0 - upper[i];
  }
  return w;
}

absl::StatusOr<std::vector<double>> HypercubeWeights::Materialize(
    int max_dimension) const {
  if (static_cast<int>(upper.size()) > max_dimension) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "refusing to list 2^%d vertex weights", upper.size()));
  }
  // Doubling construction: weights of the first i coordinates, then extend.
  std::vector<double> w = {1.0};
  for (size_t i = 0; i < upper.size(); ++i) {
    std::vector<double> next(w.size() * 2);
    for (size_t z = 0; z < w.size(); ++z) {
      next[z] = w[z] * (1.0 - upper[i]);
      next[z + w.size()] = w[z] * upper[i];
    }
    w = std::move(next);
  }
  return w;
}

std::vector<double> HypercubeWeights::Mean() const {
  const double top = std::exp(eps);
  std::vector<double> m(upper.size());
  for (size_t i = 0; i < upper.size(); ++i) {
    m[i] = (1.0 - upper[i]) + upper[i] * top;
  }
  return m;
}

absl::StatusOr<HypercubeWeights> HypercubeDecompose(absl::Span<const double> v,
                                                    double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    return absl::InvalidArgumentError("eps must be finite and >= 0");
  }
  const double top = std::exp(eps);
  HypercubeWeights out;
  out.eps = eps;
  out.upper.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 1.0 - kCubeSlack) || !(v[i] <= top + kCubeSlack)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "coordinate %d = %.17g outside [1, e^eps=%.17g]", i, v[i], top));
    }
    double w = eps == 0.0 ? 0.0 : (v[i] - 1.0) / (top - 1.0);
    out.upper.push_back(std::clamp(w, 0.0, 1.0));
  }
  return out;
}

double ReconstructionResidual(const RandomizerMatrix& r,
                              const DecompositionResult& d) {
  const size_t m = r.num_outputs();
  const double e = std::exp(d.eps0);
  const double w = 1.0 - (e + 1.0) * d.p;
  double worst = 0.0;
  worst = std::max(worst, MaxAbsDiff(Mix({{e * d.p, &d.q1_zero},
                                          {d.p, &d.q1_one},
                                          {w, &d.q1}},
                                         m),
                                     r.probs[d.x0]));
  worst = std::max(worst, MaxAbsDiff(Mix({{d.p, &d.q1_zero},
                                          {e * d.p, &d.q1_one},
                                          {w, &d.q1}},
                                         m),
                                     r.probs[d.x1]));
  for (size_t x = 0; x < r.num_inputs() && x < d.others.size(); ++x) {
    if (d.others[x].empty()) continue;
    worst = std::max(worst, MaxAbsDiff(Mix({{d.p, &d.q1_zero},
                                            {d.p, &d.q1_one},
                                            {d.q, &d.q1},
                                            {1.0 - 2.0 * d.p - d.q,
                                             &d.others[x]}},
                                           m),
                                       r.probs[x]));
  }
  return worst;
}

absl::StatusOr<DecompositionResult> ExtremalParams(const RandomizerMatrix& r,
                                                   size_t x0, size_t x1,
                                                   double eps0) {
  if (absl::Status st = CheckPair(r, x0, x1, eps0); !st.ok()) return st;
  if (eps0 == 0.0) return TrivialDecomposition(r, x0, x1);

  const size_t m = r.num_outputs();
  const double e = std::exp(eps0);
  // Per output: clone mass toward x0 (L), toward x1 (U), and the rest (M),
  // each summed over the refined outputs without listing the 2^k vertices.
  std::vector<double> lower(m, 0.0), upper(m, 0.0), middle(m, 0.0);
  for (size_t s = 0; s < m; ++s) {
    double base = std::numeric_limits<double>::infinity();
    for (size_t x = 0; x < r.num_inputs(); ++x) {
      base = std::min(base, r.probs[x][s]);
    }
    if (!(base > 0.0)) continue;
    const double ratios[2] = {r.probs[x0][s] / base, r.probs[x1][s] / base};
    absl::StatusOr<HypercubeWeights> cube = HypercubeDecompose(ratios, eps0);
    if (!cube.ok()) return cube.status();
    const double l0 = cube->upper[0];
    const double l1 = cube->upper[1];
    lower[s] = base * l0 * (1.0 - l1);
    upper[s] = base * (1.0 - l0) * l1;
    middle[s] = base * ((1.0 - l0) * (1.0 - l1) + e * l0 * l1);
    // Vertex weights of exactly 0 or 1 come back with rounding error.
    for (double* v : {&lower[s], &upper[s], &middle[s]}) {
      if (*v < 1e-12 * base) *v = 0.0;
    }
  }

  DecompositionResult d;
  d.eps0 = eps0;
  d.x0 = x0;
  d.x1 = x1;
  for (double v : lower) d.p += v;
  if (d.p > 0.0) {
    d.q1_zero = Scaled(lower, 1.0 / d.p);
    d.q1_one = Scaled(upper, 1.0 / d.p);
  } else {
    d.q1_zero = r.probs[x0];
    d.q1_one = r.probs[x1];
  }
  const double w = 1.0 - (e + 1.0) * d.p;
  if (w > kNegligibleWeight) {
    d.q1 = Scaled(middle, 1.0 / w);
  } else {
    d.q1 = r.probs[x0];
  }

  // Largest q with R(x) - p Q1^0 - p Q1^1 - q Q1 >= 0 for every input x.
  double q = 1.0 - 2.0 * d.p;
  if (w > kNegligibleWeight) {
    for (size_t x = 0; x < r.num_inputs(); ++x) {
      for (size_t s = 0; s < m; ++s) {
        if (!(d.q1[s] > 0.0)) continue;
        double rest = r.probs[x][s] - lower[s] - upper[s];
        q = std::min(q, rest / d.q1[s]);
      }
    }
  } else {
    q = 0.0;
  }
  d.q = std::max(0.0, q);

  const double remainder = 1.0 - 2.0 * d.p - d.q;
  d.others.resize(r.num_inputs());
  for (size_t x = 0; x < r.num_inputs(); ++x) {
    if (remainder > kNegligibleWeight) {
      std::vector<double> rest(m);
      for (size_t s = 0; s < m; ++s) {
        double qs = d.q1.empty() ? 0.0 : d.q1[s];
        rest[s] = (r.probs[x][s] - lower[s] - upper[s] - d.q * qs) / remainder;
      }
      ClampTiny(rest);
      d.others[x] = std::move(rest);
    } else {
      d.others[x] = r.probs[x];
    }
  }
  d.residual = ReconstructionResidual(r, d);
  return d;
}

absl::StatusOr<MembershipResult> InExtremalClass(const RandomizerMatrix& r,
                                                 size_t x0, size_t x1,
                                                 double eps0) {
  if (absl::Status st = CheckPair(r, x0, x1, eps0); !st.ok()) return st;
  MembershipResult out;
  if (eps0 == 0.0) {
    out.witness = TrivialDecomposition(r, x0, x1);
    out.member = out.witness.residual <= kRowSumTolerance;
    out.margin = out.member ? 0.0 : -out.witness.residual;
    return out;
  }
  const size_t m = r.num_outputs();
  const double e = std::exp(eps0);
  const double p = 1.0 / (e + 1.0);
  const std::vector<double>& r0 = r.probs[x0];
  const std::vector<double>& r1 = r.probs[x1];
  std::vector<double> floor(m);
  for (size_t s = 0; s < m; ++s) floor[s] = (r0[s] + r1[s]) * p;
  out.margin = std::numeric_limits<double>::infinity();
  for (size_t x = 0; x < r.num_inputs(); ++x) {
    for (size_t s = 0; s < m; ++s) {
      out.margin = std::min(out.margin, r.probs[x][s] - floor[s]);
    }
  }
  out.member = out.margin >= -kCubeSlack;
  if (!out.member) {
    absl::StatusOr<DecompositionResult> fallback =
        ExtremalParams(r, x0, x1, eps0);
    if (!fallback.ok()) return fallback.status();
    out.witness = *std::move(fallback);
    return out;
  }
  DecompositionResult& d = out.witness;
  d.eps0 = eps0;
  d.x0 = x0;
  d.x1 = x1;
  d.p = p;
  d.q = 0.0;
  d.q1_zero.resize(m);
  d.q1_one.resize(m);
  for (size_t s = 0; s < m; ++s) {
    d.q1_zero[s] = (e * r0[s] - r1[s]) / (e - 1.0);
    d.q1_one[s] = (e * r1[s] - r0[s]) / (e - 1.0);
  }
  ClampTiny(d.q1_zero);
  ClampTiny(d.q1_one);
  // Q1 carries zero weight at p = 1/(e+1); keep a valid distribution anyway.
  d.q1 = r0;
  d.others.resize(r.num_inputs());
  const double scale = (e + 1.0) / (e - 1.0);
  for (size_t x = 0; x < r.num_inputs(); ++x) {
    std::vector<double> rest(m);
    for (size_t s = 0; s < m; ++s) {
      rest[s] = (r.probs[x][s] - floor[s]) * scale;
    }
    ClampTiny(rest);
    d.others[x] = std::move(rest);
  }
  d.residual = ReconstructionResidual(r, d);
  return out;
}

absl::StatusOr<DecompositionResult> RapporProductComponents(int k, double alpha,
                                                            double beta) {
  if (k < 3) return absl::InvalidArgumentError("need k >= 3");
  if (!(alpha > beta) || !(alpha < 1.0) || !(beta > 0.0)) {
    return absl::InvalidArgumentError("need 0 < beta < alpha < 1");
  }
  const double eps0 = RapporEps0(alpha, beta);
  const double e = std::exp(eps0);
  const double hi = (alpha * e - beta) / (e - 1.0);
  const double lo = (beta * e - alpha) / (e - 1.0);
  const double mid = ((e + 1.0) * alpha - 2.0 * beta) / (e - 1.0);
  for (double b : {hi, lo, mid}) {
    if (!(b >= 0.0 && b <= 1.0)) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "component bias %.6g is not a probability for alpha=%g beta=%g", b,
          alpha, beta));
    }
  }
  auto product = [&](const std::vector<double>& biases) {
    const uint64_t num_out = uint64_t{1} << k;
    std::vector<double> out(num_out);
    for (uint64_t y = 0; y < num_out; ++y) {
      double prob = 1.0;
      for (int j = 0; j < k; ++j) {
        prob *= ((y >> j) & 1) ? biases[j] : 1.0 - biases[j];
      }
      out[y] = prob;
    }
    return out;
  };
  std::vector<double> b0(k, beta), b1(k, beta), b2(k, beta);
  b0[0] = hi;
  b0[1] = lo;
  b1[0] = lo;
  b1[1] = hi;
  b2[0] = lo;
  b2[1] = lo;
  b2[2] = mid;

  RandomizerMatrix r = RapporMatrix(k, alpha, beta);
  DecompositionResult d;
  d.eps0 = eps0;
  d.x0 = 0;
  d.x1 = 1;
  d.p = 1.0 / (e + 1.0);
  d.q = 0.0;
  d.q1_zero = product(b0);
  d.q1_one = product(b1);
  d.q1 = r.probs[0];
  d.others.resize(k);
  d.others[2] = product(b2);
  d.residual = ReconstructionResidual(r, d);
  return d;
}

}  // namespace shuffle_amp
