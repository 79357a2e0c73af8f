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

// Self-checks run by `shuffle-amp verify`.

#ifndef SHUFFLE_AMP_VERIFY_H_
#define SHUFFLE_AMP_VERIFY_H_

#include <cstdint>
#include <string>
#include <vector>

namespace shuffle_amp {

enum class VerifyLevel { kQuick, kFull };

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Exact kRR laws against the clone pairs, atom by atom and through the
// divergence engines at trunc = 0, for k in {2, 3}, n in [2, n_max] and
// eps0 in {ln 2, 1, 2}.
CheckResult CheckOracleEquivalence(int n_max, double tol);

// Parallel kernels against the atom-by-atom reference implementations.
CheckResult CheckKernelsMatchReference(int64_t n);

// Retained mass plus dropped tail brackets 1.
CheckResult CheckMassAccounting(int64_t n);

// delta(eps) of the 3-symbol pair is nondecreasing in p.
CheckResult CheckMonotoneInP(int64_t n);

// General bound at or below the fmt20 bound and above both kRR lower bounds.
CheckResult CheckOrdering(const std::vector<int64_t>& ns);

// kRR and uniform decomposition fixtures.
CheckResult CheckDecompositionFixtures();

std::vector<CheckResult> RunVerify(VerifyLevel level);

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_VERIFY_H_
