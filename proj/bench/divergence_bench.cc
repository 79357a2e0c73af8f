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

// OpenMP divergence kernels against the atom-by-atom reference versions.
//
//   divergence_bench --benchmark_filter=Hockey

#include <cmath>
#include <map>
#include <utility>

#include "benchmark/benchmark.h"
#include "shuffle_amp/clone_pairs.h"
#include "shuffle_amp/divergence.h"

namespace shuffle_amp {
namespace {

// range(0): n. range(1): 0 for the 3-symbol pair, 1 for the 4-symbol pair.
const DistPair& PairFor(int64_t n, bool ternary) {
  static std::map<std::pair<int64_t, bool>, DistPair> cache;
  auto it = cache.find({n, ternary});
  if (it != cache.end()) return it->second;
  const double eps0 = 3.0;
  const double e = std::exp(eps0);
  DistPair pair = ternary
                      ? *BuildPair4Sym({eps0, n, 1 / (e + 3), 2 / (e + 3)})
                      : *BuildPair3Sym({eps0, n, 1 / (e + 1), 0.0});
  return cache.emplace(std::make_pair(n, ternary), std::move(pair))
      .first->second;
}

template <auto Fn>
void BM_Hockey(benchmark::State& state) {
  const DistPair& pair = PairFor(state.range(0), state.range(1) != 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(pair.p, pair.q, 0.1));
  }
  state.counters["atoms"] = static_cast<double>(pair.p.num_atoms());
}

template <auto Fn>
void BM_Renyi(benchmark::State& state) {
  const DistPair& pair = PairFor(state.range(0), state.range(1) != 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(pair.p, pair.q, 8.0));
  }
  state.counters["atoms"] = static_cast<double>(pair.p.num_atoms());
}

void Args(benchmark::internal::Benchmark* b) {
  b->Args({10000, 0})->Args({100000, 0})->Args({2000, 1})->Args({10000, 1});
  b->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_Hockey<HockeyStick>)->Apply(Args);
BENCHMARK(BM_Hockey<reference::HockeyStick>)->Apply(Args);
BENCHMARK(BM_Renyi<Renyi>)->Apply(Args);
BENCHMARK(BM_Renyi<reference::Renyi>)->Apply(Args);

}  // namespace
}  // namespace shuffle_amp

BENCHMARK_MAIN();
