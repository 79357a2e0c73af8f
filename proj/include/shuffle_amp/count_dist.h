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

#ifndef SHUFFLE_AMP_COUNT_DIST_H_
#define SHUFFLE_AMP_COUNT_DIST_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_amp/numkit.h"

namespace shuffle_amp {

// (n0, n1, n2). Arity-2 distributions keep n2 = 0.
using CountTuple = std::array<int64_t, 3>;

// Sparse distribution over count tuples, with the probability mass that was
// left out of the stored support tracked separately.
//
// Atoms are grouped into rows keyed by (s, n2) with s = n0 + n1. Each row
// holds a contiguous run of n0 values. A stored -infinity means the atom
// carries no retained mass; its true mass is then only known to lie in
// [0, dropped_tail()].
//
// Copies share the underlying storage. Mirrored() returns a view with n0 and
// n1 exchanged, which is how the second distribution of a clone pair is
// represented without duplicating memory.
class CountDist {
 public:
  struct RowKey {
    int64_t s = 0;
    int64_t n2 = 0;
    friend bool operator==(const RowKey&, const RowKey&) = default;
    friend auto operator<=>(const RowKey&, const RowKey&) = default;
  };

  // One row in the current orientation. at(n0) is -infinity outside
  // [lo, lo + len).
  struct RowView {
    RowKey key;
    int64_t lo = 0;
    int64_t len = 0;
    const double* base = nullptr;  // points at the entry for n0 = lo
    int64_t stride = 1;

    int64_t hi() const { return lo + len - 1; }
    LogProb operator[](int64_t i) const { return base[i * stride]; }
    LogProb at(int64_t n0) const {
      if (n0 < lo || n0 >= lo + len) return kLogZero;
      return base[(n0 - lo) * stride];
    }
  };

  // Row layout used by builders. `values` holds the rows back to back.
  struct Row {
    RowKey key;
    int64_t lo = 0;
    int64_t len = 0;
    int64_t offset = 0;
  };

  struct Storage {
    int arity = 2;
    int64_t n = 0;
    std::vector<Row> rows;  // sorted by key
    std::vector<double> values;
    LogProb dropped_tail = kLogZero;
    double max_ratio_bound = 1.0;
  };

  CountDist();
  CountDist(std::shared_ptr<const Storage> storage, bool mirrored);

  // Builds a distribution from explicit atoms. Duplicate tuples are an error.
  static absl::StatusOr<CountDist> FromAtoms(
      int arity, int64_t n, std::vector<std::pair<CountTuple, LogProb>> atoms,
      LogProb dropped_tail, double max_ratio_bound);

  int arity() const { return storage_->arity; }
  int64_t n() const { return storage_->n; }
  LogProb dropped_tail() const { return storage_->dropped_tail; }
  double max_ratio_bound() const { return storage_->max_ratio_bound; }
  bool mirrored() const { return mirrored_; }

  size_t num_rows() const { return storage_->rows.size(); }
  size_t num_atoms() const { return storage_->values.size(); }
  RowView row(size_t i) const;
  std::optional<size_t> FindRow(RowKey key) const;

  // Retained log-mass of a tuple, -infinity when not stored.
  LogProb LogMass(const CountTuple& t) const;

  // Log of the total retained mass.
  LogProb LogTotalMass() const;

  CountDist Mirrored() const { return CountDist(storage_, !mirrored_); }
  // True when `other` is this distribution with n0 and n1 exchanged.
  bool IsMirrorOf(const CountDist& other) const {
    return storage_ == other.storage_ && mirrored_ != other.mirrored_;
  }

  // Visits every stored atom with finite log-mass, in row order.
  template <typename F>
  void ForEachAtom(F&& f) const {
    for (size_t r = 0; r < num_rows(); ++r) {
      RowView v = row(r);
      for (int64_t i = 0; i < v.len; ++i) {
        LogProb lp = v[i];
        if (lp == kLogZero) continue;
        int64_t n0 = v.lo + i;
        f(CountTuple{n0, v.key.s - n0, v.key.n2}, lp);
      }
    }
  }

  // Rows of (counts..., log_prob) with a header line.
  absl::Status WriteCsv(const std::string& path) const;
  // {arity, n, dropped_tail, log_dropped_tail, max_ratio_bound}.
  std::string SidecarJson() const;
  absl::Status WriteSidecar(const std::string& path) const;
  static absl::StatusOr<CountDist> ReadCsv(const std::string& csv_path,
                                           const std::string& sidecar_path);

 private:
  std::shared_ptr<const Storage> storage_;
  bool mirrored_ = false;
};

}  // namespace shuffle_amp

#endif  // SHUFFLE_AMP_COUNT_DIST_H_
