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

#include "shuffle_amp/count_dist.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "json.hpp"

namespace shuffle_amp {

CountDist::CountDist() : storage_(std::make_shared<Storage>()) {}

CountDist::CountDist(std::shared_ptr<const Storage> storage, bool mirrored)
    : storage_(std::move(storage)), mirrored_(mirrored) {}

CountDist::RowView CountDist::row(size_t i) const {
  const Row& r = storage_->rows[i];
  const double* data = storage_->values.data() + r.offset;
  if (!mirrored_) return RowView{r.key, r.lo, r.len, data, 1};
  return RowView{r.key, r.key.s - (r.lo + r.len - 1), r.len, data + r.len - 1,
                 -1};
}

std::optional<size_t> CountDist::FindRow(RowKey key) const {
  const auto& rows = storage_->rows;
  auto it = std::lower_bound(
      rows.begin(), rows.end(), key,
      [](const Row& r, const RowKey& k) { return r.key < k; });
  if (it == rows.end() || it->key != key) return std::nullopt;
  return static_cast<size_t>(it - rows.begin());
}

LogProb CountDist::LogMass(const CountTuple& t) const {
  if (arity() == 2 && t[2] != 0) return kLogZero;
  std::optional<size_t> r = FindRow({t[0] + t[1], t[2]});
  if (!r.has_value()) return kLogZero;
  return row(*r).at(t[0]);
}

LogProb CountDist::LogTotalMass() const {
  return LogSumExp(storage_->values);
}

absl::StatusOr<CountDist> CountDist::FromAtoms(
    int arity, int64_t n, std::vector<std::pair<CountTuple, LogProb>> atoms,
    LogProb dropped_tail, double max_ratio_bound) {
  if (arity != 2 && arity != 3) {
    return absl::InvalidArgumentError(
        absl::StrFormat("CountDist: arity %d not in {2, 3}", arity));
  }
  if (n < 0 || std::isnan(dropped_tail) || !(max_ratio_bound >= 1.0)) {
    return absl::InvalidArgumentError("CountDist: invalid n, tail or bound");
  }
  for (const auto& [t, lp] : atoms) {
    if (t[0] < 0 || t[1] < 0 || t[2] < 0 || t[0] + t[1] + t[2] > n ||
        (arity == 2 && t[2] != 0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "CountDist: tuple (%d,%d,%d) invalid for arity %d and n=%d", t[0],
          t[1], t[2], arity, n));
    }
    if (std::isnan(lp) || lp > 1e-9) {
      return absl::InvalidArgumentError(
          absl::StrFormat("CountDist: log-mass %g is not a probability", lp));
    }
  }
  auto key_of = [](const CountTuple& t) {
    return std::array<int64_t, 3>{t[0] + t[1], t[2], t[0]};
  };
  std::sort(atoms.begin(), atoms.end(), [&](const auto& a, const auto& b) {
    return key_of(a.first) < key_of(b.first);
  });
  auto storage = std::make_shared<Storage>();
  storage->arity = arity;
  storage->n = n;
  storage->dropped_tail = dropped_tail;
  storage->max_ratio_bound = max_ratio_bound;
  size_t i = 0;
  while (i < atoms.size()) {
    RowKey key{atoms[i].first[0] + atoms[i].first[1], atoms[i].first[2]};
    size_t j = i;
    while (j < atoms.size() &&
           RowKey{atoms[j].first[0] + atoms[j].first[1], atoms[j].first[2]} ==
               key) {
      ++j;
    }
    int64_t lo = atoms[i].first[0];
    int64_t hi = atoms[j - 1].first[0];
    Row row{key, lo, hi - lo + 1,
            static_cast<int64_t>(storage->values.size())};
    storage->values.resize(storage->values.size() + row.len, kLogZero);
    for (size_t a = i; a < j; ++a) {
      if (a > i && atoms[a].first[0] == atoms[a - 1].first[0]) {
        return absl::InvalidArgumentError("CountDist: duplicate atom");
      }
      storage->values[row.offset + atoms[a].first[0] - lo] = atoms[a].second;
    }
    storage->rows.push_back(row);
    i = j;
  }
  return CountDist(std::move(storage), false);
}

absl::Status CountDist::WriteCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError("cannot open " + path);
  out << (arity() == 2 ? "n0,n1,log_prob\n" : "n0,n1,n2,log_prob\n");
  ForEachAtom([&](const CountTuple& t, LogProb lp) {
    if (arity() == 2) {
      out << absl::StrFormat("%d,%d,%.17e\n", t[0], t[1], lp);
    } else {
      out << absl::StrFormat("%d,%d,%d,%.17e\n", t[0], t[1], t[2], lp);
    }
  });
  if (!out) return absl::DataLossError("write failed: " + path);
  return absl::OkStatus();
}

std::string CountDist::SidecarJson() const {
  nlohmann::json j;
  j["arity"] = arity();
  j["n"] = n();
  j["dropped_tail"] = std::exp(dropped_tail());
  if (dropped_tail() == kLogZero) {
    j["log_dropped_tail"] = nullptr;
  } else {
    j["log_dropped_tail"] = dropped_tail();
  }
  j["max_ratio_bound"] = max_ratio_bound();
  return j.dump(2);
}

absl::Status CountDist::WriteSidecar(const std::string& path) const {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError("cannot open " + path);
  out << SidecarJson() << "\n";
  if (!out) return absl::DataLossError("write failed: " + path);
  return absl::OkStatus();
}

absl::StatusOr<CountDist> CountDist::ReadCsv(const std::string& csv_path,
                                             const std::string& sidecar_path) {
  std::ifstream side(sidecar_path);
  if (!side) return absl::NotFoundError("cannot open " + sidecar_path);
  nlohmann::json j = nlohmann::json::parse(side, nullptr, false);
  if (j.is_discarded() || !j.contains("arity") || !j.contains("n")) {
    return absl::InvalidArgumentError("malformed sidecar " + sidecar_path);
  }
  int arity = j["arity"].get<int>();
  int64_t n = j["n"].get<int64_t>();
  LogProb dropped = kLogZero;
  if (j.contains("log_dropped_tail") && !j["log_dropped_tail"].is_null()) {
    dropped = j["log_dropped_tail"].get<double>();
  } else if (j.contains("dropped_tail")) {
    double d = j["dropped_tail"].get<double>();
    dropped = d > 0.0 ? std::log(d) : kLogZero;
  }
  double bound = j.value("max_ratio_bound", 1.0);

  std::ifstream in(csv_path);
  if (!in) return absl::NotFoundError("cannot open " + csv_path);
  std::vector<std::pair<CountTuple, LogProb>> atoms;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    absl::string_view sv = absl::StripAsciiWhitespace(line);
    if (sv.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<absl::string_view> cells = absl::StrSplit(sv, ',');
    if (static_cast<int>(cells.size()) != arity + 1) {
      return absl::InvalidArgumentError("bad CSV row: " + line);
    }
    CountTuple t{0, 0, 0};
    for (int c = 0; c < arity; ++c) {
      if (!absl::SimpleAtoi(cells[c], &t[c])) {
        return absl::InvalidArgumentError("bad count in row: " + line);
      }
    }
    double lp;
    if (!absl::SimpleAtod(cells[arity], &lp)) {
      return absl::InvalidArgumentError("bad log_prob in row: " + line);
    }
    if (lp == kLogZero) continue;
    atoms.emplace_back(t, lp);
  }
  return FromAtoms(arity, n, std::move(atoms), dropped, bound);
}

}  // namespace shuffle_amp
