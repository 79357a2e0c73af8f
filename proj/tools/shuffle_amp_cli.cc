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

// shuffle-amp: amplification bounds for shuffled local randomizers.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "shuffle_amp/accountant.h"
#include "shuffle_amp/bounds.h"
#include "shuffle_amp/decompose.h"
#include "shuffle_amp/verify.h"

namespace shuffle_amp {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitSweepFailed = 4;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int ExitCodeFor(const absl::Status& st) {
  if (st.ok()) return kExitOk;
  if (st.code() == absl::StatusCode::kInvalidArgument) return kExitUsage;
  return kExitPrecondition;
}

enum class Quantity { kAdpEps, kRdpEps, kCompose, kKrr };

const std::map<std::string, Quantity> kQuantities = {
    {"adp-eps", Quantity::kAdpEps},
    {"rdp-eps", Quantity::kRdpEps},
    {"compose", Quantity::kCompose},
    {"krr", Quantity::kKrr},
};

struct Options {
  std::vector<double> eps0;
  std::vector<int64_t> n;
  std::vector<double> delta;
  std::vector<double> alpha;
  std::vector<double> alpha_range;  // lo, hi, count
  std::vector<int> k;
  std::vector<int64_t> rounds;
  std::vector<std::string> variants;
  double p = kNaN;
  double q = 0.0;
  double trunc = kDefaultTrunc;
  double rdp_trunc = kDefaultRdpTrunc;
  double tol = kDefaultTol;
  int jobs = 1;
  std::string format = "csv";
  std::string out;
  bool base2 = false;
};

struct Row {
  std::vector<double> key;  // grid indices, for ordering
  std::vector<double> inputs;
  double value = kNaN;
  double lower = kNaN;
  double upper = kNaN;
  std::string variant;
  double seconds = 0.0;
  std::string error;
  int exit_code = kExitOk;
};

struct Table {
  std::vector<std::string> input_names;
  std::vector<Row> rows;
};

double Now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Times one row; the first row of a task also carries the setup cost.
class RowClock {
 public:
  RowClock() : last_(Now()) {}
  double Lap() {
    const double t = Now();
    const double d = t - last_;
    last_ = t;
    return d;
  }

 private:
  double last_;
};

Row ErrorRow(std::vector<double> key, std::vector<double> inputs,
             const std::string& variant, const absl::Status& st) {
  Row row;
  row.key = std::move(key);
  row.inputs = std::move(inputs);
  row.variant = variant;
  row.error = std::string(st.message());
  row.exit_code = ExitCodeFor(st);
  return row;
}

bool IsGeneral(const std::string& v) {
  return v == "general-extremal" || v == "numeric";
}

absl::StatusOr<BoundVariant> NumericVariant(const std::string& name,
                                            const Options& opt) {
  if (IsGeneral(name)) {
    return BoundVariant::GeneralExtremal(kRandomizersInExtremalClass);
  }
  if (name == "fmt20") return BoundVariant::Fmt20();
  if (name == "custom") {
    if (std::isnan(opt.p)) {
      return absl::InvalidArgumentError("variant custom needs --p");
    }
    return BoundVariant::Custom(opt.p, opt.q);
  }
  return absl::InvalidArgumentError(
      absl::StrFormat("variant '%s' is not a clone-pair bound", name));
}

using Task = std::function<std::vector<Row>()>;

// ---------------------------------------------------------------- adp-eps

std::vector<Task> AdpTasks(const Options& opt) {
  std::vector<Task> tasks;
  for (size_t i = 0; i < opt.eps0.size(); ++i) {
    for (size_t j = 0; j < opt.n.size(); ++j) {
      for (size_t v = 0; v < opt.variants.size(); ++v) {
        tasks.push_back([&opt, i, j, v]() {
          const double eps0 = opt.eps0[i];
          const int64_t n = opt.n[j];
          const std::string& name = opt.variants[v];
          std::vector<Row> rows;
          RowClock clock;
          auto key = [&](size_t d) {
            return std::vector<double>{double(i), double(j), double(d),
                                       double(v)};
          };
          auto inputs = [&](size_t d) {
            return std::vector<double>{eps0, double(n), opt.delta[d]};
          };
          if (name == "analytic") {
            for (size_t d = 0; d < opt.delta.size(); ++d) {
              absl::StatusOr<AdpPoint> pt =
                  EpsUpperAnalytic(eps0, n, opt.delta[d]);
              if (!pt.ok()) {
                rows.push_back(ErrorRow(key(d), inputs(d), name, pt.status()));
                continue;
              }
              Row row{key(d), inputs(d), pt->eps, pt->eps, pt->eps, name};
              row.seconds = clock.Lap();
              rows.push_back(row);
            }
            return rows;
          }
          absl::StatusOr<BoundVariant> variant = NumericVariant(name, opt);
          absl::StatusOr<DistPair> pair =
              variant.ok() ? variant->BuildPair(eps0, n, opt.trunc)
                           : absl::StatusOr<DistPair>(variant.status());
          if (!pair.ok()) {
            for (size_t d = 0; d < opt.delta.size(); ++d) {
              rows.push_back(ErrorRow(key(d), inputs(d), name, pair.status()));
            }
            return rows;
          }
          PairEvaluator evaluator(*std::move(pair));
          for (size_t d = 0; d < opt.delta.size(); ++d) {
            absl::StatusOr<EpsBound> b =
                EpsUpperFromPair(evaluator, eps0, opt.delta[d], opt.tol);
            if (!b.ok()) {
              rows.push_back(ErrorRow(key(d), inputs(d), name, b.status()));
              continue;
            }
            Row row{key(d), inputs(d), b->point.eps, b->bracket.lo,
                    b->bracket.hi, name};
            if (b->infeasible_delta) row.error = "delta unreachable below eps0";
            row.seconds = clock.Lap();
            rows.push_back(row);
          }
          return rows;
        });
      }
    }
  }
  return tasks;
}

// ---------------------------------------------------------------- rdp-eps

std::vector<Task> RdpTasks(const Options& opt) {
  std::vector<Task> tasks;
  for (size_t i = 0; i < opt.eps0.size(); ++i) {
    for (size_t j = 0; j < opt.n.size(); ++j) {
      for (size_t v = 0; v < opt.variants.size(); ++v) {
        tasks.push_back([&opt, i, j, v]() {
          const double eps0 = opt.eps0[i];
          const int64_t n = opt.n[j];
          const std::string& name = opt.variants[v];
          std::vector<Row> rows;
          RowClock clock;
          auto key = [&](size_t a) {
            return std::vector<double>{double(i), double(j), double(a),
                                       double(v)};
          };
          auto inputs = [&](size_t a) {
            return std::vector<double>{eps0, double(n), opt.alpha[a]};
          };
          if (name == "closedform") {
            for (size_t a = 0; a < opt.alpha.size(); ++a) {
              absl::StatusOr<double> r =
                  RdpUpperClosedForm(eps0, n, opt.alpha[a]);
              if (!r.ok()) {
                rows.push_back(ErrorRow(key(a), inputs(a), name, r.status()));
                continue;
              }
              Row row{key(a), inputs(a), *r, *r, *r, name};
              row.seconds = clock.Lap();
              rows.push_back(row);
            }
            return rows;
          }
          if (name == "lower") {
            absl::StatusOr<std::vector<double>> lo =
                RdpLowerCurve(eps0, n, opt.alpha, opt.rdp_trunc);
            const double seconds = clock.Lap();
            for (size_t a = 0; a < opt.alpha.size(); ++a) {
              if (!lo.ok()) {
                rows.push_back(ErrorRow(key(a), inputs(a), name, lo.status()));
                continue;
              }
              Row row{key(a), inputs(a), (*lo)[a], (*lo)[a], (*lo)[a], name};
              row.seconds = a == 0 ? seconds : 0.0;
              rows.push_back(row);
            }
            return rows;
          }
          absl::StatusOr<BoundVariant> variant = NumericVariant(name, opt);
          absl::StatusOr<std::vector<Enclosure>> curve =
              variant.ok() ? RdpCurveNumeric(eps0, n, opt.alpha, *variant,
                                             opt.rdp_trunc)
                           : absl::StatusOr<std::vector<Enclosure>>(
                                 variant.status());
          const double seconds = clock.Lap();
          for (size_t a = 0; a < opt.alpha.size(); ++a) {
            if (!curve.ok()) {
              rows.push_back(ErrorRow(key(a), inputs(a), name, curve.status()));
              continue;
            }
            const Enclosure& e = (*curve)[a];
            Row row{key(a), inputs(a), e.upper, e.lower, e.upper, name};
            row.seconds = a == 0 ? seconds : 0.0;
            rows.push_back(row);
          }
          return rows;
        });
      }
    }
  }
  return tasks;
}

// ---------------------------------------------------------------- krr

std::vector<Task> KrrTasks(const Options& opt) {
  const bool rdp = !opt.alpha.empty();
  const std::vector<double>& xs = rdp ? opt.alpha : opt.delta;
  std::vector<Task> tasks;
  for (size_t i = 0; i < opt.eps0.size(); ++i) {
    for (size_t j = 0; j < opt.n.size(); ++j) {
      for (size_t kk = 0; kk < opt.k.size(); ++kk) {
        for (size_t v = 0; v < opt.variants.size(); ++v) {
          tasks.push_back([&opt, &xs, rdp, i, j, kk, v]() {
            const double eps0 = opt.eps0[i];
            const int64_t n = opt.n[j];
            const int k = opt.k[kk];
            const std::string& name = opt.variants[v];
            std::vector<Row> rows;
            RowClock clock;
            for (size_t x = 0; x < xs.size(); ++x) {
              std::vector<double> key{double(i), double(j), double(kk),
                                      double(x), double(v)};
              std::vector<double> inputs{eps0, double(n), double(k), xs[x]};
              Row row{key, inputs};
              row.variant = name;
              absl::Status st;
              if (rdp) {
                absl::StatusOr<Enclosure> e;
                if (name == "krr-upper") {
                  e = KrrUpperRdp(eps0, k, n, xs[x], opt.rdp_trunc);
                } else if (name == "krr-lower") {
                  e = KrrLowerRdp(eps0, k, n, xs[x], opt.rdp_trunc);
                } else if (IsGeneral(name)) {
                  e = KrrUpperRdp(eps0, 2, n, xs[x], opt.rdp_trunc);
                } else {
                  e = absl::InvalidArgumentError("unknown krr variant " + name);
                }
                st = e.status();
                if (e.ok()) {
                  row.lower = e->lower;
                  row.upper = e->upper;
                  row.value = name == "krr-lower" ? e->lower : e->upper;
                }
              } else {
                absl::StatusOr<EpsBound> b;
                NumericOptions no{opt.trunc, opt.tol};
                if (name == "krr-upper") {
                  b = KrrUpperEps(eps0, k, n, xs[x], no);
                } else if (name == "krr-lower") {
                  b = KrrLowerEps(eps0, k, n, xs[x], no);
                } else if (IsGeneral(name)) {
                  b = KrrUpperEps(eps0, 2, n, xs[x], no);
                } else {
                  b = absl::InvalidArgumentError("unknown krr variant " + name);
                }
                st = b.status();
                if (b.ok()) {
                  row.lower = b->bracket.lo;
                  row.upper = b->bracket.hi;
                  row.value = b->point.eps;
                }
              }
              if (!st.ok()) {
                rows.push_back(ErrorRow(key, inputs, name, st));
                continue;
              }
              row.seconds = clock.Lap();
              rows.push_back(row);
            }
            return rows;
          });
        }
      }
    }
  }
  return tasks;
}

// ---------------------------------------------------------------- compose

std::vector<Task> ComposeTasks(const Options& opt) {
  std::vector<Task> tasks;
  for (size_t i = 0; i < opt.eps0.size(); ++i) {
    for (size_t j = 0; j < opt.n.size(); ++j) {
      for (size_t d = 0; d < opt.delta.size(); ++d) {
        for (size_t v = 0; v < opt.variants.size(); ++v) {
          tasks.push_back([&opt, i, j, d, v]() {
            const double eps0 = opt.eps0[i];
            const int64_t n = opt.n[j];
            const double delta = opt.delta[d];
            const std::string& name = opt.variants[v];
            std::vector<Row> rows;
            RowClock clock;
            auto fail = [&](const absl::Status& st) {
              for (size_t t = 0; t < opt.rounds.size(); ++t) {
                for (int route = 0; route < 2; ++route) {
                  rows.push_back(ErrorRow(
                      {double(i), double(j), double(d), double(t), double(v),
                       double(route)},
                      {eps0, double(n), delta, double(opt.rounds[t])},
                      route == 0 ? name + "/rdp" : name + "/advanced", st));
                }
              }
              return rows;
            };
            absl::StatusOr<BoundVariant> variant = NumericVariant(name, opt);
            if (!variant.ok()) return fail(variant.status());
            const std::vector<double> alphas =
                opt.alpha.empty() ? DefaultAlphaGrid() : opt.alpha;
            absl::StatusOr<std::vector<Enclosure>> enc =
                RdpCurveNumeric(eps0, n, alphas, *variant, opt.rdp_trunc);
            if (!enc.ok()) return fail(enc.status());
            RdpCurve curve;
            curve.alphas = alphas;
            curve.provenance = variant->name();
            for (const Enclosure& e : *enc) curve.eps.push_back(e.upper);
            absl::StatusOr<DistPair> pair =
                variant->BuildPair(eps0, n, opt.trunc);
            if (!pair.ok()) return fail(pair.status());
            PairEvaluator evaluator(*std::move(pair));
            auto per_round = [&](double dr) -> absl::StatusOr<double> {
              absl::StatusOr<EpsBound> b =
                  EpsUpperFromPair(evaluator, eps0, dr, opt.tol);
              if (!b.ok()) return b.status();
              return b->point.eps;
            };
            absl::StatusOr<CompositionComparison> cmp =
                CompareComposition(curve, per_round, opt.rounds, delta);
            if (!cmp.ok()) return fail(cmp.status());
            const double seconds = clock.Lap();
            std::map<int64_t, const CompositionRow*> by_t;
            for (const CompositionRow& r : cmp->rows) by_t[r.rounds] = &r;
            for (size_t t = 0; t < opt.rounds.size(); ++t) {
              const CompositionRow& r = *by_t[opt.rounds[t]];
              for (int route = 0; route < 2; ++route) {
                Row row;
                row.key = {double(i), double(j), double(d), double(t),
                           double(v), double(route)};
                row.inputs = {eps0, double(n), delta, double(r.rounds)};
                row.value = route == 0 ? r.rdp_eps : r.advanced_eps;
                row.lower = row.upper = row.value;
                row.variant = route == 0 ? name + "/rdp" : name + "/advanced";
                row.seconds = t == 0 && route == 0 ? seconds : 0.0;
                rows.push_back(row);
              }
            }
            std::cerr << absl::StrFormat(
                "eps0=%g n=%d delta=%g: crossover T* = %s\n", eps0, n, delta,
                cmp->crossover > 0 ? std::to_string(cmp->crossover)
                                   : std::string("none in grid"));
            return rows;
          });
        }
      }
    }
  }
  return tasks;
}

// ---------------------------------------------------------------- output

std::string Num(double v) {
  if (std::isnan(v)) return "";
  return absl::StrFormat("%.15e", v);
}

std::string Input(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    return absl::StrFormat("%d", static_cast<int64_t>(v));
  }
  return absl::StrFormat("%.15e", v);
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Render(const Table& table, const std::string& format) {
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const Row& r : table.rows) {
      nlohmann::json o;
      for (size_t c = 0; c < table.input_names.size(); ++c) {
        o[table.input_names[c]] = r.inputs[c];
      }
      auto put = [&](const char* name, double v) {
        if (std::isnan(v)) {
          o[name] = nullptr;
        } else {
          o[name] = v;
        }
      };
      put("value", r.value);
      put("lower", r.lower);
      put("upper", r.upper);
      o["variant"] = r.variant;
      o["seconds"] = r.seconds;
      o["error"] = r.error;
      arr.push_back(o);
    }
    return arr.dump(2) + "\n";
  }
  std::string out = absl::StrJoin(table.input_names, ",") +
                    ",value,lower,upper,variant,seconds,error\n";
  for (const Row& r : table.rows) {
    for (double v : r.inputs) out += Input(v) + ",";
    absl::StrAppend(&out, Num(r.value), ",", Num(r.lower), ",", Num(r.upper),
                    ",", CsvField(r.variant), ",",
                    absl::StrFormat("%.6f", r.seconds), ",",
                    CsvField(r.error), "\n");
  }
  return out;
}

int Emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return kExitOk;
  }
  std::ofstream f(path);
  if (!f) {
    std::cerr << "error: cannot write " << path << "\n";
    return kExitPrecondition;
  }
  f << text;
  return kExitOk;
}

Table RunTasks(const std::vector<Task>& tasks, int jobs) {
  std::vector<std::vector<Row>> results(tasks.size());
  const int64_t total = static_cast<int64_t>(tasks.size());
  int64_t done = 0;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (int64_t t = 0; t < total; ++t) {
    results[t] = tasks[t]();
#pragma omp critical(progress)
    {
      ++done;
      if (total > 1) {
        std::cerr << absl::StrFormat("[%d/%d] grid points done\n", done,
                                     total);
      }
    }
  }
  Table table;
  for (auto& rs : results) {
    for (Row& r : rs) table.rows.push_back(std::move(r));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const Row& a, const Row& b) { return a.key < b.key; });
  return table;
}

void ToBase2(Table& table) {
  for (Row& r : table.rows) {
    r.value /= std::numbers::ln2;
    r.lower /= std::numbers::ln2;
    r.upper /= std::numbers::ln2;
  }
}

// ---------------------------------------------------------------- options

void AddGridOptions(CLI::App* cmd, Options& opt, Quantity q) {
  cmd->add_option("--eps0", opt.eps0, "Local privacy level(s) in nats")
      ->delimiter(',')
      ->required();
  cmd->add_option("--n", opt.n, "Number of users")->delimiter(',')->required();
  if (q != Quantity::kRdpEps) {
    cmd->add_option("--delta", opt.delta, "Target delta(s)")->delimiter(',');
  }
  if (q != Quantity::kAdpEps) {
    cmd->add_option("--alpha", opt.alpha, "Renyi order(s)")->delimiter(',');
    cmd->add_option("--alpha-range", opt.alpha_range,
                    "Geometric order grid LO,HI,COUNT")
        ->delimiter(',')
        ->expected(3);
  }
  if (q == Quantity::kKrr) {
    cmd->add_option("--k", opt.k, "Domain size(s)")->delimiter(',')->required();
  }
  if (q == Quantity::kCompose) {
    cmd->add_option("--T", opt.rounds, "Number(s) of rounds")
        ->delimiter(',')
        ->required();
  }
  cmd->add_option("--variant", opt.variants, "Bound variant (repeatable)")
      ->delimiter(',');
  cmd->add_option("--p", opt.p, "Clone probability for --variant custom");
  cmd->add_option("--q", opt.q, "Middle-symbol weight for --variant custom");
  cmd->add_option("--trunc", opt.trunc, "Tail budget for (eps, delta) pairs");
  cmd->add_option("--rdp-trunc", opt.rdp_trunc, "Tail budget for Renyi pairs");
  cmd->add_option("--tol", opt.tol, "Bisection tolerance in eps");
  cmd->add_option("--jobs", opt.jobs, "Grid points evaluated concurrently");
  cmd->add_option("--format", opt.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", opt.out, "Output file (default stdout)");
  cmd->add_flag("--base2", opt.base2, "Report eps in bits instead of nats");
}

absl::Status FinalizeGrid(Options& opt, Quantity q) {
  if (opt.alpha_range.size() == 3) {
    const double lo = opt.alpha_range[0];
    const double hi = opt.alpha_range[1];
    const int count = static_cast<int>(opt.alpha_range[2]);
    if (!(lo > 1.0) || !(hi >= lo) || count < 1) {
      return absl::InvalidArgumentError(
          "--alpha-range needs 1 < LO <= HI and COUNT >= 1");
    }
    for (int i = 0; i < count; ++i) {
      opt.alpha.push_back(count == 1 ? lo
                                     : lo * std::pow(hi / lo,
                                                     double(i) / (count - 1)));
    }
  }
  switch (q) {
    case Quantity::kAdpEps:
      if (opt.variants.empty()) opt.variants = {"general-extremal"};
      if (opt.delta.empty()) return absl::InvalidArgumentError("empty --delta grid");
      break;
    case Quantity::kRdpEps:
      if (opt.variants.empty()) opt.variants = {"general-extremal"};
      if (opt.alpha.empty()) return absl::InvalidArgumentError("empty --alpha grid");
      break;
    case Quantity::kKrr:
      if (opt.variants.empty()) opt.variants = {"krr-upper", "krr-lower"};
      if (opt.delta.empty() == opt.alpha.empty()) {
        return absl::InvalidArgumentError(
            "krr needs exactly one of --delta or --alpha");
      }
      break;
    case Quantity::kCompose:
      if (opt.variants.empty()) opt.variants = {"general-extremal"};
      if (opt.delta.empty()) return absl::InvalidArgumentError("empty --delta grid");
      break;
  }
  if (opt.eps0.empty() || opt.n.empty()) {
    return absl::InvalidArgumentError("empty --eps0 or --n grid");
  }
  if (q == Quantity::kKrr && opt.k.empty()) {
    return absl::InvalidArgumentError("empty --k grid");
  }
  if (q == Quantity::kCompose && opt.rounds.empty()) {
    return absl::InvalidArgumentError("empty --T grid");
  }
  for (const std::string& v : opt.variants) {
    if (IsGeneral(v)) {
      std::cerr << "note: general-extremal assumes every local randomizer "
                   "decomposes with p = 1/(e^eps0 + 1); check yours with "
                   "`shuffle-amp decompose`\n";
      break;
    }
  }
  return absl::OkStatus();
}

std::vector<std::string> InputNames(Quantity q) {
  switch (q) {
    case Quantity::kAdpEps:
      return {"eps0", "n", "delta"};
    case Quantity::kRdpEps:
      return {"eps0", "n", "alpha"};
    case Quantity::kKrr:
      return {"eps0", "n", "k", "x"};
    case Quantity::kCompose:
      return {"eps0", "n", "delta", "T"};
  }
  return {};
}

std::vector<Task> TasksFor(Quantity q, const Options& opt) {
  switch (q) {
    case Quantity::kAdpEps:
      return AdpTasks(opt);
    case Quantity::kRdpEps:
      return RdpTasks(opt);
    case Quantity::kKrr:
      return KrrTasks(opt);
    case Quantity::kCompose:
      return ComposeTasks(opt);
  }
  return {};
}

// Direct commands fail with the first row's error; sweeps only when every
// row failed.
int RunQuantity(Quantity q, Options& opt, bool sweep) {
  if (absl::Status st = FinalizeGrid(opt, q); !st.ok()) {
    std::cerr << "error: " << st.message() << "\n";
    return kExitUsage;
  }
  Table table = RunTasks(TasksFor(q, opt), opt.jobs);
  table.input_names = InputNames(q);
  if (q == Quantity::kKrr) {
    table.input_names[3] = opt.alpha.empty() ? "delta" : "alpha";
  }
  if (opt.base2) ToBase2(table);
  int failed = 0;
  int first_code = kExitOk;
  for (const Row& r : table.rows) {
    if (r.exit_code != kExitOk) {
      if (failed++ == 0) first_code = r.exit_code;
      std::cerr << "error: " << r.variant << ": " << r.error << "\n";
    }
  }
  if (int rc = Emit(Render(table, opt.format), opt.out); rc != kExitOk) {
    return rc;
  }
  if (sweep) {
    return failed == static_cast<int>(table.rows.size()) && failed > 0
               ? kExitSweepFailed
               : kExitOk;
  }
  return first_code;
}

// ---------------------------------------------------------------- decompose

struct DecomposeOptions {
  std::string matrix;
  int krr = 0;
  int rappor = 0;
  double rappor_alpha = 0.75;
  double rappor_beta = 0.25;
  std::string x0;
  std::string x1;
  double eps0 = kNaN;
  int64_t n = 0;
  double delta = kNaN;
  std::string format = "csv";
  std::string out;
};

int RunDecompose(const DecomposeOptions& opt) {
  RandomizerMatrix r;
  const int sources = !opt.matrix.empty() + (opt.krr > 0) + (opt.rappor > 0);
  if (sources != 1) {
    std::cerr << "error: give exactly one of --matrix, --krr, --rappor\n";
    return kExitUsage;
  }
  if (!opt.matrix.empty()) {
    absl::StatusOr<RandomizerMatrix> m = RandomizerMatrix::FromCsv(opt.matrix);
    if (!m.ok()) {
      std::cerr << "error: " << m.status().message() << "\n";
      return ExitCodeFor(m.status());
    }
    r = *std::move(m);
  } else if (opt.krr > 0) {
    if (std::isnan(opt.eps0)) {
      std::cerr << "error: --krr needs --eps0\n";
      return kExitUsage;
    }
    r = KrrMatrix(opt.krr, opt.eps0);
  } else {
    r = RapporMatrix(opt.rappor, opt.rappor_alpha, opt.rappor_beta);
  }
  if (absl::Status st = r.Validate(); !st.ok()) {
    std::cerr << "error: " << st.message() << "\n";
    return kExitUsage;
  }
  if (r.num_inputs() < 2) {
    std::cerr << "error: need at least two inputs\n";
    return kExitUsage;
  }
  size_t x0 = 0, x1 = 1;
  for (auto [label, slot] : {std::pair{opt.x0, &x0}, std::pair{opt.x1, &x1}}) {
    if (label.empty()) continue;
    absl::StatusOr<size_t> idx = r.InputIndex(label);
    if (!idx.ok()) {
      std::cerr << "error: " << idx.status().message() << "\n";
      return kExitUsage;
    }
    *slot = *idx;
  }
  const double eps0_hat = VerifyLdp(r);
  const double eps0 = std::isnan(opt.eps0) ? eps0_hat : opt.eps0;
  if (!std::isfinite(eps0_hat)) {
    std::cerr << "error: randomizer is not pure DP (some output has "
                 "probability zero under one input only)\n";
    return kExitPrecondition;
  }
  absl::StatusOr<DecompositionResult> d = ExtremalParams(r, x0, x1, eps0);
  if (!d.ok()) {
    std::cerr << "error: " << d.status().message() << "\n";
    return ExitCodeFor(d.status());
  }
  absl::StatusOr<MembershipResult> m = InExtremalClass(r, x0, x1, eps0);
  if (!m.ok()) {
    std::cerr << "error: " << m.status().message() << "\n";
    return ExitCodeFor(m.status());
  }

  nlohmann::ordered_json o;
  o["x0"] = r.inputs[x0];
  o["x1"] = r.inputs[x1];
  o["eps0_hat"] = eps0_hat;
  o["eps0"] = eps0;
  o["p"] = d->p;
  o["q"] = d->q;
  o["member"] = m->member;
  o["margin"] = m->margin;
  o["residual"] = d->residual;
  int rc = kExitOk;
  if (opt.n > 0 && !std::isnan(opt.delta)) {
    absl::StatusOr<BoundVariant> variant =
        m->member ? BoundVariant::GeneralExtremal(m->witness)
                  : absl::StatusOr<BoundVariant>(BoundVariant::Custom(*d));
    absl::StatusOr<EpsBound> b =
        variant.ok() ? EpsUpperNumeric(eps0, opt.n, opt.delta, *variant)
                     : absl::StatusOr<EpsBound>(variant.status());
    if (b.ok()) {
      o["bound_variant"] = variant->name();
      o["bound_eps"] = b->point.eps;
    } else {
      std::cerr << "error: " << b.status().message() << "\n";
      rc = ExitCodeFor(b.status());
    }
  }
  std::string text;
  if (opt.format == "json") {
    text = o.dump(2) + "\n";
  } else {
    std::vector<std::string> keys, vals;
    for (auto it = o.begin(); it != o.end(); ++it) {
      keys.push_back(it.key());
      if (it->is_number_float()) {
        vals.push_back(Num(it->get<double>()));
      } else if (it->is_string()) {
        vals.push_back(CsvField(it->get<std::string>()));
      } else {
        vals.push_back(it->dump());
      }
    }
    text = absl::StrJoin(keys, ",") + "\n" + absl::StrJoin(vals, ",") + "\n";
  }
  if (int e = Emit(text, opt.out); e != kExitOk) return e;
  return rc;
}

// ---------------------------------------------------------------- verify

int RunVerifyCommand(const std::string& level) {
  const VerifyLevel lv =
      level == "full" ? VerifyLevel::kFull : VerifyLevel::kQuick;
  bool all = true;
  for (const CheckResult& c : RunVerify(lv)) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail
              << "\n";
    all = all && c.pass;
  }
  std::cout.flush();
  return all ? kExitOk : kExitVerifyFailed;
}

constexpr char kSchemaHelp[] = R"(CSV columns
  adp-eps:  eps0,n,delta,value,lower,upper,variant,seconds,error
  rdp-eps:  eps0,n,alpha,value,lower,upper,variant,seconds,error
  krr:      eps0,n,k,delta|alpha,value,lower,upper,variant,seconds,error
  compose:  eps0,n,delta,T,value,lower,upper,variant,seconds,error
value is the reported bound; [lower, upper] brackets it (the bisection
bracket for eps, the certified enclosure for Renyi values). Values are in
nats unless --base2 is given.

Variants
  adp-eps:  general-extremal (alias numeric), fmt20, analytic, custom
  rdp-eps:  general-extremal (alias numeric), fmt20, closedform, lower, custom
  krr:      krr-upper, krr-lower, general-extremal
  compose:  general-extremal, fmt20, custom (rows tagged /rdp and /advanced)

Exit codes: 0 ok, 1 verify failure, 2 usage, 3 precondition,
4 every sweep row failed.)";

int Main(int argc, char** argv) {
  CLI::App app{"Privacy amplification bounds for shuffled local randomizers"};
  app.footer(kSchemaHelp);
  app.require_subcommand(1);

  Options eps_opt, rdp_opt, krr_opt, compose_opt, sweep_opt;
  CLI::App* eps = app.add_subcommand("eps", "(eps, delta) amplification bound");
  AddGridOptions(eps, eps_opt, Quantity::kAdpEps);
  CLI::App* rdp = app.add_subcommand("rdp", "Renyi amplification bound");
  AddGridOptions(rdp, rdp_opt, Quantity::kRdpEps);
  CLI::App* krr = app.add_subcommand("krr", "k-ary randomized response bounds");
  AddGridOptions(krr, krr_opt, Quantity::kKrr);
  CLI::App* compose =
      app.add_subcommand("compose", "Renyi route versus advanced composition");
  AddGridOptions(compose, compose_opt, Quantity::kCompose);

  // sweep accepts the union of the grid flags and picks by --quantity.
  std::string quantity;
  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate a grid to CSV/JSON");
  sweep->add_option("--quantity", quantity, "adp-eps | rdp-eps | compose | krr")
      ->required()
      ->check(CLI::IsMember({"adp-eps", "rdp-eps", "compose", "krr"}));
  sweep->add_option("--eps0", sweep_opt.eps0)->delimiter(',')->required();
  sweep->add_option("--n", sweep_opt.n)->delimiter(',')->required();
  sweep->add_option("--delta", sweep_opt.delta)->delimiter(',');
  sweep->add_option("--alpha", sweep_opt.alpha)->delimiter(',');
  sweep->add_option("--alpha-range", sweep_opt.alpha_range)
      ->delimiter(',')
      ->expected(3);
  sweep->add_option("--k", sweep_opt.k)->delimiter(',');
  sweep->add_option("--T", sweep_opt.rounds)->delimiter(',');
  sweep->add_option("--variant", sweep_opt.variants)->delimiter(',');
  sweep->add_option("--p", sweep_opt.p);
  sweep->add_option("--q", sweep_opt.q);
  sweep->add_option("--trunc", sweep_opt.trunc);
  sweep->add_option("--rdp-trunc", sweep_opt.rdp_trunc);
  sweep->add_option("--tol", sweep_opt.tol);
  sweep->add_option("--jobs", sweep_opt.jobs);
  sweep->add_option("--format", sweep_opt.format)
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--out", sweep_opt.out);
  sweep->add_flag("--base2", sweep_opt.base2);

  DecomposeOptions dec;
  CLI::App* decompose =
      app.add_subcommand("decompose", "Decompose a finite pure-DP randomizer");
  decompose->add_option("--matrix", dec.matrix,
                        "CSV: header of output labels, one row per input");
  decompose->add_option("--krr", dec.krr, "Use k-ary randomized response");
  decompose->add_option("--rappor", dec.rappor, "Use RAPPOR over K values");
  decompose->add_option("--rappor-alpha", dec.rappor_alpha,
                        "Pr[bit stays 1] for --rappor");
  decompose->add_option("--rappor-beta", dec.rappor_beta,
                        "Pr[0 bit becomes 1] for --rappor");
  decompose->add_option("--x0", dec.x0, "Label of the first input");
  decompose->add_option("--x1", dec.x1, "Label of the second input");
  decompose->add_option("--eps0", dec.eps0,
                        "Privacy level (default: tightest for the matrix)");
  decompose->add_option("--n", dec.n, "Chain into a bound for n users");
  decompose->add_option("--delta", dec.delta, "delta for the chained bound");
  decompose->add_option("--format", dec.format)
      ->check(CLI::IsMember({"csv", "json"}));
  decompose->add_option("--out", dec.out);

  std::string level = "quick";
  CLI::App* verify = app.add_subcommand("verify", "Run the built-in checks");
  verify->add_option("--level", level, "quick | full")
      ->check(CLI::IsMember({"quick", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*eps) return RunQuantity(Quantity::kAdpEps, eps_opt, false);
  if (*rdp) return RunQuantity(Quantity::kRdpEps, rdp_opt, false);
  if (*krr) return RunQuantity(Quantity::kKrr, krr_opt, false);
  if (*compose) return RunQuantity(Quantity::kCompose, compose_opt, false);
  if (*sweep) return RunQuantity(kQuantities.at(quantity), sweep_opt, true);
  if (*decompose) return RunDecompose(dec);
  if (*verify) return RunVerifyCommand(level);
  return kExitUsage;
}

}  // namespace
}  // namespace shuffle_amp

int main(int argc, char** argv) { return shuffle_amp::Main(argc, argv); }
