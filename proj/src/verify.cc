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

#include "shuffle_amp/verify.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "shuffle_amp/bounds.h"
#include "shuffle_amp/clone_pairs.h"
#include "shuffle_amp/decompose.h"
#include "shuffle_amp/divergence.h"
#include "shuffle_amp/oracle.h"

namespace shuffle_amp {
namespace {

// Largest atomwise gap between an exact law and a CountDist.
double MaxAtomGap(const ExactTupleLaw& exact, const ExactTupleLaw& built) {
  std::set<CountTuple> keys;
  for (const auto& [t, m] : exact) keys.insert(t);
  for (const auto& [t, m] : built) keys.insert(t);
  double gap = 0.0;
  for (const CountTuple& t : keys) {
    auto a = exact.find(t);
    auto b = built.find(t);
    const Float50 va = a == exact.end() ? Float50(0) : a->second;
    const Float50 vb = b == built.end() ? Float50(0) : b->second;
    gap = std::max(gap, static_cast<double>(boost::multiprecision::abs(va - vb)));
  }
  return gap;
}

// Fails the check on the first error status; otherwise folds in a boolean.
class Checker {
 public:
  explicit Checker(std::string name) { result_.name = std::move(name); }

  bool Ok(const absl::Status& st, const std::string& what) {
    if (st.ok()) return true;
    Fail(absl::StrFormat("%s: %s", what, st.ToString()));
    return false;
  }
  void Expect(bool cond, const std::string& what) {
    if (!cond) Fail(what);
  }
  CheckResult Finish(const std::string& summary) {
    result_.pass = failures_ == 0;
    if (result_.pass) result_.detail = summary;
    return result_;
  }

 private:
  void Fail(const std::string& what) {
    if (failures_++ == 0) result_.detail = what;
  }

  CheckResult result_;
  int failures_ = 0;
};

double RelGap(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

}  // namespace

CheckResult CheckOracleEquivalence(int n_max, double tol) {
  Checker check("oracle_equivalence");
  const double eps0s[] = {std::log(2.0), 1.0, 2.0};
  const double alphas[] = {2.0, 4.5};
  int cases = 0;
  double worst = 0.0;
  for (int k : {2, 3}) {
    for (double eps0 : eps0s) {
      for (int n = 2; n <= n_max; ++n) {
        std::vector<int> x0(n, k), x1(n, k);
        x0[0] = 1;
        x1[0] = 2;
        ExactTupleLaw p_exact, q_exact;
        OracleCaps caps;
        caps.max_n = std::max(caps.max_n, n_max);
        if (eps0 == eps0s[0]) {
          auto d0 = ExactShuffledKrr(Rational(2), k, x0, caps);
          auto d1 = ExactShuffledKrr(Rational(2), k, x1, caps);
          if (!check.Ok(d0.status(), "oracle") || !check.Ok(d1.status(), "oracle")) {
            continue;
          }
          p_exact = ProjectOnesTwos(*d0);
          q_exact = ProjectOnesTwos(*d1);
        } else {
          const Float50 e = boost::multiprecision::exp(Float50(eps0));
          auto d0 = ExactShuffledKrr(e, k, x0, caps);
          auto d1 = ExactShuffledKrr(e, k, x1, caps);
          if (!check.Ok(d0.status(), "oracle") || !check.Ok(d1.status(), "oracle")) {
            continue;
          }
          p_exact = ProjectOnesTwos(*d0);
          q_exact = ProjectOnesTwos(*d1);
        }
        const double e = std::exp(eps0);
        const double p = 1.0 / (e + k - 1.0);
        absl::StatusOr<DistPair> clone = BuildPair3Sym({eps0, n, p, 0.0}, 0.0);
        if (!check.Ok(clone.status(), "clone pair")) continue;
        // For k = 2 the projection keeps every report, so compare the full
        // law with the binary pair and the count of ones with the clone pair.
        DistPair engine_pair = *clone;
        if (k == 2) {
          absl::StatusOr<DistPair> rr = BuildPairBinaryRR(eps0, n, 0.0);
          if (!check.Ok(rr.status(), "binary pair")) continue;
          engine_pair = *rr;
          const double g = std::max(
              MaxAtomGap(MarginalN0(p_exact), MarginalN0(ToExactLaw(clone->p))),
              MaxAtomGap(MarginalN0(q_exact), MarginalN0(ToExactLaw(clone->q))));
          worst = std::max(worst, g);
          check.Expect(g <= tol,
                       absl::StrFormat("k=2 n=%d eps0=%g: ones marginal off "
                                       "by %g",
                                       n, eps0, g));
        }
        const double gap =
            std::max(MaxAtomGap(p_exact, ToExactLaw(engine_pair.p)),
                     MaxAtomGap(q_exact, ToExactLaw(engine_pair.q)));
        worst = std::max(worst, gap);
        check.Expect(gap <= tol,
                     absl::StrFormat("k=%d n=%d eps0=%g: atom gap %g", k, n,
                                     eps0, gap));
        for (double frac : {0.0, 0.25, 0.5, 0.9}) {
          const double eps = frac * eps0;
          for (bool forward : {true, false}) {
            const CountDist& a = forward ? engine_pair.p : engine_pair.q;
            const CountDist& b = forward ? engine_pair.q : engine_pair.p;
            absl::StatusOr<Enclosure> h = HockeyStick(a, b, eps);
            if (!check.Ok(h.status(), "hockey-stick")) continue;
            const double exact = static_cast<double>(ExactHockeyStick(
                forward ? p_exact : q_exact, forward ? q_exact : p_exact, eps));
            worst = std::max(worst, std::fabs(h->upper - exact));
            check.Expect(h->Contains(exact, tol) && h->width() <= tol,
                         absl::StrFormat("k=%d n=%d eps0=%g eps=%g: hockey "
                                         "[%.17g, %.17g] vs exact %.17g",
                                         k, n, eps0, eps, h->lower, h->upper,
                                         exact));
          }
        }
        for (double alpha : alphas) {
          absl::StatusOr<Enclosure> r = Renyi(engine_pair.p, engine_pair.q, alpha);
          if (!check.Ok(r.status(), "renyi")) continue;
          const double exact =
              static_cast<double>(ExactRenyi(p_exact, q_exact, alpha));
          worst = std::max(worst, std::fabs(r->upper - exact));
          check.Expect(r->Contains(exact, tol),
                       absl::StrFormat("k=%d n=%d eps0=%g alpha=%g: renyi "
                                       "[%.17g, %.17g] vs exact %.17g",
                                       k, n, eps0, alpha, r->lower, r->upper,
                                       exact));
        }
        ++cases;
      }
    }
  }
  return check.Finish(
      absl::StrFormat("%d cases, worst gap %.3g", cases, worst));
}

CheckResult CheckKernelsMatchReference(int64_t n) {
  Checker check("kernels_match_reference");
  const double eps0 = 2.0;
  const double e = std::exp(eps0);
  std::vector<std::pair<std::string, absl::StatusOr<DistPair>>> pairs;
  pairs.emplace_back("3sym", BuildPair3Sym({eps0, n, 1.0 / (e + 1.0), 0.0}));
  pairs.emplace_back("4sym",
                     BuildPair4Sym({eps0, n, 1.0 / (e + 3.0), 2.0 / (e + 3.0)}));
  pairs.emplace_back("binary-rr", BuildPairBinaryRR(eps0, n));
  pairs.emplace_back("fmt20", BuildPairFmt20(eps0, n));
  double worst = 0.0;
  using Fn = std::function<absl::StatusOr<Enclosure>(const CountDist&,
                                                     const CountDist&)>;
  const std::vector<std::pair<std::string, std::pair<Fn, Fn>>> ops = {
      {"hockey", {[](auto& a, auto& b) { return HockeyStick(a, b, 0.3); },
                  [](auto& a, auto& b) {
                    return reference::HockeyStick(a, b, 0.3);
                  }}},
      {"renyi", {[](auto& a, auto& b) { return Renyi(a, b, 3.0); },
                 [](auto& a, auto& b) { return reference::Renyi(a, b, 3.0); }}},
      {"kl", {[](auto& a, auto& b) { return KullbackLeibler(a, b); },
              [](auto& a, auto& b) {
                return reference::KullbackLeibler(a, b);
              }}},
      {"tail", {[](auto& a, auto& b) { return PrivacyLossTail(a, b, 0.2); },
                [](auto& a, auto& b) {
                  return reference::PrivacyLossTail(a, b, 0.2);
                }}},
  };
  for (const auto& [name, pair] : pairs) {
    if (!check.Ok(pair.status(), name)) continue;
    for (const auto& [op, fns] : ops) {
      for (bool forward : {true, false}) {
        const CountDist& a = forward ? pair->p : pair->q;
        const CountDist& b = forward ? pair->q : pair->p;
        absl::StatusOr<Enclosure> fast = fns.first(a, b);
        absl::StatusOr<Enclosure> slow = fns.second(a, b);
        if (!check.Ok(fast.status(), name + " " + op) ||
            !check.Ok(slow.status(), name + " reference " + op)) {
          continue;
        }
        const double gap = std::max(RelGap(fast->lower, slow->lower),
                                    RelGap(fast->upper, slow->upper));
        worst = std::max(worst, gap);
        check.Expect(gap <= 1e-12,
                     absl::StrFormat("%s %s: kernel [%.17g, %.17g] vs "
                                     "reference [%.17g, %.17g]",
                                     name, op, fast->lower, fast->upper,
                                     slow->lower, slow->upper));
      }
    }
  }
  return check.Finish(absl::StrFormat("n=%d, worst relative gap %.3g", n, worst));
}

CheckResult CheckMassAccounting(int64_t n) {
  Checker check("mass_accounting");
  const double eps0 = 3.0;
  const double e = std::exp(eps0);
  std::vector<std::pair<std::string, absl::StatusOr<DistPair>>> pairs;
  pairs.emplace_back("3sym", BuildPair3Sym({eps0, n, 1.0 / (e + 1.0), 0.0}));
  pairs.emplace_back("4sym",
                     BuildPair4Sym({eps0, n, 1.0 / (e + 7.0), 6.0 / (e + 7.0)}));
  pairs.emplace_back("fmt20", BuildPairFmt20(eps0, n));
  pairs.emplace_back("binary-rr", BuildPairBinaryRR(eps0, n));
  pairs.emplace_back("3sym-rdp",
                     BuildPair3Sym({eps0, n, 1.0 / (e + 1.0), 0.0}, 1e-30));
  for (const auto& [name, pair] : pairs) {
    if (!check.Ok(pair.status(), name)) continue;
    for (const CountDist* d : {&pair->p, &pair->q}) {
      const double kept = std::exp(d->LogTotalMass());
      const double dropped = std::exp(d->dropped_tail());
      check.Expect(kept <= 1.0 + 1e-12 && kept + dropped >= 1.0 - 1e-12,
                   absl::StrFormat("%s: kept %.17g, dropped %.3g", name, kept,
                                   dropped));
    }
  }
  return check.Finish(absl::StrFormat("n=%d, %d pairs", n, pairs.size()));
}

CheckResult CheckMonotoneInP(int64_t n) {
  Checker check("hockey_monotone_in_p");
  const double eps0 = 2.0;
  const double p_max = 1.0 / (std::exp(eps0) + 1.0);
  const double eps_grid[] = {0.05, 0.2, 0.5, 1.0};
  std::vector<std::vector<Enclosure>> rows;
  for (int j = 1; j <= 10; ++j) {
    absl::StatusOr<DistPair> pair =
        BuildPair3Sym({eps0, n, p_max * j / 10.0, 0.0});
    if (!check.Ok(pair.status(), "3sym")) return check.Finish("");
    PairEvaluator evaluator(*std::move(pair));
    std::vector<Enclosure> row;
    for (double eps : eps_grid) {
      absl::StatusOr<Enclosure> d = evaluator.Delta(eps);
      if (!check.Ok(d.status(), "delta")) return check.Finish("");
      row.push_back(*d);
    }
    rows.push_back(row);
  }
  for (size_t j = 1; j < rows.size(); ++j) {
    for (size_t i = 0; i < rows[j].size(); ++i) {
      check.Expect(rows[j][i].upper >= rows[j - 1][i].lower - 1e-12,
                   absl::StrFormat("eps=%g: delta falls from %.17g to %.17g "
                                   "between p grid points %d and %d",
                                   eps_grid[i], rows[j - 1][i].lower,
                                   rows[j][i].upper, j, j + 1));
    }
  }
  return check.Finish(absl::StrFormat("n=%d, 10 p values x 4 eps", n));
}

CheckResult CheckOrdering(const std::vector<int64_t>& ns) {
  Checker check("bound_ordering");
  const double delta = 1e-6;
  int points = 0;
  for (int64_t n : ns) {
    for (double eps0 : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) {
      auto general = EpsUpperNumeric(
          eps0, n, delta, BoundVariant::GeneralExtremal(kRandomizersInExtremalClass));
      auto fmt20 = EpsUpperNumeric(eps0, n, delta, BoundVariant::Fmt20());
      if (!check.Ok(general.status(), "general") ||
          !check.Ok(fmt20.status(), "fmt20")) {
        continue;
      }
      check.Expect(general->point.eps <= fmt20->point.eps + 1e-12,
                   absl::StrFormat("n=%d eps0=%g: general %.6g above fmt20 %.6g",
                                   n, eps0, general->point.eps,
                                   fmt20->point.eps));
      for (int k : {2, 3}) {
        auto lower = KrrLowerEps(eps0, k, n, delta);
        if (!check.Ok(lower.status(), "krr lower")) continue;
        check.Expect(lower->point.eps <= general->point.eps + 1e-12,
                     absl::StrFormat("n=%d eps0=%g k=%d: lower %.6g above "
                                     "general %.6g",
                                     n, eps0, k, lower->point.eps,
                                     general->point.eps));
      }
      ++points;
    }
  }
  return check.Finish(absl::StrFormat("%d grid points", points));
}

CheckResult CheckDecompositionFixtures() {
  Checker check("decomposition_fixtures");
  for (double eps0 : {0.5, 1.0, 3.0}) {
    const double e = std::exp(eps0);
    absl::StatusOr<DecompositionResult> krr =
        ExtremalParams(KrrMatrix(4, eps0), 0, 1, eps0);
    if (!check.Ok(krr.status(), "kRR k=4")) continue;
    check.Expect(std::fabs(krr->p - 1.0 / (e + 3.0)) <= 1e-12 &&
                     std::fabs(krr->q - 2.0 / (e + 3.0)) <= 1e-12 &&
                     krr->residual <= 1e-10,
                 absl::StrFormat("kRR k=4 eps0=%g: p=%.17g q=%.17g", eps0,
                                 krr->p, krr->q));
    absl::StatusOr<MembershipResult> member =
        InExtremalClass(KrrMatrix(3, eps0), 0, 1, eps0);
    if (!check.Ok(member.status(), "kRR k=3 membership")) continue;
    check.Expect(member->member, "kRR k=3 outside the class");
  }
  check.Expect(VerifyLdp(UniformMatrix(3, 4)) == 0.0,
               "uniform randomizer has nonzero eps0");
  return check.Finish("kRR k in {3, 4}, uniform");
}

std::vector<CheckResult> RunVerify(VerifyLevel level) {
  const bool full = level == VerifyLevel::kFull;
  const int64_t n = full ? 10000 : 1000;
  std::vector<CheckResult> out;
  out.push_back(CheckOracleEquivalence(full ? 8 : 6, 1e-12));
  out.push_back(CheckKernelsMatchReference(n));
  out.push_back(CheckMassAccounting(n));
  out.push_back(CheckMonotoneInP(n));
  out.push_back(CheckOrdering(full ? std::vector<int64_t>{1000, 10000}
                                   : std::vector<int64_t>{1000}));
  out.push_back(CheckDecompositionFixtures());
  return out;
}

}  // namespace shuffle_amp
