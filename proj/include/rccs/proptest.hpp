#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "rccs/equivalence.hpp"
#include "rccs/generator.hpp"
#include "rccs/oracle.hpp"

namespace rccs {

struct ProptestConfig {
  std::uint64_t seed = 42;
  int cases = 200;
  std::size_t state_bound = kDefaultStateBound;
  std::size_t oracle_bound = kDefaultOracleBound;
  std::size_t pair_space_cap = 60;     // keep generated joint spaces small
  std::size_t closure_space_cap = 600; // contexts multiply state counts
};

struct ProptestResult {
  int cases_run = 0;
  int checks = 0;
  int failures = 0;
  std::vector<std::string> reports;
};

namespace detail {

inline std::size_t node_count(const TermPtr& t) {
  std::size_t n = 1;
  switch (t->kind) {
    case Term::Kind::Var: break;
    case Term::Kind::Choice:
      for (const auto& b : t->branches) n += node_count(b.continuation);
      break;
    case Term::Kind::Random:
      for (const auto& b : t->randoms) n += node_count(b.continuation);
      break;
    case Term::Kind::Par:
      n += node_count(t->left) + node_count(t->right);
      break;
    case Term::Kind::Restrict:
    case Term::Kind::Fix:
      n += node_count(t->left);
      break;
  }
  return n;
}

inline bool well_formed_process(const TermPtr& t) {
  if (!is_process(t)) return false;
  try {
    validate(t);
  } catch (const Error&) {
    return false;
  }
  return true;
}

inline std::vector<TermPtr> shrink_candidates(const TermPtr& t) {
  std::vector<TermPtr> out;
  if (!is_nil(t)) out.push_back(nil());
  switch (t->kind) {
    case Term::Kind::Var:
      break;
    case Term::Kind::Choice:
      for (const auto& b : t->branches) out.push_back(b.continuation);
      if (t->branches.size() > 1) {
        for (std::size_t i = 0; i < t->branches.size(); ++i) {
          auto branches = t->branches;
          branches.erase(branches.begin() + static_cast<std::ptrdiff_t>(i));
          out.push_back(choice(std::move(branches)));
        }
      }
      break;
    case Term::Kind::Random:
      for (const auto& b : t->randoms) out.push_back(b.continuation);
      break;
    case Term::Kind::Par:
      out.push_back(t->left);
      out.push_back(t->right);
      break;
    case Term::Kind::Restrict:
      out.push_back(t->left);
      break;
    case Term::Kind::Fix:
      out.push_back(substitute(t->left, t->name, nil()));
      break;
  }
  std::vector<TermPtr> valid;
  for (auto& c : out)
    if (well_formed_process(c)) valid.push_back(std::move(c));
  return valid;
}

/// Greedy delta debugging: keep replacing either side by a smaller variant as
/// long as the property keeps failing.
inline std::pair<TermPtr, TermPtr> shrink_pair(
    TermPtr a, TermPtr b, const std::function<bool(const TermPtr&, const TermPtr&)>& fails) {
  bool improved = true;
  while (improved) {
    improved = false;
    for (int side = 0; side < 2 && !improved; ++side) {
      const TermPtr& cur = side == 0 ? a : b;
      for (const auto& cand : shrink_candidates(cur)) {
        if (node_count(cand) >= node_count(cur)) continue;
        bool still_fails = false;
        try {
          still_fails = side == 0 ? fails(cand, b) : fails(a, cand);
        } catch (const Error&) {
          still_fails = false;
        }
        if (still_fails) {
          (side == 0 ? a : b) = cand;
          improved = true;
          break;
        }
      }
    }
  }
  return {a, b};
}

}  // namespace detail

/// Seeded property sweep: oracle agreement and CCS conservativity on every
/// generated pair, plus closure of equality under parallel composition,
/// localization, guarded sums and random choice on the pairs found equal.
/// Failures are reported with delta-debugged term pairs.
inline ProptestResult run_proptest(const ProptestConfig& cfg, std::ostream& log) {
  ProptestResult result;

  auto fail = [&](int case_index, const std::string& what, const TermPtr& a, const TermPtr& b,
                  const std::function<bool(const TermPtr&, const TermPtr&)>& fails) {
    auto [sa, sb] = detail::shrink_pair(a, b, fails);
    std::string report = "case " + std::to_string(case_index) + ": " + what +
                         "\n  A = " + print(sa) + "\n  B = " + print(sb);
    ++result.failures;
    result.reports.push_back(report);
    log << "FAIL " << report << "\n";
  };

  for (int i = 0; i < cfg.cases; ++i) {
    TermGenerator gen(cfg.seed + static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull);
    TermPtr a = nil(), b = nil();
    for (int attempt = 0; attempt < 8; ++attempt) {
      TermPtr ca = gen.process();
      TermPtr cb = gen.next(2) ? gen.equal_variant(ca) : gen.process();
      try {
        build_state_space(std::vector<TermPtr>{ca, cb}, cfg.pair_space_cap);
      } catch (const BoundExceededError&) {
        continue;
      }
      a = ca;
      b = cb;
      break;
    }
    ++result.cases_run;

    CheckResult check = check_equal(a, b, cfg.state_bound);
    ++result.checks;

    // Agreement with the enumeration oracle on oracle-sized spaces.
    if (check.space.size() <= cfg.oracle_bound) {
      ++result.checks;
      Partition oracle = coarsest_by_enumeration(check.space, cfg.oracle_bound);
      if (!(oracle == check.partition)) {
        fail(i, "refinement disagrees with the enumeration oracle", a, b,
             [&](const TermPtr& x, const TermPtr& y) {
               CheckResult c = check_equal(x, y, cfg.state_bound);
               if (c.space.size() > cfg.oracle_bound) return false;
               return !(coarsest_by_enumeration(c.space, cfg.oracle_bound) == c.partition);
             });
      }
    }

    // Conservativity over classical CCS.
    if (!contains_random(a) && !contains_random(b)) {
      ++result.checks;
      bool ccs = ccs_equal(a, b, cfg.state_bound);
      if (ccs != check.equal) {
        fail(i, "=_CCS and =_RCCS disagree on a random-free pair", a, b,
             [&](const TermPtr& x, const TermPtr& y) {
               if (contains_random(x) || contains_random(y)) return false;
               return ccs_equal(x, y, cfg.state_bound) != check_equal(x, y, cfg.state_bound).equal;
             });
      }
    }

    if (!check.equal) continue;

    // Closure properties of =_RCCS under the operators, instantiated with
    // seeded contexts. Context pieces stay fixed while the pair shrinks.
    TermPtr context = gen.process();
    TermPtr dtail = gen.process();
    std::string chan = gen.channel();
    TermPtr summand = gen.guarded_summand();
    Prefix guard = gen.action();
    Rational p = gen.probability();

    struct Closure {
      std::string name;
      std::function<TermPtr(const TermPtr&)> wrap;
    };
    std::vector<Closure> closures = {
        {"closure under A | C",
         [&](const TermPtr& t) { return par(t, context); }},
        {"closure under C | A",
         [&](const TermPtr& t) { return par(context, t); }},
        {"closure under (new a)A",
         [&](const TermPtr& t) { return restriction(chan, t); }},
        // The sum context guards the hole: branching equivalences are closed
        // under guarded sums only, and grammar sums are guarded by shape.
        {"closure under guarded sum",
         [&](const TermPtr& t) {
           std::vector<ChoiceBranch> branches{{guard, t}};
           branches.insert(branches.end(), summand->branches.begin(), summand->branches.end());
           return choice(std::move(branches));
         }},
        {"closure under random choice",
         [&](const TermPtr& t) {
           return random_choice({{p, t}, {1 - p, dtail}});
         }},
    };

    for (const auto& closure : closures) {
      ++result.checks;
      bool ok = false;
      try {
        ok = check_equal(closure.wrap(a), closure.wrap(b), cfg.closure_space_cap).equal;
      } catch (const BoundExceededError&) {
        continue;  // context blew the bound; nothing to assert
      }
      if (!ok) {
        fail(i, closure.name + " violated", a, b,
             [&](const TermPtr& x, const TermPtr& y) {
               if (!check_equal(x, y, cfg.state_bound).equal) return false;
               return !check_equal(closure.wrap(x), closure.wrap(y), cfg.closure_space_cap).equal;
             });
      }
    }
  }

  log << "proptest: " << result.cases_run << " cases, " << result.checks << " checks, "
      << result.failures << " failures\n";
  return result;
}

}  // namespace rccs
