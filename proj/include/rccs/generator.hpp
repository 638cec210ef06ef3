#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rccs/syntax.hpp"

namespace rccs {

struct GenConfig {
  std::uint64_t seed = 42;
  int max_depth = 3;       // nesting depth of operators
  bool allow_random = true;
  bool allow_par = true;
  std::vector<std::string> channels = {"a", "b", "c"};
};

/// Seeded random process generator biased toward oracle-sized state spaces:
/// shallow recursion, at most two parallel components per level, random
/// weights drawn from a fixed menu. Same seed, same sequence of terms — the
/// raw mt19937_64 stream is used directly because std distributions are not
/// portable across implementations.
class TermGenerator {
 public:
  explicit TermGenerator(GenConfig config) : cfg_(std::move(config)), rng_(cfg_.seed) {}
  explicit TermGenerator(std::uint64_t seed) : TermGenerator(GenConfig{seed}) {}

  /// A closed, validated term.
  TermPtr process() {
    TermPtr t = gen(cfg_.max_depth, {}, cfg_.allow_par ? 1 : 0);
    validate(t);
    return t;
  }

  /// A closed term without random choice.
  TermPtr ccs_process() {
    bool saved = cfg_.allow_random;
    cfg_.allow_random = false;
    TermPtr t = process();
    cfg_.allow_random = saved;
    return t;
  }

  /// A nonempty guarded sum usable as a summand context.
  TermPtr guarded_summand() {
    std::vector<ChoiceBranch> branches;
    std::size_t n = 1 + next(2);
    for (std::size_t i = 0; i < n; ++i)
      branches.push_back({action(), gen(1, {}, 0)});
    return choice(std::move(branches));
  }

  std::string channel() { return cfg_.channels[next(cfg_.channels.size())]; }

  Prefix action() {
    switch (next(3)) {
      case 0: return act_in(channel());
      case 1: return act_out(channel());
      default: return act_tau();
    }
  }

  /// A weight from {1/2, 1/3, 2/3, 1/4, 3/4}.
  Rational probability() {
    static const std::pair<int, int> menu[] = {{1, 2}, {1, 3}, {2, 3}, {1, 4}, {3, 4}};
    auto [num, den] = menu[next(5)];
    return make_rational(num, den);
  }

  /// A term equal to t by construction: syntactic identity, composition with
  /// 0, duplication of a sum branch, fixpoint unfolding, or restriction of an
  /// unused channel. All are sound for strong (hence branching) equivalence.
  TermPtr equal_variant(const TermPtr& t) {
    for (int attempts = 0; attempts < 4; ++attempts) {
      switch (next(5)) {
        case 0:
          return t;
        case 1:
          return next(2) ? par(t, nil()) : par(nil(), t);
        case 2:
          if (t->kind == Term::Kind::Choice && !t->branches.empty()) {
            auto branches = t->branches;
            branches.push_back(branches[next(branches.size())]);
            return choice(std::move(branches));
          }
          break;
        case 3:
          if (t->kind == Term::Kind::Fix) return unfold(t);
          break;
        case 4: {
          auto used = free_channels(t);
          for (char c = 'u'; c <= 'z'; ++c) {
            std::string name(1, c);
            if (!used.count(name)) return restriction(name, t);
          }
          break;
        }
      }
    }
    return t;
  }

  std::uint64_t next(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }

 private:
  TermPtr gen(int depth, std::vector<std::string> guarded_vars, int par_budget) {
    // Leaves
    if (depth <= 0) {
      if (!guarded_vars.empty() && next(2))
        return var(guarded_vars[next(guarded_vars.size())]);
      return next(2) ? nil() : prefix(action(), nil());
    }
    switch (next(cfg_.allow_random ? 6 : 5)) {
      case 0:
        return nil();
      case 1: {  // guarded sum, variables become usable below the prefixes
        std::size_t n = 1 + next(2);
        std::vector<ChoiceBranch> branches;
        for (std::size_t i = 0; i < n; ++i)
          branches.push_back({action(), gen(depth - 1, guarded_vars, par_budget)});
        return choice(std::move(branches));
      }
      case 2: {
        if (par_budget <= 0) return prefix(action(), gen(depth - 1, guarded_vars, 0));
        // Parallel components must be closed to keep guardedness decisions local.
        return par(gen(depth - 1, {}, par_budget - 1), gen(depth - 1, {}, par_budget - 1));
      }
      case 3:
        return restriction(channel(), gen(depth - 1, guarded_vars, par_budget));
      case 4: {  // fixpoint; the bound variable may only appear guarded
        std::string v = "X" + std::to_string(fix_counter_++);
        auto inner = guarded_vars;
        inner.push_back(v);
        // Body is a guarded sum (or random choice) so the variable is guarded.
        std::size_t n = 1 + next(2);
        std::vector<ChoiceBranch> branches;
        for (std::size_t i = 0; i < n; ++i)
          branches.push_back({action(), gen(depth - 1, inner, par_budget)});
        return fix(v, choice(std::move(branches)));
      }
      default: {  // random choice with weights summing to 1
        std::vector<RandomBranch> branches;
        if (next(4) == 0) {
          Rational p = probability();
          branches.push_back({p, gen(depth - 1, guarded_vars, par_budget)});
          Rational q = (1 - p) / 2;
          branches.push_back({q, gen(depth - 1, guarded_vars, par_budget)});
          branches.push_back({1 - p - q, gen(depth - 1, guarded_vars, par_budget)});
        } else {
          Rational p = probability();
          branches.push_back({p, gen(depth - 1, guarded_vars, par_budget)});
          branches.push_back({1 - p, gen(depth - 1, guarded_vars, par_budget)});
        }
        return random_choice(std::move(branches));
      }
    }
  }

  GenConfig cfg_;
  std::mt19937_64 rng_;
  int fix_counter_ = 0;
};

}  // namespace rccs
