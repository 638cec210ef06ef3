#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "rccs/equivalence.hpp"
#include "rccs/partition.hpp"
#include "rccs/semantics.hpp"

namespace rccs {

constexpr std::size_t kDefaultOracleBound = 8;
constexpr std::size_t kHardOracleCap = 11;

// ---------------------------------------------------------------------------
// Definitional checker
// ---------------------------------------------------------------------------

/// Does the candidate partition satisfy both bisimulation clauses and
/// codivergence? Evaluated literally: members of a block must agree on every
/// ℓ-transition, every q-transition and the existence of divergent
/// epsilon-trees, all with respect to the FIXED candidate partition (for
/// which the per-partition analyses are exact).
inline bool is_branching_bisim(const Partition& p, const StateSpace& space,
                               std::size_t oracle_bound = kDefaultOracleBound) {
  if (space.size() > oracle_bound) throw OracleBoundError(oracle_bound);
  for (const auto& block : p.blocks) {
    if (block.size() == 1) {
      // Singleton blocks satisfy the clauses vacuously.
      continue;
    }
    auto sigs = detail::signatures_of_block(block, p, space);
    const Signature& first = sigs.at(block.front());
    for (StateId s : block)
      if (!(sigs.at(s) == first)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Exhaustive search for the coarsest bisimulation
// ---------------------------------------------------------------------------

struct EnumerationResult {
  Partition coarsest;
  std::size_t passing_count = 0;
};

namespace detail {

/// Union-find based join: the finest partition in which any two states that
/// share a block in ANY passing partition share a block.
inline Partition join_partitions(const std::vector<std::vector<BlockId>>& passing,
                                 std::size_t n) {
  std::vector<StateId> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](StateId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& labels : passing) {
    std::map<BlockId, StateId> leader;
    for (StateId s = 0; s < n; ++s) {
      auto [it, inserted] = leader.emplace(labels[s], s);
      if (!inserted) parent[find(s)] = find(it->second);
    }
  }
  std::vector<BlockId> raw(n);
  for (StateId s = 0; s < n; ++s) raw[s] = find(s);
  return Partition::from_block_of(raw);
}

}  // namespace detail

/// Enumerates every partition of the state set (restricted growth strings),
/// keeps those passing is_branching_bisim, and returns their join. The union
/// of codivergent branching bisimulations is again one, so the join must
/// itself pass — verified before returning.
inline EnumerationResult coarsest_by_enumeration_full(const StateSpace& space,
                                                      std::size_t oracle_bound = kDefaultOracleBound) {
  std::size_t n = space.size();
  if (n > std::min(oracle_bound, kHardOracleCap)) throw OracleBoundError(oracle_bound);

  std::vector<std::vector<BlockId>> passing;
  std::vector<BlockId> rgs(n, 0);
  struct Rec {
    std::size_t n;
    const StateSpace& space;
    std::vector<BlockId>& rgs;
    std::vector<std::vector<BlockId>>& passing;
    void run(std::size_t i, BlockId max_used) {
      if (i == n) {
        Partition p = Partition::from_block_of(rgs);
        if (is_branching_bisim(p, space, n)) passing.push_back(rgs);
        return;
      }
      for (BlockId b = 0; b <= max_used + 1; ++b) {
        rgs[i] = b;
        run(i + 1, std::max(max_used, b));
      }
    }
  };
  if (n == 0) {
    return {Partition::universal(0), 1};
  }
  rgs[0] = 0;
  Rec{n, space, rgs, passing}.run(1, 0);

  EnumerationResult result;
  result.passing_count = passing.size();
  result.coarsest = detail::join_partitions(passing, n);
  if (!is_branching_bisim(result.coarsest, space, n))
    throw Error("join of passing bisimulations failed the definitional check");
  return result;
}

inline Partition coarsest_by_enumeration(const StateSpace& space,
                                         std::size_t oracle_bound = kDefaultOracleBound) {
  return coarsest_by_enumeration_full(space, oracle_bound).coarsest;
}

// ---------------------------------------------------------------------------
// Classical CCS baseline
// ---------------------------------------------------------------------------

namespace detail {

/// States tau-reachable from s without leaving its block (the classical
/// =>_E preamble), s included.
inline std::set<StateId> inblock_tau_closure(StateId s, const Partition& p,
                                             const StateSpace& space) {
  BlockId home = p.block_of[s];
  std::set<StateId> seen{s};
  std::vector<StateId> queue{s};
  while (!queue.empty()) {
    StateId x = queue.back();
    queue.pop_back();
    for (const auto& b : space.bundles[x]) {
      if (b.kind != BundleKind::Tau) continue;
      if (p.block_of[b.target] != home) continue;
      if (seen.insert(b.target).second) queue.push_back(b.target);
    }
  }
  return seen;
}

struct CcsSignature {
  std::vector<std::pair<Prefix, BlockId>> moves;  // tau entries have a foreign block
  bool divergent = false;
  friend bool operator==(const CcsSignature&, const CcsSignature&) = default;
  friend bool operator<(const CcsSignature& a, const CcsSignature& b) {
    if (a.moves != b.moves) return a.moves < b.moves;
    return a.divergent < b.divergent;
  }
};

/// E-divergence for CCS: an infinite in-block tau path, i.e. membership in
/// the greatest fixpoint of "has an in-block tau successor in the set".
inline std::set<StateId> ccs_divergent_states(const std::vector<StateId>& block,
                                              const Partition& p, const StateSpace& space) {
  BlockId home = p.block_of[block.front()];
  std::set<StateId> live(block.begin(), block.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = live.begin(); it != live.end();) {
      bool ok = false;
      for (const auto& b : space.bundles[*it])
        ok = ok || (b.kind == BundleKind::Tau && p.block_of[b.target] == home &&
                    live.count(b.target));
      if (!ok) {
        it = live.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return live;
}

inline CcsSignature ccs_signature(StateId s, const Partition& p, const StateSpace& space,
                                  const std::set<StateId>& divergent) {
  CcsSignature sig;
  std::set<std::pair<Prefix, BlockId>> items;
  for (StateId x : inblock_tau_closure(s, p, space)) {
    for (const auto& b : space.bundles[x]) {
      if (b.kind == BundleKind::Visible) {
        items.insert({b.action, p.block_of[b.target]});
      } else if (b.kind == BundleKind::Tau) {
        if (p.block_of[b.target] != p.block_of[s]) items.insert({act_tau(), p.block_of[b.target]});
      } else {
        throw RandomTermInCcsOracleError();
      }
    }
  }
  sig.moves.assign(items.begin(), items.end());
  sig.divergent = divergent.count(s) > 0;
  return sig;
}

}  // namespace detail

/// Decides =_CCS (the largest codivergent branching bisimulation of classical
/// CCS) by signature refinement over weak in-block preambles. Independent of
/// the epsilon-tree machinery; used for the conservativity comparison.
inline bool ccs_equal(const TermPtr& t1, const TermPtr& t2,
                      std::size_t bound = kDefaultStateBound) {
  if (contains_random(t1) || contains_random(t2)) throw RandomTermInCcsOracleError();
  StateSpace space = build_state_space(std::vector<TermPtr>{t1, t2}, bound);
  Partition p = Partition::universal(space.size());
  for (;;) {
    std::vector<BlockId> raw(space.size(), 0);
    BlockId next = 0;
    for (const auto& block : p.blocks) {
      auto divergent = detail::ccs_divergent_states(block, p, space);
      std::map<detail::CcsSignature, BlockId> groups;
      for (StateId s : block) {
        auto sig = detail::ccs_signature(s, p, space, divergent);
        auto [it, inserted] = groups.emplace(std::move(sig), next);
        if (inserted) ++next;
        raw[s] = it->second;
      }
    }
    Partition refined = Partition::from_block_of(raw);
    if (refined == p) break;
    p = std::move(refined);
  }
  return p.same_block(space.roots[0], space.roots[1]);
}

// ---------------------------------------------------------------------------
// Golden records
// ---------------------------------------------------------------------------

/// FNV-1a over the canonical serialization of a space; stable fingerprint for
/// golden files.
inline std::string space_hash(const StateSpace& space) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  };
  for (StateId s = 0; s < space.size(); ++s) {
    mix(space.texts[s]);
    for (const auto& b : space.bundles[s]) {
      std::string enc = std::to_string(s) + ";";
      switch (b.kind) {
        case BundleKind::Visible:
          enc += "v;" + detail::print_action(b.action) + ";" + std::to_string(b.target);
          break;
        case BundleKind::Tau:
          enc += "t;" + std::to_string(b.target);
          break;
        case BundleKind::Random:
          enc += "r";
          for (const auto& br : b.branches)
            enc += ";" + rational_string(br.probability) + ":" + std::to_string(br.target);
          break;
      }
      mix(enc);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json golden_record(const StateSpace& space, const EnumerationResult& e) {
  Json j;
  j["format"] = "rccs-lab/1";
  j["space_hash"] = space_hash(space);
  j["coarsest_partition"] = Json::array();
  for (const auto& block : e.coarsest.blocks) j["coarsest_partition"].push_back(block);
  j["passing_count"] = e.passing_count;
  return j;
}

}  // namespace rccs
