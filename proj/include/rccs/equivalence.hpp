#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rccs/partition.hpp"
#include "rccs/semantics.hpp"
#include "rccs/witness.hpp"

namespace rccs {

// ---------------------------------------------------------------------------
// Class-internal moves
// ---------------------------------------------------------------------------

/// Bundle indices of s usable inside an epsilon-tree of its block: tau bundles
/// whose target stays in the block, and random bundles ALL of whose branch
/// targets stay in the block — a random firing drags every child into the
/// tree, so one escaping branch disqualifies the whole bundle.
inline std::vector<std::size_t> internal_moves(StateId s, const Partition& p,
                                               const StateSpace& space) {
  std::vector<std::size_t> out;
  BlockId home = p.block_of[s];
  const auto& bundles = space.bundles[s];
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const Bundle& b = bundles[i];
    if (b.kind == BundleKind::Tau) {
      if (p.block_of[b.target] == home) out.push_back(i);
    } else if (b.kind == BundleKind::Random) {
      bool inside = true;
      for (const auto& br : b.branches) inside = inside && p.block_of[br.target] == home;
      if (inside) out.push_back(i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Almost-sure reachability inside a block
// ---------------------------------------------------------------------------

namespace detail {

/// Block-local working view: member positions, class-internal moves and the
/// targets of each move as block positions. Built once per (block, partition)
/// and shared by every analysis on that block.
struct BlockView {
  const std::vector<StateId>* block = nullptr;
  std::vector<std::vector<std::size_t>> moves;          // bundle indices per member
  std::vector<std::vector<std::vector<std::size_t>>> move_targets;  // positions

  std::size_t size() const { return block->size(); }

  std::size_t pos(StateId s) const {
    auto it = std::lower_bound(block->begin(), block->end(), s);
    return static_cast<std::size_t>(it - block->begin());
  }
};

inline BlockView make_block_view(const std::vector<StateId>& block, const Partition& p,
                                 const StateSpace& space) {
  BlockView view;
  view.block = &block;
  view.moves.resize(block.size());
  view.move_targets.resize(block.size());
  for (std::size_t i = 0; i < block.size(); ++i) {
    StateId s = block[i];
    view.moves[i] = internal_moves(s, p, space);
    for (std::size_t m : view.moves[i]) {
      const Bundle& b = space.bundles[s][m];
      std::vector<std::size_t> targets;
      if (b.kind == BundleKind::Tau) {
        targets.push_back(view.pos(b.target));
      } else {
        targets.reserve(b.branches.size());
        for (const auto& br : b.branches) targets.push_back(view.pos(br.target));
      }
      view.move_targets[i].push_back(std::move(targets));
    }
  }
  return view;
}

/// Qualitative core shared by every per-partition analysis: which members of
/// the block admit a policy of class-internal moves that reaches `good` with
/// probability one, never leaving the winning set. Greatest fixpoint over a
/// least fixpoint; since every branch weight is positive and the block is
/// finite, this is exactly "some epsilon-tree is regular with all leaves in
/// good".
struct AsReach {
  std::vector<char> winner;                     // per block position
  std::map<StateId, PolicyDecision> decisions;  // Stop on good, move otherwise
};

inline AsReach as_reach_block(const BlockView& view, const std::vector<char>& good,
                              const StateSpace& space, bool want_policy) {
  std::size_t n = view.size();
  std::vector<char> candidate(n, 1);
  std::vector<char> reached(n, 0);

  auto move_ok = [&](std::size_t i, std::size_t m, const std::vector<char>& within,
                     const std::vector<char>& hits) {
    bool inside = true, hit = false;
    for (std::size_t t : view.move_targets[i][m]) {
      inside = inside && within[t];
      hit = hit || hits[t];
    }
    return inside && hit;
  };

  for (;;) {
    for (std::size_t i = 0; i < n; ++i) reached[i] = candidate[i] && good[i];
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!candidate[i] || reached[i]) continue;
        for (std::size_t m = 0; m < view.moves[i].size(); ++m) {
          if (move_ok(i, m, candidate, reached)) {
            reached[i] = 1;
            grew = true;
            break;
          }
        }
      }
    }
    if (reached == candidate) break;
    candidate = reached;
  }

  AsReach result;
  result.winner = candidate;
  if (!want_policy) return result;

  // Layered policy: distance-to-good strictly decreases along some branch of
  // the chosen move, so a Stop leaf is reached almost surely.
  std::vector<int> layer_of(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (candidate[i] && good[i]) {
      layer_of[i] = 0;
      result.decisions[(*view.block)[i]] = {Decision::Stop, 0};
    }
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!candidate[i] || layer_of[i] >= 0) continue;
      for (std::size_t m = 0; m < view.moves[i].size(); ++m) {
        bool inside = true, closer = false;
        for (std::size_t t : view.move_targets[i][m]) {
          inside = inside && candidate[t];
          closer = closer || layer_of[t] >= 0;
        }
        if (inside && closer) {
          StateId s = (*view.block)[i];
          const Bundle& b = space.bundles[s][view.moves[i][m]];
          layer_of[i] = 1;  // any positive layer; progress is what matters
          result.decisions[s] = {b.kind == BundleKind::Tau ? Decision::TakeTau
                                                           : Decision::TakeRandom,
                                 view.moves[i][m]};
          grew = true;
          break;
        }
      }
    }
  }
  return result;
}

/// Members of the block with a divergent (leafless) epsilon-tree: greatest
/// fixpoint of "has a class-internal move all of whose targets stay in the
/// set".
inline std::vector<char> divergent_block(const BlockView& view) {
  std::size_t n = view.size();
  std::vector<char> live(n, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!live[i]) continue;
      bool ok = false;
      for (std::size_t m = 0; m < view.moves[i].size() && !ok; ++m) {
        bool inside = true;
        for (std::size_t t : view.move_targets[i][m]) inside = inside && live[t];
        ok = inside;
      }
      if (!ok) {
        live[i] = 0;
        changed = true;
      }
    }
  }
  return live;
}

}  // namespace detail

/// Is there a regular epsilon-tree of s all of whose leaves lie in `good`?
/// On success the returned policy stops exactly at good states.
inline bool as_reach(StateId s, const Partition& p, const std::set<StateId>& good,
                     const StateSpace& space, WitnessPolicy* policy_out = nullptr) {
  const auto& block = p.blocks[p.block_of[s]];
  auto view = detail::make_block_view(block, p, space);
  std::vector<char> good_flags(block.size(), 0);
  for (StateId g : good) {
    if (p.block_of[g] != p.block_of[s])
      throw PreconditionError("good states must lie in the block of s");
    good_flags[view.pos(g)] = 1;
  }
  auto r = detail::as_reach_block(view, good_flags, space, policy_out != nullptr);
  if (!r.winner[view.pos(s)]) return false;
  if (policy_out) {
    policy_out->root = s;
    policy_out->decide = std::move(r.decisions);
  }
  return true;
}

// ---------------------------------------------------------------------------
// The three transition analyses
// ---------------------------------------------------------------------------

namespace detail {

inline std::set<StateId> ell_good_set(const std::vector<StateId>& block, const Prefix& ell,
                                      BlockId target, const Partition& p,
                                      const StateSpace& space) {
  std::set<StateId> good;
  for (StateId x : block) {
    for (const auto& b : space.bundles[x]) {
      bool match = false;
      if (ell.polarity == Polarity::Tau)
        match = b.kind == BundleKind::Tau && p.block_of[b.target] == target;
      else
        match = b.kind == BundleKind::Visible && b.action == ell &&
                p.block_of[b.target] == target;
      if (match) {
        good.insert(x);
        break;
      }
    }
  }
  return good;
}

}  // namespace detail

/// Weighted probability of one random bundle leaving the source class for
/// block C: mass into C over mass leaving the class. Nullopt when the bundle
/// is entirely class-internal (the firing is state-preserving and offers no
/// q-transition).
inline std::optional<Rational> weighted_prob(StateId s, std::size_t bundle_index, BlockId c,
                                             const Partition& p, const StateSpace& space) {
  if (bundle_index >= space.bundles[s].size() ||
      space.bundles[s][bundle_index].kind != BundleKind::Random)
    throw PreconditionError("weighted_prob needs a random bundle of s");
  BlockId home = p.block_of[s];
  if (c == home) throw SameBlockError();
  return detail::bundle_weighted_prob(space.bundles[s][bundle_index], c, home, p);
}

/// A ⇝→ℓ C: a regular epsilon-tree each of whose leaves does an immediate
/// ℓ-move into C.
inline bool has_ell_transition(StateId s, const Prefix& ell, BlockId c, const Partition& p,
                               const StateSpace& space, WitnessPolicy* policy_out = nullptr) {
  if (ell.polarity == Polarity::Tau && c == p.block_of[s])
    throw PreconditionError("tau transitions into the state's own class are vacuous");
  const auto& block = p.blocks[p.block_of[s]];
  auto good = detail::ell_good_set(block, ell, c, p, space);
  WitnessPolicy policy;
  if (!as_reach(s, p, good, space, &policy)) return false;
  if (policy_out) {
    policy.purpose = {PolicyPurpose::Kind::Ell, ell, Rational(0), c};
    *policy_out = policy;
  }
  return true;
}

/// A ⇝→q C: a regular epsilon-tree each of whose leaves fires some random
/// bundle with weighted probability exactly q into C. One bundle per leaf,
/// no mixing.
inline bool has_q_transition(StateId s, const Rational& q, BlockId c, const Partition& p,
                             const StateSpace& space, WitnessPolicy* policy_out = nullptr) {
  if (c == p.block_of[s]) throw SameBlockError();
  if (!(q > 0 && q <= 1)) throw PreconditionError("q must lie in (0,1]");
  const auto& block = p.blocks[p.block_of[s]];
  std::set<StateId> good;
  for (StateId x : block) {
    const auto& bundles = space.bundles[x];
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      if (bundles[i].kind != BundleKind::Random) continue;
      auto wp = detail::bundle_weighted_prob(bundles[i], c, p.block_of[s], p);
      if (wp.has_value() && *wp == q) {
        good.insert(x);
        break;
      }
    }
  }
  WitnessPolicy policy;
  if (!as_reach(s, p, good, space, &policy)) return false;
  if (policy_out) {
    policy.purpose = {PolicyPurpose::Kind::Q, Prefix{}, q, c};
    *policy_out = policy;
  }
  return true;
}

/// Does s admit a divergent (leafless) epsilon-tree? Greatest fixpoint of
/// "has a class-internal move all of whose targets stay divergent-capable".
inline bool has_divergent_tree(StateId s, const Partition& p, const StateSpace& space,
                               WitnessPolicy* policy_out = nullptr) {
  const auto& block = p.blocks[p.block_of[s]];
  auto view = detail::make_block_view(block, p, space);
  auto live = detail::divergent_block(view);
  if (!live[view.pos(s)]) return false;
  if (policy_out) {
    policy_out->root = s;
    policy_out->purpose = {PolicyPurpose::Kind::Divergence, Prefix{}, Rational(0), 0};
    policy_out->decide.clear();
    for (std::size_t i = 0; i < view.size(); ++i) {
      if (!live[i]) continue;
      for (std::size_t m = 0; m < view.moves[i].size(); ++m) {
        bool inside = true;
        for (std::size_t t : view.move_targets[i][m]) inside = inside && live[t];
        if (inside) {
          StateId x = block[i];
          const Bundle& b = space.bundles[x][view.moves[i][m]];
          policy_out->decide[x] = {b.kind == BundleKind::Tau ? Decision::TakeTau
                                                             : Decision::TakeRandom,
                                   view.moves[i][m]};
          break;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

/// Behavioral fingerprint of a state with respect to a partition: exactly the
/// obligations of the two bisimulation clauses plus the codivergence bit.
struct Signature {
  std::vector<std::pair<Prefix, BlockId>> visible;   // sorted
  std::vector<BlockId> taujumps;                     // sorted, own block excluded
  std::vector<std::pair<Rational, BlockId>> qjumps;  // sorted, own block excluded
  bool divergent = false;

  friend bool operator==(const Signature&, const Signature&) = default;
  friend bool operator<(const Signature& a, const Signature& b) {
    if (a.visible != b.visible) return a.visible < b.visible;
    if (a.taujumps != b.taujumps) return a.taujumps < b.taujumps;
    if (a.qjumps != b.qjumps) return a.qjumps < b.qjumps;
    return a.divergent < b.divergent;
  }
};

namespace detail {

/// Signatures for every member of one block. Candidate items are harvested
/// from the block's own bundles — any item with an empty good set is false
/// for all members, so nothing else can appear in a signature.
inline std::map<StateId, Signature> signatures_of_block(const std::vector<StateId>& block,
                                                        const Partition& p,
                                                        const StateSpace& space) {
  BlockId home = p.block_of[block.front()];
  std::set<std::pair<Prefix, BlockId>> visible_cands;
  std::set<BlockId> tau_cands;
  std::set<std::pair<Rational, BlockId>> q_cands;
  for (StateId x : block) {
    const auto& bundles = space.bundles[x];
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      const Bundle& b = bundles[i];
      switch (b.kind) {
        case BundleKind::Visible:
          visible_cands.insert({b.action, p.block_of[b.target]});
          break;
        case BundleKind::Tau:
          if (p.block_of[b.target] != home) tau_cands.insert(p.block_of[b.target]);
          break;
        case BundleKind::Random: {
          std::set<BlockId> touched;
          for (const auto& br : b.branches)
            if (p.block_of[br.target] != home) touched.insert(p.block_of[br.target]);
          for (BlockId c : touched) {
            auto wp = bundle_weighted_prob(b, c, home, p);
            if (wp.has_value() && *wp > 0) q_cands.insert({*wp, c});
          }
          break;
        }
      }
    }
  }

  auto view = make_block_view(block, p, space);

  std::map<StateId, Signature> sigs;
  for (StateId x : block) sigs[x] = {};

  for (const auto& [action, c] : visible_cands) {
    auto good = ell_good_set(block, action, c, p, space);
    std::vector<char> flags(block.size(), 0);
    for (StateId g : good) flags[view.pos(g)] = 1;
    auto r = as_reach_block(view, flags, space, false);
    for (std::size_t i = 0; i < block.size(); ++i)
      if (r.winner[i]) sigs[block[i]].visible.push_back({action, c});
  }
  for (BlockId c : tau_cands) {
    auto good = ell_good_set(block, act_tau(), c, p, space);
    std::vector<char> flags(block.size(), 0);
    for (StateId g : good) flags[view.pos(g)] = 1;
    auto r = as_reach_block(view, flags, space, false);
    for (std::size_t i = 0; i < block.size(); ++i)
      if (r.winner[i]) sigs[block[i]].taujumps.push_back(c);
  }
  for (const auto& [q, c] : q_cands) {
    std::vector<char> flags(block.size(), 0);
    for (std::size_t i = 0; i < block.size(); ++i) {
      for (const auto& b : space.bundles[block[i]]) {
        if (b.kind != BundleKind::Random) continue;
        auto wp = bundle_weighted_prob(b, c, home, p);
        if (wp.has_value() && *wp == q) {
          flags[i] = 1;
          break;
        }
      }
    }
    auto r = as_reach_block(view, flags, space, false);
    for (std::size_t i = 0; i < block.size(); ++i)
      if (r.winner[i]) sigs[block[i]].qjumps.push_back({q, c});
  }
  auto divergent = divergent_block(view);
  for (std::size_t i = 0; i < block.size(); ++i)
    sigs[block[i]].divergent = divergent[i] != 0;
  return sigs;
}

}  // namespace detail

inline Signature signature(StateId s, const Partition& p, const StateSpace& space) {
  auto sigs = detail::signatures_of_block(p.blocks[p.block_of[s]], p, space);
  return sigs.at(s);
}

// ---------------------------------------------------------------------------
// Partition refinement
// ---------------------------------------------------------------------------

struct RefineResult {
  Partition partition;
  std::size_t iterations = 0;
  std::vector<Partition> history;  // history.front() is universal
};

/// Splits blocks by signature until stable, starting from the universal
/// partition. The fixpoint makes every block signature-homogeneous, which is
/// precisely the definition of a codivergent branching bisimulation, and
/// starting coarse keeps it the coarsest one (checked against the enumeration
/// oracle in the tests).
inline RefineResult refine_trace(const StateSpace& space) {
  RefineResult result;
  Partition p = Partition::universal(space.size());
  result.history.push_back(p);
  for (;;) {
    ++result.iterations;
    std::vector<BlockId> raw(space.size(), 0);
    BlockId next = 0;
    for (const auto& block : p.blocks) {
      auto sigs = detail::signatures_of_block(block, p, space);
      std::map<Signature, BlockId> groups;
      for (StateId s : block) {
        auto [it, inserted] = groups.emplace(sigs.at(s), next);
        if (inserted) ++next;
        raw[s] = it->second;
      }
    }
    Partition refined = Partition::from_block_of(raw);
    if (refined == p) break;
    p = std::move(refined);
    result.history.push_back(p);
  }
  result.partition = p;
  return result;
}

inline Partition refine(const StateSpace& space) { return refine_trace(space).partition; }

// ---------------------------------------------------------------------------
// Equality checking
// ---------------------------------------------------------------------------

/// First signature item separating two states; divergence is reported first
/// since it is the coarsest behavioral difference.
struct Evidence {
  enum class Kind { Divergence, Visible, Tau, Q };
  Kind kind = Kind::Divergence;
  bool left_has = false;  // does the LEFT root carry the item?
  Prefix action;          // Visible
  Rational q;             // Q
  BlockId block = 0;      // Visible / Tau / Q target block
};

namespace detail {

inline std::optional<Evidence> diff_signatures(const Signature& a, const Signature& b) {
  if (a.divergent != b.divergent)
    return Evidence{Evidence::Kind::Divergence, a.divergent, Prefix{}, Rational(0), 0};
  auto first_only_in = [](const auto& xs, const auto& ys) {
    for (const auto& x : xs)
      if (std::find(ys.begin(), ys.end(), x) == ys.end()) return std::optional(x);
    return std::optional<typename std::decay_t<decltype(xs)>::value_type>();
  };
  if (auto v = first_only_in(a.visible, b.visible))
    return Evidence{Evidence::Kind::Visible, true, v->first, Rational(0), v->second};
  if (auto v = first_only_in(b.visible, a.visible))
    return Evidence{Evidence::Kind::Visible, false, v->first, Rational(0), v->second};
  if (auto v = first_only_in(a.taujumps, b.taujumps))
    return Evidence{Evidence::Kind::Tau, true, Prefix{}, Rational(0), *v};
  if (auto v = first_only_in(b.taujumps, a.taujumps))
    return Evidence{Evidence::Kind::Tau, false, Prefix{}, Rational(0), *v};
  if (auto v = first_only_in(a.qjumps, b.qjumps))
    return Evidence{Evidence::Kind::Q, true, Prefix{}, v->first, v->second};
  if (auto v = first_only_in(b.qjumps, a.qjumps))
    return Evidence{Evidence::Kind::Q, false, Prefix{}, v->first, v->second};
  return std::nullopt;
}

}  // namespace detail

struct CheckResult {
  bool equal = false;
  StateSpace space;          // joint space over both roots
  Partition partition;       // stable partition
  std::size_t iterations = 0;
  std::optional<Evidence> evidence;  // set when not equal
};

/// Decides =_RCCS on two closed terms over their joint state space.
inline CheckResult check_equal(const TermPtr& t1, const TermPtr& t2,
                               std::size_t bound = kDefaultStateBound) {
  CheckResult result;
  result.space = build_state_space(std::vector<TermPtr>{t1, t2}, bound);
  RefineResult r = refine_trace(result.space);
  result.partition = r.partition;
  result.iterations = r.iterations;
  StateId left = result.space.roots[0];
  StateId right = result.space.roots[1];
  result.equal = result.partition.same_block(left, right);
  if (!result.equal) {
    auto ev = detail::diff_signatures(signature(left, result.partition, result.space),
                                      signature(right, result.partition, result.space));
    if (!ev.has_value()) {
      // The final signatures coincide even though the roots were separated
      // earlier; report the item that split them at separation time.
      for (std::size_t i = 1; i < r.history.size() && !ev.has_value(); ++i) {
        if (!r.history[i].same_block(left, right)) {
          const Partition& before = r.history[i - 1];
          ev = detail::diff_signatures(signature(left, before, result.space),
                                       signature(right, before, result.space));
        }
      }
    }
    result.evidence = ev;
  }
  return result;
}

inline Json evidence_to_json(const Evidence& e) {
  Json j;
  switch (e.kind) {
    case Evidence::Kind::Divergence:
      j["kind"] = "divergence";
      j["detail"] = {{"left_divergent", e.left_has}, {"right_divergent", !e.left_has}};
      break;
    case Evidence::Kind::Visible:
      j["kind"] = "visible";
      j["detail"] = {{"action", detail::print_action(e.action)},
                     {"block", e.block},
                     {"present_for", e.left_has ? "left" : "right"}};
      break;
    case Evidence::Kind::Tau:
      j["kind"] = "tau";
      j["detail"] = {{"block", e.block}, {"present_for", e.left_has ? "left" : "right"}};
      break;
    case Evidence::Kind::Q:
      j["kind"] = "q";
      j["detail"] = {{"q", rational_string(e.q)},
                     {"block", e.block},
                     {"present_for", e.left_has ? "left" : "right"}};
      break;
  }
  return j;
}

inline std::string evidence_to_text(const Evidence& e) {
  switch (e.kind) {
    case Evidence::Kind::Divergence:
      return std::string("divergence: ") + (e.left_has ? "left" : "right") +
             " has a divergent epsilon-tree, the other does not";
    case Evidence::Kind::Visible:
      return "visible: only " + std::string(e.left_has ? "left" : "right") + " has " +
             detail::print_action(e.action) + " into block " + std::to_string(e.block);
    case Evidence::Kind::Tau:
      return "tau: only " + std::string(e.left_has ? "left" : "right") +
             " has a tau jump into block " + std::to_string(e.block);
    case Evidence::Kind::Q:
      return "q: only " + std::string(e.left_has ? "left" : "right") +
             " has a q-transition with q=" + rational_string(e.q) + " into block " +
             std::to_string(e.block);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Quotient
// ---------------------------------------------------------------------------

/// Quotient LTS under a partition: one state per block (represented by its
/// least member), bundles redirected blockwise, duplicates merged. Bundle
/// lists of the quotient are NOT step() of the representative terms.
inline StateSpace quotient(const StateSpace& space, const Partition& p) {
  StateSpace q;
  q.bound = space.bound;
  for (const auto& block : p.blocks) {
    StateId representative = block.front();
    q.terms.push_back(space.terms[representative]);
    q.texts.push_back(space.texts[representative]);
  }
  for (StateId r : space.roots) {
    BlockId b = p.block_of[r];
    if (std::find(q.roots.begin(), q.roots.end(), b) == q.roots.end()) q.roots.push_back(b);
  }
  q.bundles.resize(q.terms.size());
  for (BlockId b = 0; b < p.blocks.size(); ++b) {
    StateId representative = p.blocks[b].front();
    std::vector<Bundle> redirected;
    for (const auto& bundle : space.bundles[representative]) {
      Bundle nb;
      nb.kind = bundle.kind;
      nb.action = bundle.action;
      if (bundle.kind == BundleKind::Random) {
        for (const auto& br : bundle.branches)
          nb.branches.push_back({br.probability, p.block_of[br.target]});
      } else {
        nb.target = p.block_of[bundle.target];
      }
      bool duplicate = false;
      for (const auto& existing : redirected) {
        if (existing.kind != nb.kind || existing.action != nb.action ||
            existing.target != nb.target)
          continue;
        if (existing.branches.size() != nb.branches.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < nb.branches.size(); ++i)
          same = same && existing.branches[i].probability == nb.branches[i].probability &&
                 existing.branches[i].target == nb.branches[i].target;
        if (same) { duplicate = true; break; }
      }
      if (!duplicate) redirected.push_back(std::move(nb));
    }
    q.bundles[b] = std::move(redirected);
  }
  return q;
}

/// Disjoint union of two state-space graphs (used to compare a quotient with
/// its original behaviorally; the result is graph data, not a step closure).
inline StateSpace disjoint_union(const StateSpace& a, const StateSpace& b) {
  StateSpace u = a;
  std::size_t offset = a.size();
  for (StateId s = 0; s < b.size(); ++s) {
    u.terms.push_back(b.terms[s]);
    u.texts.push_back(b.texts[s] + "#2");  // keep keys distinct; graph identity only
    std::vector<Bundle> shifted;
    for (const auto& bundle : b.bundles[s]) {
      Bundle nb = bundle;
      if (nb.kind == BundleKind::Random)
        for (auto& br : nb.branches) br.target += offset;
      else
        nb.target += offset;
      shifted.push_back(std::move(nb));
    }
    u.bundles.push_back(std::move(shifted));
  }
  for (StateId r : b.roots) u.roots.push_back(r + offset);
  return u;
}

}  // namespace rccs
