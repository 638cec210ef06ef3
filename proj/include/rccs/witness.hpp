#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rccs/partition.hpp"
#include "rccs/semantics.hpp"

namespace rccs {

// ---------------------------------------------------------------------------
// Positional policies: finite descriptions of epsilon-trees
// ---------------------------------------------------------------------------

enum class Decision : std::uint8_t { Stop, TakeTau, TakeRandom };

struct PolicyDecision {
  Decision kind = Decision::Stop;
  std::size_t bundle = 0;  // index into bundles(state) for TakeTau/TakeRandom
};

struct PolicyPurpose {
  enum class Kind { Ell, Q, Divergence };
  Kind kind = Kind::Divergence;
  Prefix action;              // Ell
  Rational q;                 // Q
  BlockId target_block = 0;   // Ell / Q
};

/// One decision per state: stop, follow a tau bundle, or fire a random bundle
/// (all of whose branches then enter the tree). Positional policies suffice —
/// the qualitative fixpoints always produce them.
struct WitnessPolicy {
  StateId root = 0;
  std::map<StateId, PolicyDecision> decide;
  PolicyPurpose purpose;
};

// ---------------------------------------------------------------------------
// Truncations
// ---------------------------------------------------------------------------

struct TreeNode {
  StateId state = 0;
  Rational edge_probability = 1;  // label of the incoming edge; 1 at the root
  bool stop_leaf = false;
  std::vector<TreeNode> children;
};

struct TreeTruncation {
  TreeNode root;
  int depth = 0;
};

namespace detail {

inline const PolicyDecision& decision_of(const WitnessPolicy& policy, StateId s) {
  auto it = policy.decide.find(s);
  if (it == policy.decide.end())
    throw Error("policy has no decision for a reachable state");
  return it->second;
}

inline TreeNode unroll_node(const WitnessPolicy& policy, const StateSpace& space,
                            StateId s, const Rational& in_prob, int remaining) {
  TreeNode node;
  node.state = s;
  node.edge_probability = in_prob;
  const PolicyDecision& d = decision_of(policy, s);
  if (d.kind == Decision::Stop) {
    node.stop_leaf = true;
    return node;
  }
  if (remaining == 0) return node;  // frontier cut
  const Bundle& bundle = space.bundles[s].at(d.bundle);
  if (d.kind == Decision::TakeTau) {
    if (bundle.kind != BundleKind::Tau) throw Error("policy decision does not match bundle kind");
    node.children.push_back(unroll_node(policy, space, bundle.target, 1, remaining - 1));
  } else {
    if (bundle.kind != BundleKind::Random) throw Error("policy decision does not match bundle kind");
    for (const auto& br : bundle.branches)
      node.children.push_back(
          unroll_node(policy, space, br.target, br.probability, remaining - 1));
  }
  return node;
}

}  // namespace detail

/// The subtree of the policy's epsilon-tree induced by nodes of height at
/// most k. Stop states are leaves at any depth.
inline TreeTruncation unroll(const WitnessPolicy& policy, int k, const StateSpace& space) {
  if (k < 0) throw PreconditionError("truncation depth must be nonnegative");
  return {detail::unroll_node(policy, space, policy.root, 1, k), k};
}

/// Sum over maximal paths of the product of edge probabilities. Equals 1 at
/// every depth for the tree of a valid policy.
inline Rational tree_prob(const TreeTruncation& t) {
  struct Rec {
    static Rational value(const TreeNode& n) {
      if (n.children.empty()) return 1;
      Rational sum = 0;
      for (const auto& c : n.children) sum += c.edge_probability * value(c);
      return sum;
    }
  };
  return Rec::value(t.root);
}

/// Total probability of the branches that reach a Stop leaf within k steps:
/// the finite-branch mass of the truncated tree. Nondecreasing in k.
inline Rational finite_mass(const WitnessPolicy& policy, int k, const StateSpace& space) {
  if (k < 0) throw PreconditionError("depth must be nonnegative");
  std::map<std::pair<StateId, int>, Rational> memo;
  struct Rec {
    const WitnessPolicy& policy;
    const StateSpace& space;
    std::map<std::pair<StateId, int>, Rational>& memo;
    Rational run(StateId s, int budget) {
      const PolicyDecision& d = detail::decision_of(policy, s);
      if (d.kind == Decision::Stop) return 1;
      if (budget == 0) return 0;
      auto key = std::make_pair(s, budget);
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
      const Bundle& bundle = space.bundles[s].at(d.bundle);
      Rational mass = 0;
      if (d.kind == Decision::TakeTau) {
        mass = run(bundle.target, budget - 1);
      } else {
        for (const auto& br : bundle.branches)
          mass += br.probability * run(br.target, budget - 1);
      }
      memo.emplace(key, mass);
      return mass;
    }
  };
  return Rec{policy, space, memo}.run(policy.root, k);
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

enum class TreeClass { Regular, Divergent, Indeterminate };

struct Classification {
  TreeClass cls = TreeClass::Indeterminate;
  int depth = 0;              // probe depth of the reported mass
  Rational mass_at_depth = 0; // finite_mass at that depth
};

inline const char* to_string(TreeClass c) {
  switch (c) {
    case TreeClass::Regular: return "Regular";
    case TreeClass::Divergent: return "Divergent";
    case TreeClass::Indeterminate: return "Indeterminate";
  }
  return "?";
}

/// Exact classification from the policy graph: Regular iff every reachable
/// non-Stop state can still reach a Stop state, Divergent iff no Stop state is
/// reachable at all. For regular trees the reported depth is the first k with
/// 1 - finite_mass(k) < 2^-m; otherwise the mass is probed at depth m.
inline Classification classify(const WitnessPolicy& policy, const StateSpace& space,
                               int tolerance_exponent) {
  if (tolerance_exponent < 1) throw PreconditionError("tolerance exponent must be >= 1");

  // Forward reachability in the policy graph.
  std::vector<StateId> reachable{policy.root};
  std::map<StateId, bool> seen{{policy.root, true}};
  std::vector<StateId> stops;
  for (std::size_t i = 0; i < reachable.size(); ++i) {
    StateId s = reachable[i];
    const PolicyDecision& d = detail::decision_of(policy, s);
    if (d.kind == Decision::Stop) {
      stops.push_back(s);
      continue;
    }
    const Bundle& bundle = space.bundles[s].at(d.bundle);
    auto visit = [&](StateId t) {
      if (!seen[t]) {
        seen[t] = true;
        reachable.push_back(t);
      }
    };
    if (d.kind == Decision::TakeTau) visit(bundle.target);
    else for (const auto& br : bundle.branches) visit(br.target);
  }

  // Backward closure from the Stop states along policy edges.
  std::map<StateId, bool> reaches_stop;
  for (StateId s : stops) reaches_stop[s] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateId s : reachable) {
      if (reaches_stop[s]) continue;
      const PolicyDecision& d = detail::decision_of(policy, s);
      if (d.kind == Decision::Stop) continue;
      const Bundle& bundle = space.bundles[s].at(d.bundle);
      bool hit = false;
      if (d.kind == Decision::TakeTau) hit = reaches_stop[bundle.target];
      else for (const auto& br : bundle.branches) hit = hit || reaches_stop[br.target];
      if (hit) {
        reaches_stop[s] = true;
        changed = true;
      }
    }
  }

  Classification result;
  if (stops.empty()) {
    result.cls = TreeClass::Divergent;
    result.depth = tolerance_exponent;
    result.mass_at_depth = finite_mass(policy, tolerance_exponent, space);
    return result;
  }
  bool all_reach = true;
  for (StateId s : reachable) all_reach = all_reach && reaches_stop[s];
  if (!all_reach) {
    result.cls = TreeClass::Indeterminate;
    result.depth = tolerance_exponent;
    result.mass_at_depth = finite_mass(policy, tolerance_exponent, space);
    return result;
  }
  result.cls = TreeClass::Regular;
  Rational threshold = make_rational(1, Integer(1) << tolerance_exponent);
  for (int k = 0;; ++k) {
    Rational mass = finite_mass(policy, k, space);
    if (1 - mass < threshold) {
      result.depth = k;
      result.mass_at_depth = mass;
      return result;
    }
  }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<Rational> bundle_weighted_prob(const Bundle& bundle, BlockId target,
                                                    BlockId own, const Partition& p) {
  Rational num = 0, stay = 0;
  for (const auto& br : bundle.branches) {
    if (p.block_of[br.target] == target) num += br.probability;
    if (p.block_of[br.target] == own) stay += br.probability;
  }
  if (stay == 1) return std::nullopt;
  return num / (1 - stay);
}

}  // namespace detail

/// Checks the policy against its purpose: everything reachable stays in the
/// root's block, decisions reference bundles of the right kind whose targets
/// stay in the block, and Stop leaves carry the purposed move. Throws Error.
inline void validate_policy(const WitnessPolicy& policy, const Partition& partition,
                            const StateSpace& space) {
  BlockId home = partition.block_of[policy.root];
  std::vector<StateId> queue{policy.root};
  std::map<StateId, bool> seen{{policy.root, true}};
  while (!queue.empty()) {
    StateId s = queue.back();
    queue.pop_back();
    if (partition.block_of[s] != home)
      throw Error("policy leaves the root's block");
    const PolicyDecision& d = detail::decision_of(policy, s);
    if (d.kind == Decision::Stop) {
      switch (policy.purpose.kind) {
        case PolicyPurpose::Kind::Divergence:
          throw Error("divergence policy must never stop");
        case PolicyPurpose::Kind::Ell: {
          bool ok = false;
          for (const auto& b : space.bundles[s]) {
            if (policy.purpose.action.polarity == Polarity::Tau) {
              ok = ok || (b.kind == BundleKind::Tau &&
                          partition.block_of[b.target] == policy.purpose.target_block);
            } else {
              ok = ok || (b.kind == BundleKind::Visible && b.action == policy.purpose.action &&
                          partition.block_of[b.target] == policy.purpose.target_block);
            }
          }
          if (!ok) throw Error("stop leaf lacks the required labeled move");
          break;
        }
        case PolicyPurpose::Kind::Q: {
          bool ok = false;
          for (const auto& b : space.bundles[s]) {
            if (b.kind != BundleKind::Random) continue;
            auto wp = detail::bundle_weighted_prob(b, policy.purpose.target_block, home, partition);
            ok = ok || (wp.has_value() && *wp == policy.purpose.q);
          }
          if (!ok) throw Error("stop leaf lacks a bundle with the required weighted probability");
          break;
        }
      }
      continue;
    }
    if (d.bundle >= space.bundles[s].size()) throw Error("policy bundle index out of range");
    const Bundle& bundle = space.bundles[s][d.bundle];
    if (d.kind == Decision::TakeTau) {
      if (bundle.kind != BundleKind::Tau) throw Error("TakeTau on a non-tau bundle");
      if (!seen[bundle.target]) { seen[bundle.target] = true; queue.push_back(bundle.target); }
    } else {
      if (bundle.kind != BundleKind::Random) throw Error("TakeRandom on a non-random bundle");
      for (const auto& br : bundle.branches) {
        if (partition.block_of[br.target] != home)
          throw Error("random firing leaves the root's block");
        if (!seen[br.target]) { seen[br.target] = true; queue.push_back(br.target); }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

inline Json policy_to_json(const WitnessPolicy& policy) {
  Json j;
  j["format"] = "rccs-lab/1";
  j["root"] = policy.root;
  Json decisions = Json::array();
  for (const auto& [state, d] : policy.decide) {
    Json e;
    e["state"] = state;
    switch (d.kind) {
      case Decision::Stop: e["action"] = "stop"; break;
      case Decision::TakeTau: e["action"] = "tau"; e["bundle"] = d.bundle; break;
      case Decision::TakeRandom: e["action"] = "random"; e["bundle"] = d.bundle; break;
    }
    decisions.push_back(std::move(e));
  }
  j["decisions"] = std::move(decisions);
  switch (policy.purpose.kind) {
    case PolicyPurpose::Kind::Ell:
      j["purpose"] = {{"kind", "ell"},
                      {"action", detail::print_action(policy.purpose.action)},
                      {"block", policy.purpose.target_block}};
      break;
    case PolicyPurpose::Kind::Q:
      j["purpose"] = {{"kind", "q"},
                      {"q", rational_string(policy.purpose.q)},
                      {"block", policy.purpose.target_block}};
      break;
    case PolicyPurpose::Kind::Divergence:
      j["purpose"] = {{"kind", "divergence"}};
      break;
  }
  return j;
}

/// Paper-style tree diagram: edge labels are probabilities, Stop leaves are
/// double-circled, frontier cuts of still-running states are dashed and
/// ellipsized.
inline std::string truncation_to_dot(const TreeTruncation& t, const StateSpace& space) {
  std::string out = "digraph epsilon_tree {\n  node [shape=circle];\n";
  std::size_t counter = 0;
  struct Walk {
    const StateSpace& space;
    std::string& out;
    std::size_t& counter;
    std::size_t run(const TreeNode& n) {
      std::size_t id = counter++;
      std::string name = "n" + std::to_string(id);
      std::string label = detail::dot_escape(space.texts[n.state]);
      if (n.stop_leaf) {
        out += "  " + name + " [label=\"" + label + "\", shape=doublecircle];\n";
      } else if (n.children.empty()) {
        out += "  " + name + " [label=\"" + label + " ...\", style=dashed];\n";
      } else {
        out += "  " + name + " [label=\"" + label + "\"];\n";
      }
      for (const auto& c : n.children) {
        std::size_t child = run(c);
        out += "  " + name + " -> n" + std::to_string(child) + " [label=\"" +
               rational_string(c.edge_probability) + "\"];\n";
      }
      return id;
    }
  };
  Walk{space, out, counter}.run(t.root);
  out += "}\n";
  return out;
}

}  // namespace rccs
