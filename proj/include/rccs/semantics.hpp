#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rccs/syntax.hpp"

namespace rccs {

constexpr std::size_t kDefaultStateBound = 10000;

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Transition label: a visible action, tau, or a random silent step p·tau with
/// p in (0,1). A weight of exactly 1 collapses to tau by construction.
struct Label {
  enum class Kind { Input, Output, Tau, PTau };
  Kind kind = Kind::Tau;
  std::string channel;  // Input/Output only
  Rational p;           // PTau only

  static Label input(std::string ch) { return {Kind::Input, std::move(ch), {}}; }
  static Label output(std::string ch) { return {Kind::Output, std::move(ch), {}}; }
  static Label tau() { return {Kind::Tau, {}, {}}; }
  static Label ptau(const Rational& p) {
    if (p == 1) return tau();
    if (!is_branch_probability(p))
      throw PreconditionError("ptau weight must lie in (0,1]");
    return {Kind::PTau, {}, p};
  }
};

/// Product of the weights of a silent transition sequence; tau counts as 1.
inline Rational seq_probability(const std::vector<Label>& path) {
  Rational product = 1;
  for (const auto& l : path) {
    switch (l.kind) {
      case Label::Kind::Tau: break;
      case Label::Kind::PTau: product *= l.p; break;
      default: throw VisibleInPathError();
    }
  }
  return product;
}

// ---------------------------------------------------------------------------
// Bundles: one firing of a transition rule
// ---------------------------------------------------------------------------

enum class BundleKind { Visible, Tau, Random };

/// Bundle produced by step(), with raw terms as targets. A Random bundle is a
/// single firing event: all branches of one random choice, propagated intact
/// through contexts — the collective silent transition.
struct RawBranch {
  Rational probability;
  TermPtr target;
};

struct RawBundle {
  BundleKind kind = BundleKind::Tau;
  Prefix action;                   // Visible only (polarity != Tau)
  TermPtr target;                  // Visible / Tau
  std::vector<RawBranch> branches; // Random; weights sum to 1, never merged
};

namespace detail {

inline bool complementary(const Prefix& a, const Prefix& b) {
  if (a.polarity == Polarity::Tau || b.polarity == Polarity::Tau) return false;
  return a.channel == b.channel && a.polarity != b.polarity;
}

inline RawBundle map_targets(const RawBundle& b, const auto& wrap) {
  RawBundle out;
  out.kind = b.kind;
  out.action = b.action;
  if (b.kind == BundleKind::Random) {
    out.branches.reserve(b.branches.size());
    for (const auto& br : b.branches) out.branches.push_back({br.probability, wrap(br.target)});
  } else {
    out.target = wrap(b.target);
  }
  return out;
}

inline std::vector<RawBundle> step_rec(const TermPtr& t) {
  std::vector<RawBundle> out;
  switch (t->kind) {
    case Term::Kind::Var:
      throw OpenTermError(t->name);
    case Term::Kind::Choice:
      for (const auto& b : t->branches) {
        if (b.action.polarity == Polarity::Tau)
          out.push_back({BundleKind::Tau, {}, b.continuation, {}});
        else
          out.push_back({BundleKind::Visible, b.action, b.continuation, {}});
      }
      return out;
    case Term::Kind::Random: {
      RawBundle bundle;
      bundle.kind = BundleKind::Random;
      bundle.branches.reserve(t->randoms.size());
      for (const auto& b : t->randoms) bundle.branches.push_back({b.probability, b.continuation});
      out.push_back(std::move(bundle));
      return out;
    }
    case Term::Kind::Par: {
      auto ls = step_rec(t->left);
      auto rs = step_rec(t->right);
      for (const auto& b : ls)
        out.push_back(map_targets(b, [&](const TermPtr& s) { return par(s, t->right); }));
      for (const auto& b : rs)
        out.push_back(map_targets(b, [&](const TermPtr& s) { return par(t->left, s); }));
      // Communication pairs complementary visible actions; random branches
      // carry tau and never synchronize.
      for (const auto& lb : ls) {
        if (lb.kind != BundleKind::Visible) continue;
        for (const auto& rb : rs) {
          if (rb.kind != BundleKind::Visible) continue;
          if (complementary(lb.action, rb.action))
            out.push_back({BundleKind::Tau, {}, par(lb.target, rb.target), {}});
        }
      }
      return out;
    }
    case Term::Kind::Restrict: {
      for (const auto& b : step_rec(t->left)) {
        if (b.kind == BundleKind::Visible && b.action.channel == t->name)
          continue;  // both polarities blocked; tau and p-tau always pass
        out.push_back(map_targets(b, [&](const TermPtr& s) { return restriction(t->name, s); }));
      }
      return out;
    }
    case Term::Kind::Fix:
      return step_rec(unfold(t));
  }
  return out;
}

}  // namespace detail

/// All bundles derivable from a closed term by one application of the
/// transition rules, in derivation order (left operand first, then right,
/// then communications).
inline std::vector<RawBundle> step(const TermPtr& t) {
  auto fv = free_vars(t);
  if (!fv.empty()) throw OpenTermError(*fv.begin());
  return detail::step_rec(t);
}

// ---------------------------------------------------------------------------
// State spaces
// ---------------------------------------------------------------------------

using StateId = std::size_t;

struct Branch {
  Rational probability;
  StateId target;
};

struct Bundle {
  BundleKind kind = BundleKind::Tau;
  Prefix action;
  StateId target = 0;
  std::vector<Branch> branches;
};

/// Finite probabilistic LTS. States are alpha-normalized closed terms,
/// identified by their canonical text; bundles(s) lists exactly step(term(s)).
struct StateSpace {
  std::vector<TermPtr> terms;
  std::vector<std::string> texts;
  std::vector<std::vector<Bundle>> bundles;
  std::vector<StateId> roots;
  std::size_t bound = kDefaultStateBound;

  std::size_t size() const { return terms.size(); }
  StateId root() const { return roots.front(); }
};

/// Breadth-first closure of step under alpha_normalize, shared across all
/// roots. Throws BoundExceededError when the closure would pass `bound`
/// states and OpenTermError on open roots.
inline StateSpace build_state_space(const std::vector<TermPtr>& roots,
                                    std::size_t bound = kDefaultStateBound) {
  StateSpace space;
  space.bound = bound;
  std::unordered_map<std::string, StateId> index;
  std::deque<StateId> frontier;

  auto intern = [&](const TermPtr& t) -> StateId {
    TermPtr normal = alpha_normalize(t);
    std::string key = print(normal);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (space.terms.size() >= bound) throw BoundExceededError(bound);
    StateId id = space.terms.size();
    space.terms.push_back(std::move(normal));
    space.texts.push_back(key);
    index.emplace(space.texts.back(), id);
    frontier.push_back(id);
    return id;
  };

  for (const auto& root : roots) {
    auto fv = free_vars(root);
    if (!fv.empty()) throw OpenTermError(*fv.begin());
    space.roots.push_back(intern(root));
  }

  while (!frontier.empty()) {
    StateId s = frontier.front();
    frontier.pop_front();
    auto raw = detail::step_rec(space.terms[s]);
    std::vector<Bundle> converted;
    converted.reserve(raw.size());
    for (const auto& rb : raw) {
      Bundle b;
      b.kind = rb.kind;
      b.action = rb.action;
      if (rb.kind == BundleKind::Random) {
        b.branches.reserve(rb.branches.size());
        for (const auto& br : rb.branches)
          b.branches.push_back({br.probability, intern(br.target)});
      } else {
        b.target = intern(rb.target);
      }
      converted.push_back(std::move(b));
    }
    if (space.bundles.size() <= s) space.bundles.resize(space.terms.size());
    space.bundles[s] = std::move(converted);
  }
  space.bundles.resize(space.terms.size());
  return space;
}

inline StateSpace build_state_space(const TermPtr& root,
                                    std::size_t bound = kDefaultStateBound) {
  return build_state_space(std::vector<TermPtr>{root}, bound);
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

using Json = nlohmann::ordered_json;

inline Json space_to_json(const StateSpace& space) {
  Json j;
  j["format"] = "rccs-lab/1";
  j["states"] = Json::array();
  for (StateId s = 0; s < space.size(); ++s)
    j["states"].push_back({{"id", s}, {"term", space.texts[s]}});
  j["root"] = space.root();
  if (space.roots.size() > 1) j["roots"] = space.roots;
  j["bundles"] = Json::array();
  for (StateId s = 0; s < space.size(); ++s) {
    for (const auto& b : space.bundles[s]) {
      Json e;
      e["source"] = s;
      switch (b.kind) {
        case BundleKind::Visible:
          e["kind"] = "visible";
          e["action"] = detail::print_action(b.action);
          e["target"] = b.target;
          break;
        case BundleKind::Tau:
          e["kind"] = "tau";
          e["target"] = b.target;
          break;
        case BundleKind::Random: {
          e["kind"] = "random";
          Json branches = Json::array();
          for (const auto& br : b.branches)
            branches.push_back({{"p", rational_string(br.probability)}, {"target", br.target}});
          e["branches"] = std::move(branches);
          break;
        }
      }
      j["bundles"].push_back(std::move(e));
    }
  }
  return j;
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Graphviz rendering. Each random bundle hangs off one dashed grouping arc
/// into a point node, from which the p-tau branches fan out labeled p=num/den.
inline std::string space_to_dot(const StateSpace& space) {
  std::string out = "digraph lts {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (StateId s = 0; s < space.size(); ++s) {
    out += "  s" + std::to_string(s) + " [label=\"" + detail::dot_escape(space.texts[s]) + "\"";
    for (StateId r : space.roots)
      if (r == s) { out += ", penwidth=2"; break; }
    out += "];\n";
  }
  for (StateId s = 0; s < space.size(); ++s) {
    std::size_t random_index = 0;
    for (const auto& b : space.bundles[s]) {
      switch (b.kind) {
        case BundleKind::Visible:
          out += "  s" + std::to_string(s) + " -> s" + std::to_string(b.target) +
                 " [label=\"" + detail::dot_escape(detail::print_action(b.action)) + "\"];\n";
          break;
        case BundleKind::Tau:
          out += "  s" + std::to_string(s) + " -> s" + std::to_string(b.target) +
                 " [label=\"tau\"];\n";
          break;
        case BundleKind::Random: {
          std::string group = "s" + std::to_string(s) + "_r" + std::to_string(random_index++);
          out += "  " + group + " [shape=point, width=0.08];\n";
          out += "  s" + std::to_string(s) + " -> " + group +
                 " [style=dashed, arrowhead=none];\n";
          for (const auto& br : b.branches)
            out += "  " + group + " -> s" + std::to_string(br.target) +
                   " [label=\"p=" + rational_string(br.probability) + "\"];\n";
          break;
        }
      }
    }
  }
  out += "}\n";
  return out;
}

}  // namespace rccs
