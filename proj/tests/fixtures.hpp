#pragma once

// Named processes from the motivating examples plus the fixture corpus the
// oracle sweeps run over.

#include <string>
#include <vector>

#include "rccs/equivalence.hpp"
#include "rccs/generator.hpp"
#include "rccs/oracle.hpp"

namespace fixtures {

using namespace rccs;

inline TermPtr omega_a() { return parse("mu X. (tau.a + tau.X)"); }
inline TermPtr omega_half() { return parse("mu X. ((1/2)tau.X (+) (1/2)tau.X)"); }
inline TermPtr omega_half_a() { return parse("mu X. ((1/2)tau.a (+) (1/2)tau.X)"); }
inline TermPtr g_proc() { return parse("mu X. ((1/3)tau.(a + tau.X) (+) (2/3)tau.X)"); }
inline TermPtr g_a() { return parse("a + tau.(mu X. ((1/3)tau.(a + tau.X) (+) (2/3)tau.X))"); }
inline TermPtr h_proc() { return parse("mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X))"); }
inline TermPtr h_a() { return parse("a + tau.(mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X)))"); }
inline TermPtr h_b() { return parse("b + tau.(mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X)))"); }
inline TermPtr e_proc() { return parse("mu X. (a + b + tau.X)"); }

/// Probabilistic ring of size 3 starting at the given rotation: each node
/// flips a fair coin between emitting its own label and moving on.
inline TermPtr prob_ring(int rotation) {
  const char* names[3] = {"a1", "a2", "a3"};
  auto lbl = [&](int i) { return std::string(names[(i + rotation) % 3]); };
  return parse("mu X. ((1/2)tau." + lbl(0) + " (+) (1/2)tau.((1/2)tau." + lbl(1) +
               " (+) (1/2)tau.((1/2)tau." + lbl(2) + " (+) (1/2)tau.X)))");
}

/// Nondeterministic ring of size 3; all of its nodes are equal.
inline TermPtr nondet_ring(int rotation) {
  const char* names[3] = {"a1", "a2", "a3"};
  auto lbl = [&](int i) { return std::string(names[(i + rotation) % 3]); };
  return parse("mu X. (" + lbl(0) + " + tau.(" + lbl(1) + " + tau.(" + lbl(2) + " + tau.X)))");
}

/// The node reached from prob_ring(0) after `index` firings (0 is the root
/// itself; 1 and 2 are the unfolded inner nodes as they appear as states).
inline TermPtr prob_ring_node(int index) {
  TermPtr node3 = random_choice({{make_rational(1, 2), parse("a3.0")},
                                 {make_rational(1, 2), prob_ring(0)}});
  if (index == 2) return node3;
  TermPtr node2 = random_choice({{make_rational(1, 2), parse("a2.0")},
                                 {make_rational(1, 2), node3}});
  return index == 1 ? node2 : prob_ring(0);
}

inline TermPtr nondet_ring_node(int index) {
  TermPtr node3 = choice({{act_in("a3"), nil()}, {act_tau(), nondet_ring(0)}});
  if (index == 2) return node3;
  TermPtr node2 = choice({{act_in("a2"), nil()}, {act_tau(), node3}});
  return index == 1 ? node2 : nondet_ring(0);
}

inline StateId state_of(const StateSpace& space, const std::string& term_text) {
  std::string key = print(alpha_normalize(parse(term_text)));
  for (StateId s = 0; s < space.size(); ++s)
    if (space.texts[s] == key) return s;
  throw Error("fixture: no state for " + term_text);
}

/// Partition built from groups of member terms; states not mentioned become
/// singleton blocks.
inline Partition partition_of(const StateSpace& space,
                              const std::vector<std::vector<std::string>>& groups) {
  std::vector<BlockId> raw(space.size());
  for (StateId s = 0; s < space.size(); ++s) raw[s] = 1000 + s;  // singletons
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (const auto& text : groups[g]) raw[state_of(space, text)] = g;
  return Partition::from_block_of(raw);
}

struct Fixture {
  std::string name;
  std::vector<TermPtr> roots;
};

/// The corpus the oracle comparisons sweep: the worked examples, both rings,
/// assorted CCS classics and a seeded batch of generated processes. Spaces
/// used by the enumeration oracle are the ones with at most 8 states.
inline std::vector<Fixture> corpus() {
  std::vector<Fixture> out;
  auto add = [&](std::string name, std::vector<std::string> texts) {
    Fixture f{std::move(name), {}};
    for (const auto& t : texts) f.roots.push_back(parse(t));
    out.push_back(std::move(f));
  };

  add("zero", {"0"});
  add("single-action", {"a.0"});
  add("initial-tau", {"tau.a.0", "a.0"});
  out.push_back({"omega-a", {omega_a()}});
  out.push_back({"omega-half", {omega_half()}});
  out.push_back({"omega-half-a", {omega_half_a()}});
  out.push_back({"omega-half-a-vs-a", {omega_half_a(), parse("a.0")}});
  out.push_back({"omega-a-vs-omega-half-a", {omega_a(), omega_half_a()}});
  out.push_back({"g-vs-ga", {g_proc(), g_a()}});
  out.push_back({"h-family", {h_proc(), h_a(), h_b(), e_proc()}});
  out.push_back({"prob-ring-3", {prob_ring(0)}});
  out.push_back({"nondet-ring-3", {nondet_ring(0)}});
  add("restricted-communication", {"(new b)('b.0 | (a.0 + b.0))"});
  add("random-beside-output", {"((1/2)tau.a.0 (+) (1/2)tau.b.0) | 'a.0"});
  add("handshake", {"a.0 | 'a.0"});
  add("duplicate-branch", {"a.0 + a.0", "a.0"});
  add("distributed-choice", {"a.(b.0 + c.0)", "a.b.0 + a.c.0"});
  add("collective-vs-tau", {"(1/2)tau.a.0 (+) (1/2)tau.a.0", "tau.a.0"});
  add("restricted-dead", {"(new a)a.0", "0"});
  add("encoded-tau", {"(new c)('c.0 | c.b.0)", "tau.b.0"});
  add("swapped-weights", {"(1/3)tau.a.0 (+) (2/3)tau.b.0", "(2/3)tau.a.0 (+) (1/3)tau.b.0"});
  add("split-weight", {"(1/2)tau.a.0 (+) (1/2)tau.b.0",
                       "(1/4)tau.a.0 (+) (1/4)tau.a.0 (+) (1/2)tau.b.0"});
  add("observer-beside-coin", {"a.0 | mu X. ((1/2)tau.X (+) (1/2)tau.X)"});
  out.push_back({"g-vs-h", {g_proc(), h_proc()}});
  add("action-loop", {"mu X. (a.X)"});
  add("tau-or-b", {"tau.a.0 + b.0"});
  add("coin-then-action", {"mu X. ((1/2)tau.a.X (+) (1/2)tau.X)"});

  // Seeded extras, kept only when the joint space stays oracle-sized.
  int added = 0;
  for (std::uint64_t seed = 1000; added < 8 && seed < 1100; ++seed) {
    TermGenerator gen(seed);
    TermPtr t = gen.process();
    TermPtr u = gen.next(2) ? gen.equal_variant(t) : gen.process();
    try {
      StateSpace sp = build_state_space(std::vector<TermPtr>{t, u}, 8);
      if (sp.size() < 2) continue;
      out.push_back({"generated-" + std::to_string(seed), {t, u}});
      ++added;
    } catch (const BoundExceededError&) {
      continue;
    }
  }
  return out;
}

}  // namespace fixtures
