#pragma once

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rccs/equivalence.hpp"
#include "rccs/oracle.hpp"
#include "rccs/proptest.hpp"
#include "rccs/witness.hpp"

namespace rccs {

// Exit codes are stable contracts:
//   0 success / EQUAL        1 NOT EQUAL or failing properties
//   2 state bound exceeded   3 parse or validation error
//   4 unknown class, label or query
namespace exit_code {
constexpr int kEqual = 0;
constexpr int kNotEqual = 1;
constexpr int kBoundExceeded = 2;
constexpr int kBadInput = 3;
constexpr int kUnknownQuery = 4;
}  // namespace exit_code

namespace detail {

inline TermPtr load_term(const std::string& input, bool inline_terms) {
  if (inline_terms) return parse(input);
  std::ifstream in(input);
  if (!in) throw Error("cannot open input file: " + input);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

inline void emit(const std::string& payload, const std::string& output_path, std::ostream& out) {
  if (output_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(output_path, std::ios::binary);
  if (!f) throw Error("cannot open output file: " + output_path);
  f << payload;
}

inline std::string space_to_text(const StateSpace& space) {
  std::string out;
  out += "states: " + std::to_string(space.size()) + "\n";
  out += "root: " + std::to_string(space.root()) + "\n";
  for (StateId s = 0; s < space.size(); ++s) {
    out += std::to_string(s) + ": " + space.texts[s] + "\n";
    for (const auto& b : space.bundles[s]) {
      switch (b.kind) {
        case BundleKind::Visible:
          out += "  " + print_action(b.action) + " -> " + std::to_string(b.target) + "\n";
          break;
        case BundleKind::Tau:
          out += "  tau -> " + std::to_string(b.target) + "\n";
          break;
        case BundleKind::Random: {
          out += "  random ->";
          for (const auto& br : b.branches)
            out += " " + rational_string(br.probability) + ":" + std::to_string(br.target);
          out += "\n";
          break;
        }
      }
    }
  }
  return out;
}

inline Prefix parse_action_text(const std::string& text) {
  if (text == "tau") return act_tau();
  if (!text.empty() && text.front() == '\'') {
    std::string chan = text.substr(1);
    if (chan.empty() || !std::islower(static_cast<unsigned char>(chan.front())))
      throw PreconditionError("bad action: " + text);
    return act_out(chan);
  }
  if (text.empty() || !std::islower(static_cast<unsigned char>(text.front())))
    throw PreconditionError("bad action: " + text);
  return act_in(text);
}

}  // namespace detail

/// Entry point shared by the rccs binary and the test suites; identical
/// inputs produce byte-identical output on the given streams.
inline int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"workbench for randomized CCS: semantics, equivalence, witnesses"};
  app.require_subcommand(1);

  // Shared settings
  bool inline_terms = false;
  std::size_t state_bound = kDefaultStateBound;
  std::size_t oracle_bound = kDefaultOracleBound;
  std::string format;
  std::string output_path;
  std::uint64_t seed = 42;
  int cases = 200;
  int depth = 12;

  std::vector<std::string> inputs;

  auto add_common = [&](CLI::App* cmd, int n_inputs, const char* default_format) {
    cmd->add_flag("-e,--inline", inline_terms, "treat inputs as inline terms, not file paths");
    cmd->add_option("--bound", state_bound, "state-space bound")->capture_default_str();
    cmd->add_option("-f,--format", format, "output format: text, json or dot");
    cmd->add_option("-o,--output", output_path, "write the result to a file instead of stdout");
    cmd->add_option("input", inputs, "term file(s), or inline terms with -e")
        ->expected(n_inputs);
    cmd->parse_complete_callback([&format, default_format] {
      if (format.empty()) format = default_format;
    });
  };

  CLI::App* check = app.add_subcommand("check", "decide =_RCCS on two terms");
  add_common(check, 2, "text");

  // lts and minimize accept several roots and build one joint space.
  CLI::App* lts = app.add_subcommand("lts", "export the state space of one or more terms");
  add_common(lts, -1, "json");

  CLI::App* minimize = app.add_subcommand("minimize", "export the quotient under =_RCCS");
  add_common(minimize, -1, "json");

  CLI::App* witness = app.add_subcommand("witness", "render an epsilon-tree witness");
  add_common(witness, 1, "dot");
  std::string witness_ell, witness_q, witness_to;
  long long witness_class = -1;
  bool witness_diverge = false;
  witness->add_option("--ell", witness_ell, "action of an ell-transition query (a, 'a or tau)");
  witness->add_option("--q", witness_q, "weighted probability of a q-transition query (num/den)");
  witness->add_flag("--diverge", witness_diverge, "render a divergent epsilon-tree");
  witness->add_option("--to", witness_to, "target class, named by a member term");
  witness->add_option("--class", witness_class, "target class, named by block id");
  witness->add_option("--depth", depth, "truncation depth")->capture_default_str();

  CLI::App* diverge = app.add_subcommand("diverge", "does the term have a divergent epsilon-tree under =_RCCS?");
  add_common(diverge, 1, "text");

  CLI::App* proptest = app.add_subcommand("proptest", "run the seeded property-test corpus");
  proptest->add_option("--seed", seed, "generator seed")->capture_default_str();
  proptest->add_option("-n,--cases", cases, "number of generated cases")->capture_default_str();
  proptest->add_option("--bound", state_bound, "state-space bound")->capture_default_str();
  proptest->add_option("--oracle-bound", oracle_bound, "max states for the enumeration oracle")
      ->capture_default_str();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (check->parsed()) {
      TermPtr t1 = detail::load_term(inputs.at(0), inline_terms);
      TermPtr t2 = detail::load_term(inputs.at(1), inline_terms);
      CheckResult r = check_equal(t1, t2, state_bound);
      std::string payload;
      if (format == "json") {
        Json j;
        j["format"] = "rccs-lab/1";
        j["verdict"] = r.equal ? "equal" : "not-equal";
        j["states"] = r.space.size();
        j["blocks"] = r.partition.num_blocks();
        j["iterations"] = r.iterations;
        j["partition"] = partition_to_json(r.partition)["blocks"];
        if (r.evidence) j["evidence"] = evidence_to_json(*r.evidence);
        payload = j.dump(2) + "\n";
      } else {
        payload = r.equal ? "EQUAL\n" : "NOT EQUAL\n";
        payload += "states: " + std::to_string(r.space.size()) + "\n";
        payload += "blocks: " + std::to_string(r.partition.num_blocks()) + "\n";
        payload += "iterations: " + std::to_string(r.iterations) + "\n";
        if (r.evidence) payload += "evidence: " + evidence_to_text(*r.evidence) + "\n";
      }
      detail::emit(payload, output_path, out);
      return r.equal ? exit_code::kEqual : exit_code::kNotEqual;
    }

    if (lts->parsed()) {
      std::vector<TermPtr> roots;
      for (const auto& input : inputs) roots.push_back(detail::load_term(input, inline_terms));
      StateSpace space = build_state_space(roots, state_bound);
      std::string payload;
      if (format == "dot") payload = space_to_dot(space);
      else if (format == "text") payload = detail::space_to_text(space);
      else payload = space_to_json(space).dump(2) + "\n";
      detail::emit(payload, output_path, out);
      return 0;
    }

    if (minimize->parsed()) {
      std::vector<TermPtr> roots;
      for (const auto& input : inputs) roots.push_back(detail::load_term(input, inline_terms));
      StateSpace space = build_state_space(roots, state_bound);
      Partition p = refine(space);
      StateSpace q = quotient(space, p);
      std::string payload;
      if (format == "dot") {
        payload = space_to_dot(q);
      } else if (format == "text") {
        payload = detail::space_to_text(q);
        payload += "blocks of the original space:\n";
        for (BlockId b = 0; b < p.num_blocks(); ++b) {
          payload += "  " + std::to_string(b) + ":";
          for (StateId s : p.blocks[b]) payload += " " + std::to_string(s);
          payload += "\n";
        }
      } else {
        Json j = space_to_json(q);
        j["blocks"] = partition_to_json(p)["blocks"];
        payload = j.dump(2) + "\n";
      }
      detail::emit(payload, output_path, out);
      return 0;
    }

    if (witness->parsed()) {
      TermPtr t = detail::load_term(inputs.at(0), inline_terms);
      StateSpace space = build_state_space(t, state_bound);
      Partition p = refine(space);
      StateId root = space.root();

      int modes = (witness_ell.empty() ? 0 : 1) + (witness_q.empty() ? 0 : 1) +
                  (witness_diverge ? 1 : 0);
      if (modes != 1) {
        err << "witness: specify exactly one of --ell, --q, --diverge\n";
        return exit_code::kUnknownQuery;
      }

      WitnessPolicy policy;
      bool found = false;
      if (witness_diverge) {
        found = has_divergent_tree(root, p, space, &policy);
      } else {
        BlockId target = 0;
        if (!witness_to.empty()) {
          TermPtr member;
          try {
            member = detail::load_term(witness_to, true);
          } catch (const Error& e) {
            err << "witness: cannot parse --to term: " << e.what() << "\n";
            return exit_code::kUnknownQuery;
          }
          std::string key = print(alpha_normalize(member));
          auto it = std::find(space.texts.begin(), space.texts.end(), key);
          if (it == space.texts.end()) {
            err << "witness: --to term is not a state of the space\n";
            return exit_code::kUnknownQuery;
          }
          target = p.block_of[static_cast<StateId>(it - space.texts.begin())];
        } else if (witness_class >= 0) {
          if (static_cast<std::size_t>(witness_class) >= p.num_blocks()) {
            err << "witness: no such block\n";
            return exit_code::kUnknownQuery;
          }
          target = static_cast<BlockId>(witness_class);
        } else {
          err << "witness: an ell/q query needs --to or --class\n";
          return exit_code::kUnknownQuery;
        }
        try {
          if (!witness_ell.empty()) {
            Prefix action = detail::parse_action_text(witness_ell);
            found = has_ell_transition(root, action, target, p, space, &policy);
          } else {
            Rational q = parse_rational(witness_q);
            found = has_q_transition(root, q, target, p, space, &policy);
          }
        } catch (const SameBlockError&) {
          err << "witness: the target class must differ from the root's class\n";
          return exit_code::kUnknownQuery;
        } catch (const PreconditionError& e) {
          err << "witness: " << e.what() << "\n";
          return exit_code::kUnknownQuery;
        }
      }

      if (!found) {
        detail::emit("no witness\n", output_path, out);
        return exit_code::kNotEqual;
      }
      TreeTruncation truncation = unroll(policy, depth, space);
      std::string payload;
      if (format == "json") payload = policy_to_json(policy).dump(2) + "\n";
      else payload = truncation_to_dot(truncation, space);
      detail::emit(payload, output_path, out);
      return 0;
    }

    if (diverge->parsed()) {
      TermPtr t = detail::load_term(inputs.at(0), inline_terms);
      StateSpace space = build_state_space(t, state_bound);
      Partition p = refine(space);
      bool divergent = has_divergent_tree(space.root(), p, space);
      std::string payload;
      if (format == "json") {
        Json j;
        j["format"] = "rccs-lab/1";
        j["divergent"] = divergent;
        payload = j.dump(2) + "\n";
      } else {
        payload = divergent ? "divergent epsilon-tree exists\n" : "no divergent epsilon-tree\n";
      }
      detail::emit(payload, output_path, out);
      return 0;
    }

    if (proptest->parsed()) {
      ProptestConfig cfg;
      cfg.seed = seed;
      cfg.cases = cases;
      cfg.state_bound = state_bound;
      cfg.oracle_bound = oracle_bound;
      ProptestResult r = run_proptest(cfg, out);
      return r.failures == 0 ? 0 : 1;
    }
  } catch (const BoundExceededError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kBoundExceeded;
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kBadInput;
  } catch (const IllFormedError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kBadInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kBadInput;
  }
  return 0;
}

}  // namespace rccs
