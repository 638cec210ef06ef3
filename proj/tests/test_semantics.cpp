#include <algorithm>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "rccs/generator.hpp"
#include "rccs/semantics.hpp"

using namespace rccs;

namespace {

// Order-insensitive summary of raw bundles, with targets alpha-normalized.
std::multiset<std::string> bundle_summary(const std::vector<RawBundle>& bundles) {
  std::multiset<std::string> out;
  for (const auto& b : bundles) {
    switch (b.kind) {
      case BundleKind::Visible:
        out.insert(rccs::detail::print_action(b.action) + " -> " + print(alpha_normalize(b.target)));
        break;
      case BundleKind::Tau:
        out.insert("tau -> " + print(alpha_normalize(b.target)));
        break;
      case BundleKind::Random: {
        std::string s = "random ->";
        for (const auto& br : b.branches)
          s += " " + rational_string(br.probability) + ":" + print(alpha_normalize(br.target));
        out.insert(s);
        break;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("step on the worked examples") {
  CHECK(step(nil()).empty());

  SECTION("a random choice fires as one collective bundle") {
    auto bundles = step(fixtures::omega_half_a());
    REQUIRE(bundles.size() == 1);
    REQUIRE(bundles[0].kind == BundleKind::Random);
    REQUIRE(bundles[0].branches.size() == 2);
    CHECK(bundles[0].branches[0].probability == make_rational(1, 2));
    CHECK(print(bundles[0].branches[0].target) == "a");
    CHECK(term_eq(alpha_normalize(bundles[0].branches[1].target),
                  alpha_normalize(fixtures::omega_half_a())));
  }

  SECTION("restriction blocks both polarities and communication survives") {
    auto t = parse("(new b)('b.0 | (a.0 + b.0))");
    auto summary = bundle_summary(step(t));
    std::multiset<std::string> expected{
        "tau -> (new c0)(0 | 0)",
        "a -> (new c0)('c0 | 0)",
    };
    CHECK(summary == expected);
  }

  SECTION("random branches do not synchronize") {
    auto t = parse("((1/2)tau.a.0 (+) (1/2)tau.b.0) | 'a.0");
    auto summary = bundle_summary(step(t));
    std::multiset<std::string> expected{
        "random -> 1/2:a | 'a 1/2:b | 'a",
        "'a -> ((1/2)tau.a (+) (1/2)tau.b) | 0",
    };
    CHECK(summary == expected);
  }

  SECTION("open terms are rejected") {
    CHECK_THROWS_AS(step(var("X")), OpenTermError);
    CHECK_THROWS_AS(step(par(var("X"), nil())), OpenTermError);
  }
}

TEST_CASE("state-space construction") {
  SECTION("Omega_a closes with three states") {
    auto sp = build_state_space(fixtures::omega_a());
    CHECK(sp.size() == 3);
    fixtures::state_of(sp, "mu X. (tau.a + tau.X)");
    fixtures::state_of(sp, "a.0");
    fixtures::state_of(sp, "0");
  }

  SECTION("Omega_half is a single recurrent state") {
    auto sp = build_state_space(fixtures::omega_half());
    REQUIRE(sp.size() == 1);
    REQUIRE(sp.bundles[0].size() == 1);
    const auto& b = sp.bundles[0][0];
    REQUIRE(b.kind == BundleKind::Random);
    REQUIRE(b.branches.size() == 2);
    CHECK(b.branches[0].target == 0);
    CHECK(b.branches[1].target == 0);
  }

  SECTION("unbounded growth hits the bound") {
    CHECK_THROWS_AS(build_state_space(parse("mu X. (a.(X | X))"), 10), BoundExceededError);
  }

  SECTION("joint spaces share syntactically identical states") {
    auto sp = build_state_space(
        std::vector<TermPtr>{parse("a.b.0"), parse("c.b.0")});
    CHECK(sp.size() == 4);  // a.b, c.b, b, 0 — b.0 and 0 shared
  }
}

TEST_CASE("silent-sequence probability") {
  CHECK(seq_probability({}) == 1);
  CHECK(seq_probability({Label::ptau(make_rational(1, 2)), Label::ptau(make_rational(1, 3))}) ==
        make_rational(1, 6));
  CHECK(seq_probability({Label::tau(), Label::ptau(make_rational(2, 3))}) == make_rational(2, 3));
  CHECK_THROWS_AS(seq_probability({Label::input("a")}), VisibleInPathError);

  SECTION("weight 1 collapses to tau") {
    CHECK(Label::ptau(Rational(1)).kind == Label::Kind::Tau);
    CHECK_THROWS_AS(Label::ptau(Rational(2)), PreconditionError);
  }
}

TEST_CASE("semantic invariants on generated terms") {
  TermGenerator gen(4242);
  int ccs_checked = 0;
  for (int i = 0; i < 300; ++i) {
    TermPtr t = gen.process();
    auto bundles = step(t);

    for (const auto& b : bundles) {
      if (b.kind != BundleKind::Random) continue;
      Rational sum = 0;
      REQUIRE(b.branches.size() >= 2);
      for (const auto& br : b.branches) {
        CHECK(is_branch_probability(br.probability));
        sum += br.probability;
      }
      CHECK(sum == 1);
    }

    // step commutes with alpha-normalization
    auto normalized = bundle_summary(step(alpha_normalize(t)));
    CHECK(normalized == bundle_summary(bundles));

    if (!contains_random(t)) {
      ++ccs_checked;
      for (const auto& b : bundles) CHECK(b.kind != BundleKind::Random);
    }
  }
  CHECK(ccs_checked > 20);
}

TEST_CASE("communication closure and restriction, property style") {
  TermGenerator gen(555);
  for (int i = 0; i < 120; ++i) {
    TermPtr s = gen.process();
    TermPtr t = gen.process();
    auto ls = step(s);
    auto rs = step(t);
    auto joint = bundle_summary(step(par(s, t)));
    for (const auto& lb : ls) {
      if (lb.kind != BundleKind::Visible) continue;
      for (const auto& rb : rs) {
        if (rb.kind != BundleKind::Visible) continue;
        if (lb.action.channel != rb.action.channel || lb.action.polarity == rb.action.polarity)
          continue;
        std::string expected = "tau -> " + print(alpha_normalize(par(lb.target, rb.target)));
        INFO(print(s) << "  |  " << print(t));
        CHECK(joint.count(expected) >= 1);
      }
    }

    std::string chan = gen.channel();
    for (const auto& b : step(restriction(chan, s)))
      if (b.kind == BundleKind::Visible) CHECK(b.action.channel != chan);
  }
}

TEST_CASE("exports") {
  auto sp = build_state_space(fixtures::omega_half_a());
  SECTION("json schema") {
    Json j = space_to_json(sp);
    CHECK(j["format"] == "rccs-lab/1");
    CHECK(j["root"] == 0);
    REQUIRE(j["states"].size() == sp.size());
    CHECK(j["states"][0]["term"] == sp.texts[0]);
    bool found_random = false;
    for (const auto& e : j["bundles"]) {
      if (e["kind"] == "random") {
        found_random = true;
        CHECK(e["branches"][0]["p"] == "1/2");
      }
    }
    CHECK(found_random);
  }
  SECTION("dot carries weighted edges and a grouping arc") {
    std::string dot = space_to_dot(sp);
    CHECK(dot.find("p=1/2") != std::string::npos);
    CHECK(dot.find("style=dashed") != std::string::npos);
  }
}
