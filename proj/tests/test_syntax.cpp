#include <catch2/catch_amalgamated.hpp>

#include "rccs/generator.hpp"
#include "rccs/syntax.hpp"

using namespace rccs;

TEST_CASE("parsing the base forms") {
  CHECK(is_nil(parse("0")));

  auto omega = parse("mu X. (tau.a.0 + tau.X)");
  REQUIRE(omega->kind == Term::Kind::Fix);
  CHECK(omega->name == "X");
  const auto& body = omega->left;
  REQUIRE(body->kind == Term::Kind::Choice);
  REQUIRE(body->branches.size() == 2);
  CHECK(body->branches[0].action == act_tau());
  CHECK(body->branches[0].continuation->kind == Term::Kind::Choice);
  CHECK(body->branches[1].continuation->kind == Term::Kind::Var);
  CHECK(body->branches[1].continuation->name == "X");

  SECTION("trailing .0 can be omitted") {
    CHECK(term_eq(parse("a"), parse("a.0")));
    CHECK(term_eq(parse("mu X. (tau.a + tau.X)"), omega));
  }

  SECTION("output actions and restriction") {
    auto t = parse("(new b)('b.0 | (a.0 + b.0))");
    REQUIRE(t->kind == Term::Kind::Restrict);
    CHECK(t->name == "b");
    CHECK(t->left->kind == Term::Kind::Par);
    CHECK(t->left->left->branches[0].action == act_out("b"));
  }

  SECTION("precedence: | binds tighter than +, prefix tighter than |") {
    auto t = parse("a.b | c");
    REQUIRE(t->kind == Term::Kind::Par);
    CHECK(print(t->left) == "a.b");
    CHECK_THROWS_AS(parse("a + b | c"), SyntaxError);  // (b|c) is not a summand
  }

  SECTION("random choice") {
    auto t = parse("(1/2)tau.a.0 (+) (1/2)tau.b.0");
    REQUIRE(t->kind == Term::Kind::Random);
    REQUIRE(t->randoms.size() == 2);
    CHECK(t->randoms[0].probability == make_rational(1, 2));
    CHECK(term_eq(parse("(2/4)tau.a (+) (1/2)tau.b"), t));  // weights normalize
  }
}

TEST_CASE("ill-formed terms are rejected with the right reason") {
  auto reason_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const IllFormedError& e) {
      return e.reason;
    }
    throw std::runtime_error("expected IllFormedError");
  };
  CHECK(reason_of("(1/2)tau.a.0 (+) (1/3)tau.b.0") == IllFormedReason::ProbSumNotOne);
  CHECK(reason_of("(1/2)tau.a.0 (+) (3/2)tau.b.0") == IllFormedReason::ProbOutOfRange);
  CHECK(reason_of("mu X. (X | a.0)") == IllFormedReason::UnguardedVariable);
  CHECK(reason_of("mu X. ((new b)X)") == IllFormedReason::UnguardedVariable);

  SECTION("a lone weighted branch is rejected") {
    // grammar-level: "(1/2)tau.a" parses as a one-branch random choice
    CHECK_THROWS_AS(parse("(1/2)tau.a.0"), IllFormedError);
  }

  SECTION("guardedness accepts prefix and random-branch occurrences") {
    CHECK_NOTHROW(parse("mu X. (tau.X + a.(X | X))"));
    CHECK_NOTHROW(parse("mu X. ((1/2)tau.X (+) (1/2)tau.(new b)X)"));
    CHECK_NOTHROW(parse("mu X. (a.mu Y. (b.X + a.Y))"));
    // mu bodies extend to the end of the sum, so X here is bound and unguarded
    CHECK_THROWS_AS(parse("mu X. (a.0) | X"), IllFormedError);
  }
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse("a + ");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.position == 4);
  }
  CHECK_THROWS_AS(parse(""), SyntaxError);
  CHECK_THROWS_AS(parse("a (+) (1/2)tau.b"), SyntaxError);   // mixing + and (+)
  CHECK_THROWS_AS(parse("(a.0 | b.0) + c.0"), SyntaxError);  // unguarded summand
  CHECK_THROWS_AS(parse("1/2"), SyntaxError);
  CHECK_THROWS_AS(parse("(1/0)tau.a (+) (1/2)tau.b"), SyntaxError);
}

TEST_CASE("printing is canonical") {
  CHECK(print(nil()) == "0");
  CHECK(print(parse("mu X. ((1/2)tau.X (+) (1/2)tau.X)")) ==
        "mu X. ((1/2)tau.X (+) (1/2)tau.X)");
  CHECK(print(parse("(new b)('b.0 | (a.0 + b.0))")) == "(new b)('b | (a + b))");
  CHECK(print(parse("a.(b.0 | c.0)")) == "a.(b | c)");
  CHECK(print(parse("(a.b.0) | c")) == "a.b | c");

  SECTION("round trip on 1000 generated terms") {
    TermGenerator gen(20240601);
    for (int i = 0; i < 1000; ++i) {
      TermPtr t = gen.process();
      TermPtr back = parse(print(t));
      INFO(print(t));
      CHECK(term_eq(back, t));
    }
  }
}

TEST_CASE("substitution") {
  CHECK(term_eq(substitute(var("X"), "X", nil()), nil()));
  CHECK(term_eq(substitute(fix("X", prefix(act_in("a"), var("X"))), "X", nil()),
                fix("X", prefix(act_in("a"), var("X")))));

  SECTION("one-step unfolding of a fixpoint") {
    auto omega = parse("mu X. (tau.a + tau.X)");
    auto unfolded = unfold(omega);
    REQUIRE(unfolded->kind == Term::Kind::Choice);
    REQUIRE(unfolded->branches.size() == 2);
    CHECK(term_eq(unfolded->branches[0].continuation, parse("a.0")));
    CHECK(term_eq(unfolded->branches[1].continuation, omega));
  }

  SECTION("channel capture is avoided") {
    // (new a)(X | a.0) with X := 'a.0 — the free 'a must not be captured
    auto t = restriction("a", par(var("X"), prefix(act_in("a"), nil())));
    auto result = substitute(t, "X", prefix(act_out("a"), nil()));
    REQUIRE(result->kind == Term::Kind::Restrict);
    CHECK(result->name != "a");
    CHECK(free_channels(result).count("a"));
  }

  SECTION("variable capture is avoided") {
    // mu Y.(a.X + b.Y) with X := Y (free) — the binder must be renamed
    auto t = fix("Y", choice({{act_in("a"), var("X")}, {act_in("b"), var("Y")}}));
    auto result = substitute(t, "X", var("Y"));
    REQUIRE(result->kind == Term::Kind::Fix);
    CHECK(result->name != "Y");
    CHECK(free_vars(result) == std::set<std::string>{"Y"});
  }
}

TEST_CASE("free variables") {
  CHECK(free_vars(var("X")) == std::set<std::string>{"X"});
  CHECK(free_vars(parse("mu X. (tau.a + tau.X)")).empty());
  auto t = par(var("X"), fix("X", prefix(act_in("a"), var("X"))));
  CHECK(free_vars(t) == std::set<std::string>{"X"});
}

TEST_CASE("alpha normalization") {
  CHECK(print(alpha_normalize(fix("Y", prefix(act_in("a"), var("Y"))))) == "mu X0. (a.X0)");
  CHECK(print(alpha_normalize(restriction("b", prefix(act_out("b"), nil())))) == "(new c0)'c0");

  SECTION("bound-name permutation is erased") {
    auto t1 = parse("mu Y. (a.mu Z. (b.Y + c.Z))");
    auto t2 = parse("mu Z. (a.mu Y. (b.Z + c.Y))");
    CHECK(term_eq(alpha_normalize(t1), alpha_normalize(t2)));
  }

  SECTION("free names survive and are dodged") {
    auto t = parse("(new b)(b.0 | c0.0)");  // c0 occurs free
    auto n = alpha_normalize(t);
    CHECK(free_channels(n).count("c0"));
    CHECK(n->name != "c0");
  }

  SECTION("idempotent on 1000 generated terms") {
    TermGenerator gen(77);
    for (int i = 0; i < 1000; ++i) {
      TermPtr t = gen.process();
      TermPtr once = alpha_normalize(t);
      CHECK(term_eq(alpha_normalize(once), once));
    }
  }
}
