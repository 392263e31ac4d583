#include <random>

#include "cgchat/compiler.hpp"
#include "cgchat/response.hpp"
#include "doctest.h"

using namespace cgchat;

namespace {

struct Fixture {
  IdGen ids;
  ConceptGraph kb;
  std::vector<Rule> rules;

  Fixture(const std::string& knowledge, const std::string& rule_src) {
    kb = compile(knowledge, "<kb>", ConceptGraph{}, ids).knowledge;
    rules = compile(rule_src, "<r>", kb, ids).rules;
  }
  std::vector<const Rule*> ptrs() const {
    std::vector<const Rule*> out;
    for (const auto& r : rules) out.push_back(&r);
    return out;
  }
  WorkingMemory wm() const {
    WorkingMemory w;
    w.graph = kb;
    return w;
  }
};

Rule make_rule(const std::string& name, Priority p, RuleKind k = RuleKind::presentation) {
  Rule r;
  r.name = name;
  r.kind = k;
  r.priority = p;
  return r;
}

}  // namespace

TEST_CASE("score table over all priority classes") {
  const Priority ps[] = {Priority::low, Priority::mid, Priority::high, Priority::critical};
  const double ratings[] = {0.1, 0.4, 0.7, 1.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(rating(ps[i]) == ratings[i]);
    for (double s : {0.0, 0.5, 1.0}) CHECK(score(ps[i], s) == 0.75 * ratings[i] + 0.25 * s);
  }
  CHECK(score(Priority::high, 0.9) == doctest::Approx(0.75));
  CHECK(score(Priority::critical, 1.0) == 1.0);
  CHECK(score(Priority::low, 0.0) == doctest::Approx(0.075));
}

TEST_CASE("critical outranks low and mid at any salience") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double sc = u(rng), so = u(rng);
    CHECK(score(Priority::critical, sc) > score(Priority::mid, so));
    CHECK(score(Priority::critical, sc) > score(Priority::low, so));
  }
}

TEST_CASE("scaling saliences keeps the argmax within a class") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    double a = u(rng), b = u(rng), k = u(rng);
    bool before = score(Priority::mid, a) > score(Priority::mid, b);
    bool after = score(Priority::mid, k * a) > score(Priority::mid, k * b);
    if (a != b && k > 0) CHECK(before == after);
  }
}

TEST_CASE("ties break on rule name then bindings") {
  Rule a = make_rule("alpha", Priority::mid), b = make_rule("beta", Priority::mid);
  Candidate ca{&a, Solution{{{"X", "z"}}}, {}, 0.5, score(Priority::mid, 0.5)};
  Candidate cb{&b, Solution{{{"X", "a"}}}, {}, 0.5, score(Priority::mid, 0.5)};
  CHECK(ranks_before(ca, cb));
  CHECK_FALSE(ranks_before(cb, ca));
  Candidate ca2{&a, Solution{{{"X", "a"}}}, {}, 0.5, score(Priority::mid, 0.5)};
  CHECK(ranks_before(ca2, ca));
  auto s1 = select_compound({cb, ca, ca2});
  auto s2 = select_compound({ca2, cb, ca});
  CHECK(s1.presentation->rule->name == "alpha");
  CHECK(s1.presentation->solution == ca2.solution);
  CHECK(s2.presentation->solution == s1.presentation->solution);
}

TEST_CASE("reaction and presentation are chosen independently") {
  Rule r = make_rule("react", Priority::low, RuleKind::reaction);
  Rule p = make_rule("present", Priority::high);
  Rule p2 = make_rule("present2", Priority::mid);
  std::vector<Candidate> cs = {{&p2, {}, {}, 0, score(Priority::mid, 0)},
                               {&r, {}, {}, 0, score(Priority::low, 0)},
                               {&p, {}, {}, 0, score(Priority::high, 0)}};
  auto s = select_compound(cs);
  CHECK(s.reaction->rule == &r);
  CHECK(s.presentation->rule == &p);
  CHECK_THROWS_AS(select_compound({}), NoCandidate);
}

TEST_CASE("candidates for the ask-why rule") {
  Fixture f("l/like(user/person(), avengers/movie()) c/cause(l, r/reason()) type(movie, item)",
            "presentation ask_why [high]: l/like(user, X/item()) cause(l, reason()) -> \"Why?\"\n"
            "presentation fallback [low, repeat]: -> \"Tell me more.\"\n");
  auto wm = f.wm();
  wm.graph.features("l").salience = 1.0;
  auto cs = identify_candidates(wm, f.ptrs());
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].rule->name == "ask_why");
  CHECK(cs[0].d_set == std::vector<ConceptId>{"c", "l"});
  CHECK(cs[0].mean_salience == doctest::Approx(0.5));
  CHECK(cs[0].score == doctest::Approx(0.75 * 0.7 + 0.25 * 0.5));
  CHECK(cs[1].rule->name == "fallback");
}

TEST_CASE("empty memory leaves only the context-free fallback") {
  Fixture f("", "presentation fallback [low, repeat]: -> \"Tell me more.\"\n"
                "presentation share [mid]: fan(bot, G/genre()) -> \"{G}\"\n");
  auto cs = identify_candidates(WorkingMemory{}, f.ptrs());
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].rule->name == "fallback");
  CHECK(cs[0].score == doctest::Approx(0.075));
}

TEST_CASE("selected candidates are not offered again") {
  Fixture f("f/fan(bot/agent(), action/genre()) g/fan(bot, comedy/genre())",
            "presentation share [mid]: F/fan(bot, G/genre()) -> \"{G}\"\n"
            "presentation fallback [low, repeat]: -> \"Tell me more.\"\n");
  auto wm = f.wm();
  auto first = identify_candidates(wm, f.ptrs());
  auto sel = select_compound(first);
  CHECK(sel.presentation->solution.bindings.at("G") == "action");
  commit_selection(wm, sel);
  CHECK(wm.graph.features("f").covered);

  auto second = identify_candidates(wm, f.ptrs());
  for (const auto& c : second) CHECK(c.key() != sel.presentation->key());
  auto sel2 = select_compound(second);
  CHECK(sel2.presentation->solution.bindings.at("G") == "comedy");
  commit_selection(wm, sel2);

  // Repeatable rules stay available.
  auto third = identify_candidates(wm, f.ptrs());
  REQUIRE(third.size() == 1);
  CHECK(third[0].rule->name == "fallback");
  commit_selection(wm, select_compound(third));
  CHECK(identify_candidates(wm, f.ptrs()).size() == 1);
}

TEST_CASE("fully covered d_set excludes a candidate even for a new rule") {
  Fixture f("f/fan(bot/agent(), action/genre())",
            "presentation a [mid]: F/fan(bot, G/genre()) -> \"{G}\"\n"
            "presentation b [mid]: F/fan(bot, G/genre()) -> \"{G}\"\n");
  auto wm = f.wm();
  wm.graph.features("f").covered = true;
  CHECK(identify_candidates(wm, f.ptrs()).empty());
}

TEST_CASE("committing releases pinned requests") {
  Fixture f("q/request(user/person(), m/movie())",
            "presentation answer [high]: Q/request(user, M/movie()) -> \"{M}\"\n");
  auto wm = f.wm();
  wm.graph.features("q").pinned = true;
  commit_selection(wm, select_compound(identify_candidates(wm, f.ptrs())));
  CHECK_FALSE(wm.graph.features("q").pinned);
  CHECK(wm.graph.features("q").covered);
}
