#include <random>

#include "cgchat/compiler.hpp"
#include "cgchat/dialogue_state.hpp"
#include "doctest.h"

using namespace cgchat;

namespace {

WorkingMemory wm_of(const std::string& src) {
  WorkingMemory wm;
  wm.graph = compile(src).knowledge;
  return wm;
}

ConceptId pred_with_type(const ConceptGraph& g, const ConceptId& t) {
  for (const auto& [p, sig] : g.predicates())
    if (g.has_type(p, t)) return p;
  return {};
}

}  // namespace

TEST_CASE("mention sets salience and turn") {
  SalienceConfig cfg;
  auto wm = wm_of("tom/person()");
  wm.turn = 3;
  mention(wm, "tom", cfg);
  CHECK(wm.graph.features("tom").salience == doctest::Approx(1.0));
  CHECK(wm.graph.features("tom").last_mention == 3);
}

TEST_CASE("decay subtracts per turn and floors at zero") {
  SalienceConfig cfg;
  auto wm = wm_of("a/thing() b/thing()");
  wm.graph.features("a").salience = 0.5;
  wm.graph.features("b").salience = 0.05;
  decay_salience(wm, cfg);
  CHECK(wm.graph.features("a").salience == doctest::Approx(0.4));
  CHECK(wm.graph.features("b").salience == doctest::Approx(0.0));
}

TEST_CASE("propagation raises a weak neighbor to source minus delta") {
  SalienceConfig cfg;
  auto wm = wm_of("p/rel(a, x)");
  wm.graph.features("p").salience = 1.0;
  wm.graph.features("x").salience = 0.3;
  propagate_salience(wm, cfg);
  CHECK(wm.graph.features("x").salience == doctest::Approx(0.8));
  CHECK(wm.graph.features("a").salience == doctest::Approx(0.8));
}

TEST_CASE("propagation reaches a fixpoint along a chain") {
  SalienceConfig cfg;
  auto wm = wm_of("b/rel(a) c/rel(b)");
  wm.graph.features("a").salience = 1.0;
  propagate_salience(wm, cfg);
  CHECK(wm.graph.features("b").salience == doctest::Approx(0.8));
  CHECK(wm.graph.features("c").salience == doctest::Approx(0.6));

  SalienceConfig one = cfg;
  one.propagate_to_fixpoint = false;
  auto wm1 = wm_of("b/rel(a) c/rel(b)");
  wm1.graph.features("a").salience = 1.0;
  propagate_salience(wm1, one);
  CHECK(wm1.graph.features("b").salience == doctest::Approx(0.8));
  CHECK(wm1.graph.features("c").salience == doctest::Approx(0.0));
}

TEST_CASE("propagation never lowers salience") {
  SalienceConfig cfg;
  auto wm = wm_of("b/rel(a)");
  wm.graph.features("a").salience = 0.5;
  wm.graph.features("b").salience = 0.9;
  propagate_salience(wm, cfg);
  CHECK(wm.graph.features("b").salience == doctest::Approx(0.9));
  CHECK(wm.graph.features("a").salience == doctest::Approx(0.7));
}

TEST_CASE("ingest mentions utterance concepts and pins requests") {
  SalienceConfig cfg;
  WorkingMemory wm;
  auto u = compile("q/request(user, x/movie())").knowledge;
  ingest_turn(wm, u, cfg);
  CHECK(wm.turn == 1);
  CHECK(wm.graph.features("q").pinned);
  CHECK(wm.graph.features("x").salience == doctest::Approx(1.0));
  CHECK(wm.graph.features("movie").salience == doctest::Approx(0.0));
}

TEST_CASE("retrieval respects the hop limit and adds ancestry") {
  auto kb = compile(
                "fido/dog() w/wag(fido, t/tail()) h/happy(t)\n"
                "type(dog, animal)\n")
                .knowledge;
  KbIndex index(kb);
  SalienceConfig cfg;
  WorkingMemory wm;
  wm.graph.add_concept("fido");
  wm.graph.features("fido").salience = 1.0;

  auto added = retrieve_knowledge(wm, index, cfg);
  CHECK(added.count("w"));
  CHECK(added.count("t"));
  CHECK_FALSE(wm.graph.contains("h"));
  CHECK(wm.graph.has_type("fido", "animal"));
  CHECK(wm.graph.features("w").salience == doctest::Approx(0.0));

  cfg.retrieval_hops = 2;
  WorkingMemory wm2;
  wm2.graph.add_concept("fido");
  wm2.graph.features("fido").salience = 1.0;
  retrieve_knowledge(wm2, index, cfg);
  CHECK(wm2.graph.contains("h"));
}

TEST_CASE("retrieval ignores concepts below the threshold") {
  auto kb = compile("w/wag(fido/dog(), t/tail())").knowledge;
  KbIndex index(kb);
  SalienceConfig cfg;
  WorkingMemory wm;
  wm.graph.add_concept("fido");
  wm.graph.features("fido").salience = 0.7;
  retrieve_knowledge(wm, index, cfg);
  CHECK_FALSE(wm.graph.contains("w"));
}

TEST_CASE("reference resolves to the most salient compatible concept") {
  auto wm = wm_of(
      "avengers/movie() frozen/movie() tom/person()\n"
      "m2/movie() l/like(user/person(), m2) ref(m2)\n");
  wm.graph.features("avengers").salience = 1.0;
  wm.graph.features("frozen").salience = 0.2;
  wm.graph.features("tom").salience = 1.0;
  wm.fired.insert(FiredKey{"ask_fav", {{"M", "m2"}}});

  auto res = resolve_references(wm);
  REQUIRE(res.size() == 1);
  CHECK(res[0].focus == "m2");
  CHECK(res[0].referent == "avengers");
  CHECK_FALSE(wm.graph.contains("m2"));
  CHECK(wm.graph.signature("l").object == std::optional<ConceptId>("avengers"));
  CHECK(pred_with_type(wm.graph, "ref").empty());
  CHECK(wm.fired.begin()->bindings.at("M") == "avengers");
}

TEST_CASE("reference with a constraint predicate needs that predicate") {
  auto wm = wm_of(
      "avengers/movie() frozen/movie()\n"
      "f/favorite(user/person(), frozen)\n"
      "it/movie() c/favorite(user, it) ref(it, c)\n");
  wm.graph.features("avengers").salience = 1.0;
  wm.graph.features("frozen").salience = 0.1;
  auto res = resolve_references(wm);
  REQUIRE(res.size() == 1);
  CHECK(res[0].referent == "frozen");
}

TEST_CASE("unresolvable reference persists") {
  auto wm = wm_of("x/movie() ref(x) tom/person()");
  CHECK(resolve_references(wm).empty());
  CHECK(wm.graph.contains("x"));
  CHECK_FALSE(pred_with_type(wm.graph, "ref").empty());
}

TEST_CASE("contradictions pair opposite truth on the same shape") {
  auto wm = wm_of("a/like(user, x) b/like(user, x) not(b) c/like(user, y) not(c)");
  auto cs = detect_contradictions(wm);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0] == std::make_pair(ConceptId("a"), ConceptId("b")));
}

TEST_CASE("prune keeps the most salient and respects pins") {
  SalienceConfig cfg;
  cfg.cap = 2;
  auto wm = wm_of("a b c d");
  wm.pinned = {"d"};
  wm.graph.features("a").salience = 0.9;
  wm.graph.features("b").salience = 0.1;
  wm.graph.features("c").salience = 0.5;
  auto gone = prune(wm, cfg);
  CHECK(gone == std::set<ConceptId>{"b"});
  CHECK(wm.graph.contains("d"));
}

TEST_CASE("prune property: bounded, protected survive, no dangling args") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    SalienceConfig cfg;
    cfg.cap = 1 + static_cast<int>(rng() % 12);
    WorkingMemory wm;
    int n = 5 + static_cast<int>(rng() % 30);
    std::vector<ConceptId> ids;
    for (int i = 0; i < n; ++i) {
      ConceptId c = "c" + std::to_string(i);
      if (!ids.empty() && rng() % 2) {
        Signature sig;
        sig.subject = ids[rng() % ids.size()];
        if (rng() % 2) sig.object = ids[rng() % ids.size()];
        wm.graph.set_signature(c, sig);
      } else {
        wm.graph.add_concept(c);
      }
      wm.graph.features(c).salience = (rng() % 11) / 10.0;
      wm.graph.features(c).last_mention = static_cast<int>(rng() % 5);
      if (rng() % 10 == 0) wm.graph.features(c).pinned = true;
      ids.push_back(c);
    }
    if (rng() % 3 == 0) wm.graph.add_type(ids[0], "kind");
    std::set<ConceptId> protected_before;
    for (const auto& [c, f] : wm.graph.nodes())
      if (f.pinned && !wm.graph.is_predicate(c)) protected_before.insert(c);

    prune(wm, cfg);
    CHECK(unprotected_count(wm) <= static_cast<std::size_t>(cfg.cap));
    for (const auto& [p, sig] : wm.graph.predicates())
      for (const auto& a : {sig.subject, sig.object})
        if (a) CHECK(wm.graph.contains(*a));
    // Pinned predicates can still fall with a pruned argument.
    for (const auto& c : protected_before) CHECK(wm.graph.contains(c));
  }
}

TEST_CASE("two one-hop retrievals differ from one two-hop retrieval") {
  auto kb = compile("a/thing() p/rel(a, b/thing()) q/rel(b, c/thing())").knowledge;
  KbIndex index(kb);
  SalienceConfig one;
  WorkingMemory wm;
  wm.graph.add_concept("a");
  wm.graph.features("a").salience = 1.0;
  retrieve_knowledge(wm, index, one);
  retrieve_knowledge(wm, index, one);
  // b entered at salience 0, so it never became a gateway.
  CHECK_FALSE(wm.graph.contains("q"));

  SalienceConfig two;
  two.retrieval_hops = 2;
  WorkingMemory wm2;
  wm2.graph.add_concept("a");
  wm2.graph.features("a").salience = 1.0;
  retrieve_knowledge(wm2, index, two);
  CHECK(wm2.graph.contains("q"));
}

TEST_CASE("empty utterance only advances the turn") {
  SalienceConfig cfg;
  auto wm = wm_of("tom/person()");
  auto before = wm.graph;
  ingest_turn(wm, ConceptGraph{}, cfg);
  CHECK(wm.turn == 1);
  CHECK(wm.graph == before);
}

TEST_CASE("re-mention restores full salience") {
  SalienceConfig cfg;
  WorkingMemory wm;
  auto u = compile("tom/person()").knowledge;
  ingest_turn(wm, u, cfg);
  for (int i = 0; i < 4; ++i) decay_salience(wm, cfg);
  CHECK(wm.graph.features("tom").salience == doctest::Approx(0.6));
  ingest_turn(wm, u, cfg);
  CHECK(wm.graph.features("tom").salience == doctest::Approx(1.0));
  CHECK(wm.graph.features("tom").last_mention == 2);
}

TEST_CASE("prune keeps the top k of 150") {
  SalienceConfig cfg;
  WorkingMemory wm;
  wm.pinned = {"user"};
  wm.graph.add_concept("user");
  for (int i = 0; i < 150; ++i) {
    ConceptId c = "c" + std::to_string(i);
    wm.graph.add_concept(c);
    wm.graph.features(c).salience = (i % 50) / 50.0;
  }
  auto gone = prune(wm, cfg);
  CHECK(gone.size() == 50);
  CHECK(wm.graph.contains("user"));
  double kth = 1.0;
  for (const auto& [c, f] : wm.graph.nodes())
    if (c != "user") kth = std::min(kth, f.salience);
  for (const auto& c : gone) CHECK(c.rfind("c", 0) == 0);
  for (int i = 0; i < 150; ++i) {
    ConceptId c = "c" + std::to_string(i);
    if (gone.count(c)) CHECK((i % 50) / 50.0 <= kth);
  }
}

TEST_CASE("small memories are not pruned") {
  SalienceConfig cfg;
  auto wm = wm_of("a b c");
  CHECK(prune(wm, cfg).empty());
}

TEST_CASE("contradiction detection on the unhappy example") {
  auto wm = wm_of("h1/happy(john) h2/happy(john) not(h2) h3/happy(mary)");
  auto cs = detect_contradictions(wm);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].first == "h1");
  CHECK(detect_contradictions(WorkingMemory{}).empty());
}
