#pragma once

#include <algorithm>
#include <random>

#include "cgchat/compiler.hpp"
#include "cgchat/matcher.hpp"

namespace testsupport {

using namespace cgchat;

// Logic forms covering tense, negation, modals, requests and nesting.
inline const char* const kLogicForms[] = {
    "r/run(user) time(r, past) on(r, t) type(t, treadmill)",
    "l/like(user, watch(user, m)) time(l, now) type(m, movie) type(m, group) action(m)",
    "s/sweet(d) time(s, now) type(d, dog) possess(bot, d)",
    "b/be(user, t) time(b, now) type(t, teacher) of(t, math)",
    "f/fall(g) time(f, past) type(g, grade) type(g, group) possess(user, g) quick(f)\n"
    "after(f, s/stop(user, study(user))) time(s, past)",
    "e/eat(user, l) type(l, lunch) not(e) time(e, past)",
    "e/eat(user, l) type(l, lunch) should(e) time(e, now)",
    "p/play(bot, i) type(i, musical_instrument) time(p, now) request(user, i)",
    "l/like(bot, b) type(b, book) time(l, past) g/give(user, b) recipient(g, bot)\n"
    "time(g, past) request_truth(user, l)",
};

// Round-trip input: up to 12 concepts, an acyclic ontology and up to six
// predicates of mixed arity and truth.
inline ConceptGraph random_graph(std::mt19937& rng) {
  ConceptGraph g;
  std::uniform_int_distribution<int> nc(1, 12), coin(0, 3);
  int n = nc(rng);
  std::vector<ConceptId> ids;
  for (int i = 0; i < n; ++i) {
    ids.push_back("c" + std::to_string(i));
    g.add_concept(ids.back());
  }
  auto pick = [&] { return ids[std::uniform_int_distribution<int>(0, n - 1)(rng)]; };
  for (int i = 0; i < n; ++i) {
    if (coin(rng) == 0) {
      // Ontology edges only go from higher to lower index: acyclic.
      if (i > 0) g.add_type(ids[i], ids[std::uniform_int_distribution<int>(0, i - 1)(rng)]);
    }
  }
  int np = std::uniform_int_distribution<int>(0, 6)(rng);
  for (int i = 0; i < np; ++i) {
    ConceptId p = "p" + std::to_string(i);
    std::optional<ConceptId> s, o;
    int shape = coin(rng);
    if (shape != 0) s = pick();
    if (shape >= 2) o = pick();
    g.add_predicate(p, "ptype" + std::to_string(coin(rng)), s, o);
    if (coin(rng) == 0) g.add_type(p, "extra");
    if (coin(rng) == 0) g.features(p).truth = Truth::negative;
  }
  return g;
}

// Data: a few typed entities and predicates, at most 12 concepts.
inline ConceptGraph random_kb(std::mt19937& rng) {
  auto roll = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char* types[] = {"dog", "cat", "animal"};
  const char* ptypes[] = {"wag", "like"};
  ConceptGraph g;
  std::vector<ConceptId> ents;
  int ne = roll(1, 4);
  for (int i = 0; i < ne; ++i) {
    ents.push_back("e" + std::to_string(i));
    g.add_concept(ents.back());
    if (roll(0, 2)) g.add_type(ents.back(), types[roll(0, 1)]);
  }
  if (g.contains("dog") && roll(0, 1)) g.add_type("dog", "animal");
  int np = roll(0, 4);
  for (int i = 0; i < np && g.size() < 12; ++i) {
    ConceptId p = "p" + std::to_string(i);
    std::optional<ConceptId> s = ents[roll(0, ne - 1)];
    std::optional<ConceptId> o;
    int shape = roll(0, 3);
    if (shape >= 1) o = ents[roll(0, ne - 1)];
    if (shape == 3 && i > 0) o = "p" + std::to_string(roll(0, i - 1));
    g.add_predicate(p, ptypes[roll(0, 1)], s, o);
    if (roll(0, 4) == 0) g.features(p).truth = Truth::negative;
  }
  while (g.size() > 12) {
    auto last = g.predicates().rbegin()->first;
    g.remove_concept(last);
  }
  return g;
}

// Query: a perturbed copy of part of the data with up to four variables.
inline QueryGraph random_query(std::mt19937& rng, const ConceptGraph& data) {
  auto roll = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  QueryGraph q;
  std::vector<ConceptId> preds;
  for (const auto& [p, sig] : data.predicates()) preds.push_back(p);
  int take = preds.empty() ? 0 : roll(1, std::min<int>(2, preds.size()));
  for (int i = 0; i < take; ++i) {
    const auto& p = preds[roll(0, preds.size() - 1)];
    if (q.graph.is_predicate(p)) continue;
    Signature sig = data.signature(p);
    if (roll(0, 5) == 0) sig.object.reset();
    q.graph.set_signature(p, sig);
    for (const auto& t : data.parents(p)) q.graph.add_type(p, t);
    if (roll(0, 4) == 0)
      q.graph.features(p).truth = data.features(p).truth == Truth::positive
                                      ? Truth::negative
                                      : Truth::positive;
    else
      q.graph.features(p).truth = data.features(p).truth;
  }
  if (q.graph.empty() || roll(0, 3) == 0) {
    ConceptId x = "lonely";
    q.graph.add_concept(x);
    if (roll(0, 1)) q.graph.add_type(x, roll(0, 1) ? "dog" : "animal");
  }
  // Random extra type requirements on entity-like concepts.
  std::vector<ConceptId> cs;
  for (const auto& [c, f] : q.graph.nodes())
    if (!q.graph.is_type(c)) cs.push_back(c);
  for (const auto& c : cs)
    if (!q.graph.is_predicate(c) && roll(0, 5) == 0)
      q.graph.add_type(c, roll(0, 1) ? "cat" : "animal");

  // Rename up to four non-type concepts to variables.
  cs.clear();
  for (const auto& [c, f] : q.graph.nodes())
    if (!q.graph.is_type(c)) cs.push_back(c);
  std::shuffle(cs.begin(), cs.end(), rng);
  int nv = std::min<int>(cs.size(), roll(0, 4));
  for (int i = 0; i < nv; ++i) {
    ConceptId v = "V" + std::to_string(i);
    q.graph.add_concept(v);
    q.graph.merge_concepts(v, cs[i]);
    q.variables.insert(v);
  }
  if (nv >= 2 && roll(0, 2) == 0) q.distinct.emplace_back("V0", "V1");
  return q;
}

}  // namespace testsupport
