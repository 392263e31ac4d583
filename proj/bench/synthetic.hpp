#pragma once

#include <random>
#include <string>
#include <vector>

#include "cgchat/matcher.hpp"

namespace cgchat::synthetic {

/// A 150-concept working memory: 10 entity types, 8 predicate types,
/// 52 typed entities and 80 binary/unary predicates.
inline ConceptGraph working_memory(unsigned seed = 1) {
  std::mt19937 rng(seed);
  ConceptGraph g;
  const char* tree[][2] = {{"t1", "t0"}, {"t2", "t0"}, {"t3", "t0"}, {"t4", "t1"}, {"t5", "t1"},
                           {"t6", "t2"}, {"t7", "t2"}, {"t8", "t3"}, {"t9", "t3"}};
  for (const auto& [c, p] : tree) g.add_type(c, p);
  for (int i = 1; i < 8; ++i) g.add_type("r" + std::to_string(i), "r0");
  for (int i = 0; i < 52; ++i) g.add_type("e" + std::to_string(i), "t" + std::to_string(4 + rng() % 6));
  for (int i = 0; i < 80; ++i) {
    ConceptId p = "p" + std::to_string(i);
    Signature sig;
    sig.subject = "e" + std::to_string(rng() % 52);
    if (rng() % 5) sig.object = "e" + std::to_string(rng() % 52);
    g.set_signature(p, sig);
    g.add_type(p, "r" + std::to_string(1 + rng() % 7));
    if (rng() % 10 == 0) g.features(p).truth = Truth::negative;
  }
  return g;
}

/// Connected preconditions of one to three predicate atoms over at most
/// four entity variables.
inline std::vector<QueryGraph> rules(int n, unsigned seed = 2) {
  std::mt19937 rng(seed);
  std::vector<QueryGraph> out;
  for (int r = 0; r < n; ++r) {
    QueryGraph q;
    q.name = "syn" + std::to_string(r);
    int atoms = 1 + static_cast<int>(rng() % 3);
    int vars = 0;
    auto entity = [&](bool fresh) {
      if (vars == 0 || (fresh && vars < 4)) {
        ConceptId v = "V" + std::to_string(vars++);
        q.graph.add_type(v, "t" + std::to_string(rng() % 10));
        q.variables.insert(v);
        return v;
      }
      return "V" + std::to_string(rng() % vars);
    };
    for (int a = 0; a < atoms; ++a) {
      ConceptId p = "P" + std::to_string(a);
      Signature sig;
      sig.subject = entity(a == 0 || rng() % 2);
      if (rng() % 3) sig.object = entity(rng() % 2);
      q.graph.set_signature(p, sig);
      q.graph.add_type(p, "r" + std::to_string(rng() % 8));
      if (rng() % 12 == 0) q.graph.features(p).truth = Truth::negative;
      q.variables.insert(p);
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace cgchat::synthetic
