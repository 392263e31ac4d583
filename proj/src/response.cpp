#include "cgchat/response.hpp"

#include <algorithm>

namespace cgchat {

double score(Priority p, double mean_salience) {
  return 0.75 * rating(p) + 0.25 * mean_salience;
}

std::vector<Candidate> identify_candidates(const WorkingMemory& wm,
                                           const std::vector<const Rule*>& rules,
                                           int threads) {
  std::vector<const QueryGraph*> queries;
  for (const Rule* r : rules) queries.push_back(&r->precondition);
  auto results = match_all(std::span<const QueryGraph* const>(queries), wm.graph, threads);

  std::vector<Candidate> out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const Rule* r = rules[i];
    for (const auto& sol : results[i]) {
      Candidate c{r, sol, {}, 0.0, 0.0};
      if (!r->repeatable && wm.fired.count(c.key())) continue;
      for (const auto& [p, sig] : r->precondition.graph.predicates()) {
        auto it = sol.bindings.find(p);
        c.d_set.push_back(it == sol.bindings.end() ? p : it->second);
      }
      std::sort(c.d_set.begin(), c.d_set.end());
      c.d_set.erase(std::unique(c.d_set.begin(), c.d_set.end()), c.d_set.end());
      if (!c.d_set.empty() &&
          std::all_of(c.d_set.begin(), c.d_set.end(),
                      [&](const ConceptId& p) { return wm.graph.features(p).covered; }))
        continue;
      double sum = 0.0;
      for (const auto& p : c.d_set) sum += wm.graph.features(p).salience;
      c.mean_salience = c.d_set.empty() ? 0.0 : sum / static_cast<double>(c.d_set.size());
      c.score = score(c.priority(), c.mean_salience);
      out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (rating(a.priority()) != rating(b.priority())) return rating(a.priority()) > rating(b.priority());
  if (a.mean_salience != b.mean_salience) return a.mean_salience > b.mean_salience;
  if (a.rule->name != b.rule->name) return a.rule->name < b.rule->name;
  return a.solution.bindings < b.solution.bindings;
}

Selection select_compound(const std::vector<Candidate>& cands) {
  Selection s;
  for (const auto& c : cands) {
    auto& slot = c.rtype() == RuleKind::reaction ? s.reaction : s.presentation;
    if (!slot || ranks_before(c, *slot)) slot = c;
  }
  if (!s.reaction && !s.presentation) throw NoCandidate("no response candidate");
  return s;
}

void commit_selection(WorkingMemory& wm, const Selection& s) {
  for (const auto* c : {&s.reaction, &s.presentation}) {
    if (!*c) continue;
    for (const auto& p : (*c)->d_set) {
      auto& f = wm.graph.features(p);
      f.covered = true;
      f.pinned = false;
    }
    if (!(*c)->rule->repeatable) wm.fired.insert((*c)->key());
  }
}

}  // namespace cgchat
