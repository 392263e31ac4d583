#include "cgchat/inference.hpp"

#include "cgchat/compiler.hpp"

namespace cgchat {

ConceptGraph instantiate(const Rule& r, const Solution& s, IdGen& ids) {
  const ConceptGraph& post = r.postcondition;
  std::map<ConceptId, ConceptId> sub;
  for (const auto& [c, f] : post.nodes()) {
    if (r.precondition.variables.count(c)) {
      auto it = s.bindings.find(c);
      if (it == s.bindings.end())
        throw UnboundVariable("rule '" + r.name + "' has no binding for '" + c + "'");
      sub[c] = it->second;
    } else if (r.locals.count(c)) {
      const auto& parents = post.parents(c);
      sub[c] = ids.fresh(parents.empty() ? c : *parents.begin());
    } else {
      sub[c] = c;
    }
  }
  ConceptGraph out;
  for (const auto& [c, f] : post.nodes()) {
    const auto& id = sub.at(c);
    out.add_concept(id);
    auto& nf = out.features(id);
    nf.truth = f.truth;
    nf.tense = f.tense;
  }
  for (const auto& [p, sig] : post.predicates()) {
    Signature ns;
    if (sig.subject) ns.subject = sub.at(*sig.subject);
    if (sig.object) ns.object = sub.at(*sig.object);
    out.set_signature(sub.at(p), ns);
  }
  for (const auto& [c, ps] : post.ontology())
    for (const auto& t : ps) out.add_type(sub.at(c), sub.at(t));
  return out;
}

namespace {

std::vector<Firing> run(ConceptGraph& data, std::set<FiredKey>& fired,
                        const std::vector<const Rule*>& rules, int passes, IdGen& ids,
                        int threads) {
  std::vector<Firing> out;
  std::vector<const QueryGraph*> queries;
  for (const Rule* r : rules) queries.push_back(&r->precondition);
  for (int pass = 0; pass < passes; ++pass) {
    auto results = match_all(std::span<const QueryGraph* const>(queries), data, threads);
    ConceptGraph produced;
    bool any = false;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      for (const auto& sol : results[i]) {
        FiredKey key{rules[i]->name, sol.bindings};
        if (fired.count(key)) continue;
        fired.insert(key);
        Firing f{rules[i]->name, sol, instantiate(*rules[i], sol, ids), pass};
        produced.union_with(f.produced);
        out.push_back(std::move(f));
        any = true;
      }
    }
    if (!any) break;
    data.union_with(produced);
  }
  return out;
}

}  // namespace

std::vector<Firing> apply_rules(WorkingMemory& wm, const std::vector<const Rule*>& rules,
                                int passes, IdGen& ids, int threads) {
  return run(wm.graph, wm.fired, rules, passes, ids, threads);
}

std::vector<Firing> infer(ConceptGraph& data, const std::vector<const Rule*>& rules, int passes,
                          IdGen& ids, int threads) {
  std::set<FiredKey> fired;
  return run(data, fired, rules, passes, ids, threads);
}

std::string format_firings(const std::vector<Firing>& trace) {
  std::string out;
  for (const auto& f : trace)
    out += "# pass " + std::to_string(f.pass) + " " + f.rule + " " + format_solution(f.solution) +
           "\n" + serialize(f.produced);
  return out;
}

}  // namespace cgchat
