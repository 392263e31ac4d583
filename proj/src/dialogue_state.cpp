#include "cgchat/dialogue_state.hpp"

#include <algorithm>
#include <tuple>

namespace cgchat {

std::string FiredKey::str() const {
  std::string out = rule + "|";
  for (const auto& [k, v] : bindings) out += k + "=" + v + ";";
  return out;
}

void mention(WorkingMemory& wm, const ConceptId& c, const SalienceConfig& cfg) {
  auto& f = wm.graph.features(c);
  f.salience = cfg.mention_value;
  f.last_mention = wm.turn;
}

namespace {

bool is_request(const ConceptGraph& g, const ConceptId& p) {
  return g.has_type(p, "request") || g.has_type(p, "request_truth");
}

}  // namespace

void ingest_turn(WorkingMemory& wm, const ConceptGraph& utterance, const SalienceConfig& cfg) {
  ConceptGraph next = wm.graph;
  next.union_with(utterance);
  wm.graph = std::move(next);
  ++wm.turn;
  for (const auto& [c, f] : utterance.nodes()) {
    if (utterance.is_type(c)) continue;
    mention(wm, c, cfg);
    if (utterance.is_predicate(c) && is_request(wm.graph, c) && !wm.graph.features(c).covered)
      wm.graph.features(c).pinned = true;
  }
}

// ---------------------------------------------------------------------------
// Retrieval

KbIndex::KbIndex(const ConceptGraph& kb) : kb_(&kb) {
  for (const auto& [p, sig] : kb.predicates()) {
    if (sig.subject) by_arg_[*sig.subject].push_back(p);
    if (sig.object && sig.object != sig.subject) by_arg_[*sig.object].push_back(p);
  }
}

const std::vector<ConceptId>& KbIndex::predicates_of(const ConceptId& c) const {
  static const std::vector<ConceptId> none;
  auto it = by_arg_.find(c);
  return it == by_arg_.end() ? none : it->second;
}

std::set<ConceptId> retrieve_knowledge(WorkingMemory& wm, const KbIndex& index,
                                       const SalienceConfig& cfg) {
  const ConceptGraph& kb = index.kb();
  ConceptGraph add;
  std::set<ConceptId> frontier;
  for (const auto& [c, f] : wm.graph.nodes())
    if (f.salience >= cfg.retrieval_threshold) frontier.insert(c);

  for (int hop = 0; hop < cfg.retrieval_hops && !frontier.empty(); ++hop) {
    std::set<ConceptId> next;
    for (const auto& c : frontier) {
      for (const auto& p : index.predicates_of(c)) {
        if (wm.graph.contains(p) || add.contains(p)) continue;
        const auto& sig = kb.signature(p);
        add.set_signature(p, sig);
        add.features(p).truth = kb.features(p).truth;
        if (kb.features(p).tense) add.features(p).tense = kb.features(p).tense;
        for (const auto& t : kb.parents(p)) add.add_type(p, t);
        next.insert(p);
        if (sig.subject) next.insert(*sig.subject);
        if (sig.object) next.insert(*sig.object);
      }
    }
    frontier = std::move(next);
  }

  // Type ancestry, so typed queries see the full hierarchy.
  std::vector<ConceptId> todo;
  for (const auto& [c, f] : wm.graph.nodes()) todo.push_back(c);
  for (const auto& [c, f] : add.nodes()) todo.push_back(c);
  std::set<ConceptId> seen;
  while (!todo.empty()) {
    ConceptId c = std::move(todo.back());
    todo.pop_back();
    if (!seen.insert(c).second || !kb.contains(c)) continue;
    for (const auto& t : kb.parents(c)) {
      if (!wm.graph.contains(c) || !wm.graph.parents(c).count(t)) add.add_type(c, t);
      todo.push_back(t);
    }
  }

  std::set<ConceptId> added;
  for (const auto& [c, f] : add.nodes())
    if (!wm.graph.contains(c)) added.insert(c);
  wm.graph.union_with(add);
  return added;
}

// ---------------------------------------------------------------------------
// References

void rename_in_fired(WorkingMemory& wm, const ConceptId& keep, const ConceptId& drop) {
  std::set<FiredKey> out;
  for (auto k : wm.fired) {
    for (auto& [var, val] : k.bindings)
      if (val == drop) val = keep;
    out.insert(std::move(k));
  }
  wm.fired = std::move(out);
}

std::vector<Resolution> resolve_references(WorkingMemory& wm) {
  std::vector<Resolution> out;
  auto structure = [&] {
    std::map<ConceptId, std::vector<ConceptId>> by_focus;
    for (const auto& [p, sig] : wm.graph.predicates())
      if (sig.subject && (wm.graph.has_type(p, "ref") || wm.graph.has_type(p, "var")))
        by_focus[*sig.subject].push_back(p);
    return by_focus;
  };
  auto initial = structure();
  std::vector<ConceptId> foci;
  for (const auto& [f, ps] : initial) foci.push_back(f);

  for (const auto& focus_id : foci) {
    auto current = structure();
    auto it = current.find(focus_id);
    if (it == current.end()) continue;
    const ConceptGraph& g = wm.graph;

    QueryGraph q;
    q.name = "ref:" + focus_id;
    auto add_var = [&](const ConceptId& v) {
      q.graph.add_concept(v);
      q.variables.insert(v);
      for (const auto& t : g.parents(v)) q.graph.add_type(v, t);
    };
    add_var(focus_id);
    std::vector<ConceptId> constraints;
    for (const auto& p : it->second) {
      const auto& sig = g.signature(p);
      if (!sig.object) continue;
      if (g.has_type(p, "var"))
        add_var(*sig.object);
      else
        constraints.push_back(*sig.object);
    }
    for (const auto& c : constraints) {
      if (!g.is_predicate(c)) {
        add_var(c);
        continue;
      }
      add_var(c);
      const auto& sig = g.signature(c);
      for (const auto& a : {sig.subject, sig.object})
        if (a && !q.graph.contains(*a)) q.graph.add_concept(*a);
      q.graph.set_signature(c, sig);
      q.graph.features(c).truth = g.features(c).truth;
    }

    ConceptGraph data = g;
    std::set<ConceptId> foci_now;
    for (const auto& [f, ps] : current) {
      foci_now.insert(f);
      for (const auto& p : ps)
        if (data.contains(p)) data.remove_concept(p);
    }
    const ConceptId* best = nullptr;
    SolutionSet sols;
    try {
      sols = match(q, data);
    } catch (const std::invalid_argument&) {
      continue;  // a type concept cannot be a reference focus
    }
    for (const auto& s : sols) {
      const ConceptId& r = s.bindings.at(focus_id);
      if (foci_now.count(r)) continue;
      if (!best) {
        best = &r;
        continue;
      }
      const auto& a = g.features(r);
      const auto& b = g.features(*best);
      if (std::tie(a.salience, a.last_mention) > std::tie(b.salience, b.last_mention) ||
          (a.salience == b.salience && a.last_mention == b.last_mention && r < *best))
        best = &r;
    }
    if (!best) continue;
    ConceptId referent = *best;
    ConceptGraph next = g;
    for (const auto& p : it->second) next.remove_concept(p);
    next.merge_concepts(referent, focus_id);
    wm.graph = std::move(next);
    rename_in_fired(wm, referent, focus_id);
    out.push_back({focus_id, referent});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Salience

void decay_salience(WorkingMemory& wm, const SalienceConfig& cfg) {
  for (const auto& [c, f] : wm.graph.nodes()) {
    auto& s = wm.graph.features(c).salience;
    s = std::max(0.0, s - cfg.turn_decay);
  }
}

void propagate_salience(WorkingMemory& wm, const SalienceConfig& cfg) {
  std::map<ConceptId, std::vector<ConceptId>> nbr;
  for (const auto& [p, sig] : wm.graph.predicates())
    for (const auto& a : {sig.subject, sig.object})
      if (a && *a != p) {
        nbr[p].push_back(*a);
        nbr[*a].push_back(p);
      }
  // Every pass only raises values and each value is bounded, so this
  // reaches the fixpoint within |C| passes.
  const std::size_t limit = cfg.propagate_to_fixpoint ? wm.graph.size() + 1 : 1;
  for (std::size_t pass = 0; pass < limit; ++pass) {
    std::map<ConceptId, double> next;
    for (const auto& [c, ns] : nbr) {
      double best = 0.0;
      for (const auto& n : ns) best = std::max(best, wm.graph.features(n).salience);
      double cand = best - cfg.propagation_delta;
      if (cand > wm.graph.features(c).salience) next[c] = cand;
    }
    if (next.empty()) break;
    for (const auto& [c, s] : next) wm.graph.features(c).salience = s;
  }
}

void update_salience(WorkingMemory& wm, const SalienceConfig& cfg) {
  decay_salience(wm, cfg);
  propagate_salience(wm, cfg);
}

// ---------------------------------------------------------------------------
// Pruning

bool is_protected(const WorkingMemory& wm, const ConceptId& c) {
  return wm.pinned.count(c) || wm.graph.features(c).pinned || wm.graph.is_type(c);
}

std::size_t unprotected_count(const WorkingMemory& wm) {
  std::size_t n = 0;
  for (const auto& [c, f] : wm.graph.nodes())
    if (!is_protected(wm, c)) ++n;
  return n;
}

std::set<ConceptId> prune(WorkingMemory& wm, const SalienceConfig& cfg) {
  std::set<ConceptId> removed;
  const std::size_t cap = static_cast<std::size_t>(cfg.cap);
  for (;;) {
    std::vector<ConceptId> open;
    for (const auto& [c, f] : wm.graph.nodes())
      if (!is_protected(wm, c)) open.push_back(c);
    if (open.size() <= cap) break;
    const auto& g = wm.graph;
    std::sort(open.begin(), open.end(), [&](const ConceptId& a, const ConceptId& b) {
      const auto& fa = g.features(a);
      const auto& fb = g.features(b);
      if (fa.salience != fb.salience) return fa.salience > fb.salience;
      if (fa.last_mention != fb.last_mention) return fa.last_mention > fb.last_mention;
      return a < b;
    });
    for (std::size_t i = cap; i < open.size(); ++i) {
      if (!wm.graph.contains(open[i])) continue;
      auto gone = wm.graph.remove_concept(open[i]);
      removed.insert(gone.begin(), gone.end());
    }
  }
  return removed;
}

std::vector<std::pair<ConceptId, ConceptId>> detect_contradictions(const WorkingMemory& wm) {
  using Shape = std::tuple<std::set<ConceptId>, std::optional<ConceptId>, std::optional<ConceptId>>;
  std::map<Shape, std::vector<ConceptId>> groups;
  for (const auto& [p, sig] : wm.graph.predicates())
    groups[{wm.graph.parents(p), sig.subject, sig.object}].push_back(p);
  std::vector<std::pair<ConceptId, ConceptId>> out;
  for (const auto& [shape, ps] : groups)
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        if (wm.graph.features(ps[i]).truth != wm.graph.features(ps[j]).truth)
          out.emplace_back(std::min(ps[i], ps[j]), std::max(ps[i], ps[j]));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cgchat
