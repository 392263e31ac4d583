#include "cgchat/concept_graph.hpp"

#include <algorithm>
#include <deque>

namespace cgchat {

namespace {

const std::set<ConceptId> kEmptySet;

void erase_edge(std::map<ConceptId, std::set<ConceptId>>& adj,
                const ConceptId& from, const ConceptId& to) {
  auto it = adj.find(from);
  if (it == adj.end()) return;
  it->second.erase(to);
  if (it->second.empty()) adj.erase(it);
}

void merge_features(Features& into, const Features& from, bool take_truth) {
  into.salience = std::max(into.salience, from.salience);
  into.pinned = into.pinned || from.pinned;
  into.covered = into.covered || from.covered;
  into.last_mention = std::max(into.last_mention, from.last_mention);
  if (take_truth) into.truth = from.truth;
  if (from.tense) into.tense = from.tense;
}

}  // namespace

const char* to_string(EdgeLabel l) {
  switch (l) {
    case EdgeLabel::ARG0:
      return "ARG0";
    case EdgeLabel::ARG1:
      return "ARG1";
    case EdgeLabel::T:
      return "T";
  }
  return "T";
}

bool ConceptGraph::is_type(const ConceptId& c) const {
  return children_.count(c) != 0;
}

void ConceptGraph::add_concept(const ConceptId& c) { nodes_.try_emplace(c); }

void ConceptGraph::add_predicate(const ConceptId& pred, const ConceptId& ptype,
                                 std::optional<ConceptId> subject,
                                 std::optional<ConceptId> object) {
  if (preds_.count(pred))
    throw RedefinitionError("predicate '" + pred + "' already has a signature");
  if (pred == ptype || reaches(ptype, pred))
    throw CycleError("typing '" + pred + "' as '" + ptype +
                     "' would create an ontology cycle");
  add_concept(pred);
  add_concept(ptype);
  if (subject) add_concept(*subject);
  if (object) add_concept(*object);
  preds_[pred] = Signature{std::move(subject), std::move(object)};
  parents_[pred].insert(ptype);
  children_[ptype].insert(pred);
}

void ConceptGraph::set_signature(const ConceptId& pred, Signature sig) {
  add_concept(pred);
  if (sig.subject) add_concept(*sig.subject);
  if (sig.object) add_concept(*sig.object);
  preds_[pred] = std::move(sig);
}

void ConceptGraph::add_type(const ConceptId& child, const ConceptId& parent) {
  if (child == parent || reaches(parent, child))
    throw CycleError("edge " + child + " -> " + parent +
                     " would create an ontology cycle");
  add_concept(child);
  add_concept(parent);
  parents_[child].insert(parent);
  children_[parent].insert(child);
}

void ConceptGraph::remove_type(const ConceptId& child, const ConceptId& parent) {
  erase_edge(parents_, child, parent);
  erase_edge(children_, parent, child);
}

bool ConceptGraph::reaches(const ConceptId& from, const ConceptId& to) const {
  if (from == to) return true;
  std::set<ConceptId> seen{from};
  std::deque<ConceptId> work{from};
  while (!work.empty()) {
    ConceptId c = std::move(work.front());
    work.pop_front();
    for (const auto& p : parents(c)) {
      if (p == to) return true;
      if (seen.insert(p).second) work.push_back(p);
    }
  }
  return false;
}

std::set<ConceptId> ConceptGraph::tau(const ConceptId& c) const {
  if (!contains(c)) throw UnknownConcept("unknown concept '" + c + "'");
  std::set<ConceptId> out;
  std::deque<ConceptId> work{c};
  while (!work.empty()) {
    ConceptId cur = std::move(work.front());
    work.pop_front();
    for (const auto& p : parents(cur))
      if (out.insert(p).second) work.push_back(p);
  }
  return out;
}

bool ConceptGraph::has_type(const ConceptId& c, const ConceptId& t) const {
  return c != t && contains(c) && reaches(c, t);
}

const std::set<ConceptId>& ConceptGraph::parents(const ConceptId& c) const {
  auto it = parents_.find(c);
  return it == parents_.end() ? kEmptySet : it->second;
}

const std::set<ConceptId>& ConceptGraph::children(const ConceptId& c) const {
  auto it = children_.find(c);
  return it == children_.end() ? kEmptySet : it->second;
}

const Signature& ConceptGraph::signature(const ConceptId& pred) const {
  auto it = preds_.find(pred);
  if (it == preds_.end())
    throw UnknownConcept("'" + pred + "' is not a predicate");
  return it->second;
}

const Signature* ConceptGraph::find_signature(const ConceptId& pred) const {
  auto it = preds_.find(pred);
  return it == preds_.end() ? nullptr : &it->second;
}

Features& ConceptGraph::features(const ConceptId& c) {
  auto it = nodes_.find(c);
  if (it == nodes_.end()) throw UnknownConcept("unknown concept '" + c + "'");
  return it->second;
}

const Features& ConceptGraph::features(const ConceptId& c) const {
  auto it = nodes_.find(c);
  if (it == nodes_.end()) throw UnknownConcept("unknown concept '" + c + "'");
  return it->second;
}

std::size_t ConceptGraph::ontology_edge_count() const {
  std::size_t n = 0;
  for (const auto& [c, ps] : parents_) n += ps.size();
  return n;
}

std::set<ConceptId> ConceptGraph::remove_concept(const ConceptId& c) {
  std::set<ConceptId> removed;
  if (!contains(c)) return removed;
  std::deque<ConceptId> work{c};
  while (!work.empty()) {
    ConceptId cur = std::move(work.front());
    work.pop_front();
    if (!removed.insert(cur).second) continue;
    for (const auto& p : std::set<ConceptId>(parents(cur))) remove_type(cur, p);
    for (const auto& ch : std::set<ConceptId>(children(cur)))
      remove_type(ch, cur);
    preds_.erase(cur);
    nodes_.erase(cur);
    for (const auto& [p, sig] : preds_) {
      if ((sig.subject && *sig.subject == cur) ||
          (sig.object && *sig.object == cur))
        work.push_back(p);
    }
  }
  return removed;
}

void ConceptGraph::check_acyclic() const {
  // Kahn's algorithm over child -> parent edges.
  std::map<ConceptId, std::size_t> indeg;
  for (const auto& [c, f] : nodes_) indeg[c] = 0;
  for (const auto& [c, ps] : parents_)
    for (const auto& p : ps) ++indeg[p];
  std::deque<ConceptId> work;
  for (const auto& [c, d] : indeg)
    if (d == 0) work.push_back(c);
  std::size_t visited = 0;
  while (!work.empty()) {
    ConceptId c = std::move(work.front());
    work.pop_front();
    ++visited;
    for (const auto& p : parents(c))
      if (--indeg[p] == 0) work.push_back(p);
  }
  if (visited != indeg.size()) throw CycleError("ontology contains a cycle");
}

void ConceptGraph::union_with(const ConceptGraph& other) {
  ConceptGraph out = *this;
  for (const auto& [c, f] : other.nodes_) {
    auto [it, inserted] = out.nodes_.try_emplace(c, f);
    if (!inserted) merge_features(it->second, f, other.is_predicate(c));
  }
  for (const auto& [p, sig] : other.preds_) {
    auto [it, inserted] = out.preds_.try_emplace(p, sig);
    if (!inserted && !(it->second == sig))
      throw SignatureConflict("predicate '" + p +
                              "' carries different argument tuples");
  }
  for (const auto& [c, ps] : other.parents_)
    for (const auto& p : ps) {
      out.parents_[c].insert(p);
      out.children_[p].insert(c);
    }
  out.check_acyclic();
  *this = std::move(out);
}

void ConceptGraph::merge_concepts(const ConceptId& keep, const ConceptId& drop) {
  if (!contains(keep)) throw UnknownConcept("unknown concept '" + keep + "'");
  if (!contains(drop)) throw UnknownConcept("unknown concept '" + drop + "'");
  if (keep == drop) return;

  ConceptGraph out;
  auto sub = [&](const ConceptId& c) -> const ConceptId& {
    return c == drop ? keep : c;
  };
  auto sub_opt = [&](const std::optional<ConceptId>& c) {
    return c ? std::optional<ConceptId>(sub(*c)) : std::nullopt;
  };

  for (const auto& [c, f] : nodes_)
    if (c != drop) out.nodes_.emplace(c, f);
  merge_features(out.nodes_.at(keep), nodes_.at(drop), false);

  for (const auto& [p, sig] : preds_) {
    Signature s{sub_opt(sig.subject), sub_opt(sig.object)};
    const ConceptId& target = sub(p);
    auto [it, inserted] = out.preds_.try_emplace(target, s);
    if (!inserted && !(it->second == s))
      throw SignatureConflict("merging '" + drop + "' into '" + keep +
                              "' yields conflicting signatures");
  }
  for (const auto& [c, ps] : parents_)
    for (const auto& p : ps) {
      const ConceptId& from = sub(c);
      const ConceptId& to = sub(p);
      if (from == to)
        throw CycleError("merging '" + drop + "' into '" + keep +
                         "' creates a self-typed concept");
      out.parents_[from].insert(to);
      out.children_[to].insert(from);
    }
  out.check_acyclic();
  *this = std::move(out);
}

LabeledGraphView ConceptGraph::view() const {
  LabeledGraphView v;
  for (const auto& [c, f] : nodes_) {
    v.nodes.insert(c);
    for (const auto& t : tau(c)) v.edges.insert({c, t, EdgeLabel::T});
  }
  for (const auto& [p, sig] : preds_) {
    if (sig.subject) v.edges.insert({p, *sig.subject, EdgeLabel::ARG0});
    if (sig.object) v.edges.insert({p, *sig.object, EdgeLabel::ARG1});
  }
  return v;
}

ConceptGraph ConceptGraph::from_view(const LabeledGraphView& v) {
  ConceptGraph g;
  for (const auto& n : v.nodes) g.add_concept(n);
  std::map<ConceptId, Signature> sigs;
  for (const auto& e : v.edges) {
    switch (e.label) {
      case EdgeLabel::ARG0:
        sigs[e.from].subject = e.to;
        break;
      case EdgeLabel::ARG1:
        sigs[e.from].object = e.to;
        break;
      case EdgeLabel::T:
        g.add_concept(e.from);
        g.add_concept(e.to);
        g.parents_[e.from].insert(e.to);
        g.children_[e.to].insert(e.from);
        break;
    }
  }
  for (auto& [p, s] : sigs) g.set_signature(p, std::move(s));
  g.check_acyclic();
  return g;
}

bool ConceptGraph::same_structure(const ConceptGraph& other) const {
  if (preds_ != other.preds_ || parents_ != other.parents_) return false;
  if (nodes_.size() != other.nodes_.size()) return false;
  for (auto a = nodes_.begin(), b = other.nodes_.begin(); a != nodes_.end();
       ++a, ++b) {
    if (a->first != b->first) return false;
    if (is_predicate(a->first) && a->second.truth != b->second.truth)
      return false;
    if (a->second.tense != b->second.tense) return false;
  }
  return true;
}

ConceptGraph graph_union(const ConceptGraph& a, const ConceptGraph& b) {
  ConceptGraph out = a;
  out.union_with(b);
  return out;
}

}  // namespace cgchat
