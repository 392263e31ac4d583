#pragma once

#include <map>
#include <set>
#include <vector>

#include "cgchat/concept_graph.hpp"

namespace testsupport {

using cgchat::ConceptId;
using cgchat::EdgeLabel;
using cgchat::LabeledGraphView;

/// Backtracking search for a bijection between the node sets of two
/// labeled graphs that maps the edge sets exactly. Nodes listed in
/// `fixed` must map to themselves.
inline bool isomorphic(const LabeledGraphView& a, const LabeledGraphView& b,
                       const std::set<ConceptId>& fixed = {}) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  using Sig = std::map<std::pair<int, int>, int>;  // (direction, label) -> count
  auto signature = [](const LabeledGraphView& g) {
    std::map<ConceptId, Sig> s;
    for (const auto& n : g.nodes) s[n];
    for (const auto& e : g.edges) {
      ++s[e.from][{0, static_cast<int>(e.label)}];
      ++s[e.to][{1, static_cast<int>(e.label)}];
    }
    return s;
  };
  auto sa = signature(a), sb = signature(b);
  std::vector<ConceptId> order(a.nodes.begin(), a.nodes.end());
  std::map<ConceptId, ConceptId> fwd, back;

  auto consistent = [&](const ConceptId& x) {
    for (const auto& e : a.edges) {
      if (e.from != x && e.to != x) continue;
      auto f = fwd.find(e.from), t = fwd.find(e.to);
      if (f == fwd.end() || t == fwd.end()) continue;
      if (!b.edges.count({f->second, t->second, e.label})) return false;
    }
    return true;
  };
  auto search = [&](auto&& self, std::size_t i) -> bool {
    if (i == order.size()) return true;
    const auto& x = order[i];
    std::vector<ConceptId> candidates;
    if (fixed.count(x)) {
      if (b.nodes.count(x)) candidates.push_back(x);
    } else {
      for (const auto& y : b.nodes)
        if (!fixed.count(y)) candidates.push_back(y);
    }
    for (const auto& y : candidates) {
      if (back.count(y) || sa[x] != sb[y]) continue;
      fwd[x] = y;
      back[y] = x;
      if (consistent(x) && self(self, i + 1)) return true;
      fwd.erase(x);
      back.erase(y);
    }
    return false;
  };
  return search(search, 0);
}

}  // namespace testsupport
