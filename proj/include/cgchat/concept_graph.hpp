#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cgchat/common.hpp"

namespace cgchat {

/// Argument structure of a predicate instance. An empty optional is either
/// the null argument of a unary predicate or a slot not yet filled by NLU;
/// both match anything when they appear in a query.
struct Signature {
  std::optional<ConceptId> subject;
  std::optional<ConceptId> object;

  bool operator==(const Signature&) const = default;
};

/// Per-concept dialogue features.
struct Features {
  double salience = 0.0;
  Truth truth = Truth::positive;
  bool pinned = false;
  bool covered = false;
  std::optional<Tense> tense;
  int last_mention = -1;  // turn index of the latest verbalization

  bool operator==(const Features&) const = default;
};

enum class EdgeLabel { ARG0, ARG1, T };
const char* to_string(EdgeLabel l);

struct LabeledEdge {
  ConceptId from;
  ConceptId to;
  EdgeLabel label;

  auto operator<=>(const LabeledEdge&) const = default;
};

struct LabeledGraphView {
  std::set<ConceptId> nodes;
  std::set<LabeledEdge> edges;

  bool operator==(const LabeledGraphView&) const = default;
};

/// A Concept Graph: concepts, predicate signatures over a subset of them,
/// and an acyclic type ontology (child -> parent edges).
class ConceptGraph {
 public:
  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  bool contains(const ConceptId& c) const { return nodes_.count(c) != 0; }
  bool is_predicate(const ConceptId& c) const { return preds_.count(c) != 0; }

  /// Member of T: has at least one child in the ontology.
  bool is_type(const ConceptId& c) const;

  void add_concept(const ConceptId& c);

  /// Adds `pred` as an instance of `ptype` with the given arguments. Either
  /// argument may be empty (null / unfilled).
  void add_predicate(const ConceptId& pred, const ConceptId& ptype,
                     std::optional<ConceptId> subject,
                     std::optional<ConceptId> object);

  /// Sets or replaces a predicate signature without touching the ontology.
  void set_signature(const ConceptId& pred, Signature sig);

  /// Adds ontology edge child -> parent. Throws CycleError and leaves the
  /// graph unchanged if the edge would close a cycle.
  void add_type(const ConceptId& child, const ConceptId& parent);
  void remove_type(const ConceptId& child, const ConceptId& parent);

  /// All ancestors of `c`, excluding `c`.
  std::set<ConceptId> tau(const ConceptId& c) const;
  bool has_type(const ConceptId& c, const ConceptId& t) const;

  const std::set<ConceptId>& parents(const ConceptId& c) const;
  const std::set<ConceptId>& children(const ConceptId& c) const;

  const Signature& signature(const ConceptId& pred) const;
  const Signature* find_signature(const ConceptId& pred) const;

  Features& features(const ConceptId& c);
  const Features& features(const ConceptId& c) const;

  const std::map<ConceptId, Features>& nodes() const { return nodes_; }
  const std::map<ConceptId, Signature>& predicates() const { return preds_; }
  const std::map<ConceptId, std::set<ConceptId>>& ontology() const {
    return parents_;
  }
  std::size_t ontology_edge_count() const;

  /// Removes `c`, its ontology edges, and (transitively) every predicate
  /// that uses a removed concept as an argument. Returns removed ids.
  std::set<ConceptId> remove_concept(const ConceptId& c);

  /// Set union with feature merge: max salience, OR of pinned/covered,
  /// truth and tense of `other` win for predicates `other` defines.
  void union_with(const ConceptGraph& other);

  /// Rewrites every occurrence of `drop` to `keep` and removes `drop`.
  void merge_concepts(const ConceptId& keep, const ConceptId& drop);

  LabeledGraphView view() const;
  static ConceptGraph from_view(const LabeledGraphView& v);

  /// Structure plus truth/tense; salience and bookkeeping flags ignored.
  bool same_structure(const ConceptGraph& other) const;

  bool operator==(const ConceptGraph&) const = default;

 private:
  bool reaches(const ConceptId& from, const ConceptId& to) const;
  void check_acyclic() const;

  std::map<ConceptId, Features> nodes_;
  std::map<ConceptId, Signature> preds_;
  std::map<ConceptId, std::set<ConceptId>> parents_;
  std::map<ConceptId, std::set<ConceptId>> children_;
};

ConceptGraph graph_union(const ConceptGraph& a, const ConceptGraph& b);

}  // namespace cgchat
