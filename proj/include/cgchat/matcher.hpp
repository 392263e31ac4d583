#pragma once

#include <compare>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgchat/concept_graph.hpp"

namespace cgchat {

/// A rule precondition: a Concept Graph in which `variables` may be replaced
/// by data concepts. Truth requirements are the truth features of the
/// query's predicates. Type concepts must be constants.
struct QueryGraph {
  std::string name;
  ConceptGraph graph;
  std::set<ConceptId> variables;
  std::vector<std::pair<ConceptId, ConceptId>> distinct;
};

struct Solution {
  std::map<ConceptId, ConceptId> bindings;

  auto operator<=>(const Solution&) const = default;
  bool operator==(const Solution&) const = default;
};

/// Sorted, duplicate free.
using SolutionSet = std::vector<Solution>;

/// "X=fido Y=t1", sorted by variable.
std::string format_solution(const Solution& s);

/// Integer-indexed read-only snapshot of a data graph: ancestor closures,
/// per-type instance lists, and argument adjacency. Safe to share between
/// threads.
class DataIndex {
 public:
  explicit DataIndex(const ConceptGraph& g);

  const ConceptGraph& graph() const { return *graph_; }
  int size() const { return static_cast<int>(names_.size()); }
  int find(const ConceptId& c) const;
  const ConceptId& name(int i) const { return names_[i]; }

  bool has_type(int c, int t) const;
  const std::vector<int>& instances(int t) const { return instances_[t]; }
  bool is_predicate(int c) const { return is_pred_[c] != 0; }
  int subject(int p) const { return subject_[p]; }
  int object(int p) const { return object_[p]; }
  Truth truth(int c) const { return truth_[c]; }
  const std::vector<int>& preds_with_subject(int c) const {
    return by_subject_[c];
  }
  const std::vector<int>& preds_with_object(int c) const {
    return by_object_[c];
  }
  const std::vector<int>& all() const { return all_; }
  const std::vector<int>& all_predicates() const { return all_preds_; }

 private:
  const ConceptGraph* graph_;
  std::vector<ConceptId> names_;
  std::unordered_map<ConceptId, int> ids_;
  std::vector<std::vector<int>> ancestors_;  // sorted
  std::vector<std::vector<int>> instances_;  // sorted descendants
  std::vector<char> is_pred_;
  std::vector<int> subject_;
  std::vector<int> object_;
  std::vector<Truth> truth_;
  std::vector<std::vector<int>> by_subject_;
  std::vector<std::vector<int>> by_object_;
  std::vector<int> all_;
  std::vector<int> all_preds_;
};

/// All solutions of `query` against `data`. `seed` pre-binds variables.
SolutionSet match(const QueryGraph& query, const DataIndex& data,
                  const Solution& seed = {});
SolutionSet match(const QueryGraph& query, const ConceptGraph& data,
                  const Solution& seed = {});

/// Evaluates every query against one shared snapshot, one task per query.
/// `threads <= 0` uses the OpenMP default. Output is aligned with input.
std::vector<SolutionSet> match_all(std::span<const QueryGraph* const> queries,
                                   const ConceptGraph& data, int threads = 0);
std::vector<SolutionSet> match_all(const std::vector<QueryGraph>& queries,
                                   const ConceptGraph& data, int threads = 0);

/// Serial reference for match_all.
std::vector<SolutionSet> match_all_serial(
    std::span<const QueryGraph* const> queries, const ConceptGraph& data);

}  // namespace cgchat
