#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgchat/dialogue_state.hpp"
#include "cgchat/rules.hpp"

namespace cgchat {

class NoCandidate : public Error {
 public:
  using Error::Error;
};

struct Candidate {
  const Rule* rule = nullptr;
  Solution solution;
  std::vector<ConceptId> d_set;  // WM predicates the precondition matched
  double mean_salience = 0.0;
  double score = 0.0;

  RuleKind rtype() const { return rule->kind; }
  Priority priority() const { return *rule->priority; }
  FiredKey key() const { return {rule->name, solution.bindings}; }
};

/// 0.75 * rating + 0.25 * mean salience.
double score(Priority p, double mean_salience);

/// One candidate per solution of each response rule, minus those whose
/// d_set is entirely covered or whose key already fired. Sorted best first.
std::vector<Candidate> identify_candidates(const WorkingMemory& wm,
                                           const std::vector<const Rule*>& rules,
                                           int threads = 0);

/// Strict ranking: score, rating, mean salience, rule name, bindings.
bool ranks_before(const Candidate& a, const Candidate& b);

struct Selection {
  std::optional<Candidate> reaction;
  std::optional<Candidate> presentation;
};

/// Best reaction and best presentation, chosen independently. Throws
/// NoCandidate when both pools are empty.
Selection select_compound(const std::vector<Candidate>& cands);

/// Marks d_sets covered, releases pinned requests they answer, records
/// fired keys.
void commit_selection(WorkingMemory& wm, const Selection& s);

}  // namespace cgchat
