#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cgchat/concept_graph.hpp"
#include "cgchat/config.hpp"
#include "cgchat/matcher.hpp"

namespace cgchat {

/// (rule, bindings) identity of one rule firing.
struct FiredKey {
  std::string rule;
  std::map<ConceptId, ConceptId> bindings;

  auto operator<=>(const FiredKey&) const = default;
  bool operator==(const FiredKey&) const = default;
  std::string str() const;
};

struct WorkingMemory {
  ConceptGraph graph;
  int turn = 0;
  std::set<FiredKey> fired;
  std::set<ConceptId> pinned;  // configured pins (user, bot)

  bool operator==(const WorkingMemory&) const = default;
};

/// Sets salience to the mention value and stamps the current turn.
void mention(WorkingMemory& wm, const ConceptId& c, const SalienceConfig& cfg);

/// Unions an utterance into WM, advances the turn, and marks every
/// non-type concept of the utterance as mentioned.
void ingest_turn(WorkingMemory& wm, const ConceptGraph& utterance, const SalienceConfig& cfg);

/// Argument adjacency of the knowledge base, built once.
class KbIndex {
 public:
  explicit KbIndex(const ConceptGraph& kb);
  const ConceptGraph& kb() const { return *kb_; }
  const std::vector<ConceptId>& predicates_of(const ConceptId& c) const;

 private:
  const ConceptGraph* kb_;
  std::map<ConceptId, std::vector<ConceptId>> by_arg_;
};

/// Pulls KB predicates within `retrieval_hops` of salient WM concepts,
/// then the KB type ancestry of every WM concept. Returns added ids.
std::set<ConceptId> retrieve_knowledge(WorkingMemory& wm, const KbIndex& kb,
                                       const SalienceConfig& cfg);

struct Resolution {
  ConceptId focus;
  ConceptId referent;
};

/// Merges each reference focus into its most salient candidate referent.
std::vector<Resolution> resolve_references(WorkingMemory& wm);

void decay_salience(WorkingMemory& wm, const SalienceConfig& cfg);
/// salience(i) = max(salience(i), max_neighbor - delta) over argument links;
/// iterated to a fixpoint unless the config asks for one pass.
void propagate_salience(WorkingMemory& wm, const SalienceConfig& cfg);
void update_salience(WorkingMemory& wm, const SalienceConfig& cfg);

/// Concepts that pruning never removes: configured pins, pinned features,
/// and types with at least one instance.
bool is_protected(const WorkingMemory& wm, const ConceptId& c);
std::size_t unprotected_count(const WorkingMemory& wm);

/// Keeps at most `cap` unprotected concepts, ranked by salience, then
/// recency, then id. Returns removed ids.
std::set<ConceptId> prune(WorkingMemory& wm, const SalienceConfig& cfg);

/// Predicate pairs with identical type, subject and object but opposite truth.
std::vector<std::pair<ConceptId, ConceptId>> detect_contradictions(const WorkingMemory& wm);

/// Rewrites fired keys after `drop` was merged into `keep`.
void rename_in_fired(WorkingMemory& wm, const ConceptId& keep, const ConceptId& drop);

}  // namespace cgchat
