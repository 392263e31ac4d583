#pragma once

#include <string>
#include <vector>

#include "cgchat/dialogue_state.hpp"
#include "cgchat/rules.hpp"

namespace cgchat {

/// Postcondition with variables replaced by their bindings and locals
/// minted fresh. Throws UnboundVariable.
ConceptGraph instantiate(const Rule& r, const Solution& s, IdGen& ids);

struct Firing {
  std::string rule;
  Solution solution;
  ConceptGraph produced;
  int pass = 0;
};

/// Runs `passes` rounds of match-then-assert over WM. Each round matches
/// every rule against the same snapshot; a (rule, bindings) pair fires at
/// most once per conversation.
std::vector<Firing> apply_rules(WorkingMemory& wm, const std::vector<const Rule*>& rules,
                                int passes, IdGen& ids, int threads = 0);

/// Stateless forward chaining over a plain graph (CLI `infer`).
std::vector<Firing> infer(ConceptGraph& data, const std::vector<const Rule*>& rules,
                          int passes, IdGen& ids, int threads = 0);

/// "# pass N rule bindings" followed by the produced graph, per firing.
std::string format_firings(const std::vector<Firing>& trace);

}  // namespace cgchat
