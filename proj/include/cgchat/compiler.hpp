#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cgchat/concept_graph.hpp"
#include "cgchat/rules.hpp"

namespace cgchat {

struct CompileResult {
  ConceptGraph knowledge;
  std::vector<Rule> rules;
  std::vector<Template> templates;
  Diagnostics diagnostics;
};

/// Compiles one `.kb` source. `kb` is the knowledge already loaded; rule
/// identifiers found there (or in this file's knowledge) are constants.
/// Fresh ids for anonymous concepts come from `ids`, so compiling the same
/// sources in the same order is deterministic.
CompileResult compile(std::string_view source, const std::string& path,
                      const ConceptGraph& kb, IdGen& ids);

/// Convenience overload with an empty kb and a private id generator.
CompileResult compile(std::string_view source, const std::string& path = "<input>");

/// Emits one declaration per predicate / typed instance in sorted order.
/// Only structure and truth are written; dialogue features are not.
std::string serialize(const ConceptGraph& g);

}  // namespace cgchat
