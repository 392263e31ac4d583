#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cgchat/concept_graph.hpp"
#include "cgchat/matcher.hpp"

namespace cgchat {

enum class RuleKind { inference, transformation, reaction, presentation, template_ };
enum class Priority { low, mid, high, critical };

const char* to_string(RuleKind k);
const char* to_string(Priority p);
std::optional<Priority> parse_priority(const std::string& s);
/// Fixed ratings: 0.1 / 0.4 / 0.7 / 1.0.
double rating(Priority p);

/// (span_a, slot, span_b) over transformation-rule span variables.
struct Attachment {
  ConceptId from;
  EdgeLabel slot;
  ConceptId to;
};

/// `ref(focus)`, `ref(focus, constraint)` or `var(focus, variable)` emitted
/// by a transformation rule.
struct RefDecl {
  bool is_var = false;
  ConceptId focus;
  std::optional<ConceptId> target;
};

enum class GrammarFeature { tense, number };

struct TemplateToken {
  enum class Kind { literal, slot, inflect };
  Kind kind = Kind::literal;
  std::string text;  // literal text, or the lemma of an inflectable
  ConceptId var;     // slot variable or governor
  GrammarFeature feature = GrammarFeature::tense;
};

struct Template {
  std::string rule;  // response rule this template realizes
  QueryGraph precondition;
  std::vector<TemplateToken> tokens;
  std::string text;
};

struct Rule {
  std::string name;
  RuleKind kind = RuleKind::inference;
  std::optional<Priority> priority;
  bool repeatable = false;  // exempt from fired-key suppression
  QueryGraph precondition;

  // Inference postcondition, or the utterance meaning of a response.
  ConceptGraph postcondition;
  std::set<ConceptId> locals;  // postcondition concepts minted per firing

  std::vector<Attachment> attachments;
  std::vector<RefDecl> refs;
  std::vector<std::pair<ConceptId, Tense>> tenses;  // time(X, past) on a span

  std::string path;
  int line = 0;

  bool is_response() const {
    return kind == RuleKind::reaction || kind == RuleKind::presentation;
  }
};

}  // namespace cgchat
