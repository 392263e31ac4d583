#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgchat/concept_graph.hpp"
#include "cgchat/lexicon.hpp"
#include "cgchat/matcher.hpp"
#include "cgchat/rules.hpp"

namespace cgchat {

class EmptyResponse : public Error {
 public:
  using Error::Error;
};

/// Splits template text into literals, `{X}` slots and inflectables
/// `{verb:like@l.tense}` / `{noun:movie@m.number}`. Throws
/// std::invalid_argument on malformed braces or unsupported features.
std::vector<TemplateToken> parse_template_text(const std::string& text);

std::string past_tense(const std::string& verb);
std::string inflect_verb(const std::string& lemma, Tense t);
std::string pluralize(const std::string& noun);

/// Tense of `c` from its feature, else from a `time(c, tense)` predicate.
std::optional<Tense> tense_of(const ConceptGraph& g, const ConceptId& c);

/// Fills slots with surface forms and inflects by governor features.
std::string realize(const Template& t, const Solution& sol,
                    const ConceptGraph& wm, const Lexicon& lex,
                    Diagnostics* diag = nullptr);

/// Joins the non-empty segments with one space, reaction first.
std::string compose(const std::optional<std::string>& reaction,
                    const std::optional<std::string>& presentation);

/// Surface string for a concept: lexicon, else the id with `_` as space.
std::string surface_of(const ConceptId& c, const Lexicon& lex,
                       Diagnostics* diag = nullptr);

}  // namespace cgchat
