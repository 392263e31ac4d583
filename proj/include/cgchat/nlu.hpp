#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cgchat/concept_graph.hpp"
#include "cgchat/lexicon.hpp"
#include "cgchat/matcher.hpp"
#include "cgchat/rules.hpp"

namespace cgchat {

class CoverageError : public Error {
 public:
  using Error::Error;
};

class DanglingSpan : public Error {
 public:
  using Error::Error;
};

class InvalidParse : public Error {
 public:
  using Error::Error;
};

struct NerSpan {
  int start;
  int end;  // exclusive
  std::string label;
};

struct DepEdge {
  int head;
  int child;
  std::string rel;
};

/// Tokenized, tagged and parsed utterance, as produced by an external
/// NLP stack or read from a fixture.
struct ParseInput {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::string> pos;
  std::vector<NerSpan> ner;
  std::vector<DepEdge> deps;
  bool cased = true;
};

/// Throws InvalidParse on out-of-range indices or overlapping NER spans.
void validate(const ParseInput& p);

/// Reads `.parse` fixture blocks (UTTERANCE/CASED/TOK/POS/NER/DEP/END).
std::vector<ParseInput> parse_fixtures(std::string_view text, const std::string& path);

/// Deterministic stand-in for a live parser: whitespace tokens with
/// punctuation split off, a placeholder POS tag, no entities or edges.
ParseInput naive_parse(const std::string& text);

enum class SpanSource { gazetteer, ner, pos };
enum class SpanKind { instance, entity_type, predicate_type };
const char* to_string(SpanSource s);
const char* to_string(SpanKind k);

struct SpanConcept {
  int start = 0;
  int end = 0;  // exclusive
  SpanSource source = SpanSource::gazetteer;
  SpanKind kind = SpanKind::instance;
  ConceptId label;          // KB concept, or lowercased NER/POS tag
  bool expects_object = false;
  ConceptId focal;          // set by merge_span_concepts
};

struct SpanConceptMap {
  std::vector<SpanConcept> entries;  // sorted by start

  /// Entry whose span contains token i, or nullptr.
  const SpanConcept* containing(int i) const;
  ConceptGraph graph() const;
};

/// Multi-pattern token matcher (Aho-Corasick over token sequences).
class Gazetteer {
 public:
  Gazetteer(const Lexicon& lex, const ConceptGraph& kb);

  struct Hit {
    int start;
    int end;
    ConceptId concept_id;
    std::size_t surface_length;
  };
  /// Every lexicon occurrence; `cased=false` compares lowercased tokens.
  std::vector<Hit> all_hits(const std::vector<std::string>& tokens, bool cased) const;

  /// Leftmost-longest hits, classified against the KB.
  std::vector<SpanConcept> match(const std::vector<std::string>& tokens, bool cased) const;

  SpanKind classify(const ConceptId& c) const;
  bool transitive(const ConceptId& c) const { return transitive_.count(c) != 0; }

 private:
  struct Automaton;
  std::shared_ptr<const Automaton> cased_;
  std::shared_ptr<const Automaton> uncased_;
  const ConceptGraph* kb_;
  std::set<ConceptId> transitive_;
};

/// Gazetteer entries always; NER entries disjoint from them; POS for the
/// rest. Focal ids are minted in span order. Throws CoverageError.
SpanConceptMap merge_span_concepts(const std::vector<SpanConcept>& gaz,
                                   const std::vector<SpanConcept>& ner,
                                   const std::vector<SpanConcept>& pos, int n_tokens,
                                   IdGen& ids);

/// Lowercased tag with non-identifier characters replaced; pure
/// punctuation tags become `punct`.
std::string tag_concept(const std::string& tag);
std::vector<SpanConcept> ner_concepts(const ParseInput& p);
std::vector<SpanConcept> pos_concepts(const ParseInput& p);

/// Token concepts `tok_i` with POS type edges; one `rel` predicate per
/// dependency edge.
ConceptGraph build_parse_cg(const ParseInput& p);
std::string token_concept(int i);

struct ConceptAttachment {
  ConceptId from;
  EdgeLabel slot;
  ConceptId to;
};

struct TransformApplication {
  std::string rule;
  Solution solution;
  std::vector<std::pair<int, int>> spans;  // token index pairs per attachment
  std::vector<ConceptAttachment> attachments;
};

struct TransformResult {
  ConceptGraph graph;
  std::vector<TransformApplication> applied;
};

TransformResult apply_transformations(const std::vector<const Rule*>& rules,
                                      const ConceptGraph& parse_cg,
                                      const SpanConceptMap& scm, IdGen& ids,
                                      Diagnostics* diag = nullptr);

struct NluResult {
  SpanConceptMap scm;
  ConceptGraph parse_cg;
  TransformResult transformed;
  const ConceptGraph& graph() const { return transformed.graph; }
};

/// Full utterance -> ConceptGraph pipeline.
NluResult understand(const ParseInput& p, const Gazetteer& gaz,
                     const std::vector<const Rule*>& transforms, IdGen& ids,
                     Diagnostics* diag = nullptr);

}  // namespace cgchat
