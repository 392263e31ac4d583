#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgchat/content_pack.hpp"
#include "cgchat/dialogue_state.hpp"
#include "cgchat/nlu.hpp"
#include "cgchat/response.hpp"
#include "json.hpp"

namespace cgchat {

class ParseFixtureMissing : public Error {
 public:
  using Error::Error;
};

/// Compiled pack plus the derived lookup structures every conversation
/// shares. Immutable after construction.
class Engine {
 public:
  explicit Engine(ContentPack pack);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const ContentPack& pack() const { return pack_; }
  const Gazetteer& gazetteer() const { return gaz_; }
  const KbIndex& kb_index() const { return index_; }
  const std::vector<const Rule*>& inference_rules() const { return inference_; }
  const std::vector<const Rule*>& transforms() const { return transforms_; }
  const std::vector<const Rule*>& response_rules() const { return responses_; }

  /// Fixture by exact text, else naive parse if enabled. Empty text is an
  /// empty parse.
  ParseInput parse_for(const std::string& text) const;

 private:
  ContentPack pack_;
  Gazetteer gaz_;
  KbIndex index_;
  std::vector<const Rule*> inference_, transforms_, responses_;
};

struct CandidateRow {
  std::string rule;
  RuleKind rtype;
  Priority priority;
  double score;
  double mean_salience;
  std::vector<ConceptId> d_set;
  std::map<ConceptId, ConceptId> bindings;
  bool selected = false;
};

struct TurnRecord {
  int turn = 0;
  std::string input;
  ParseInput parse;
  std::string utterance;  // serialized utterance graph
  std::vector<std::string> fired;
  std::vector<Resolution> resolutions;
  std::vector<std::pair<ConceptId, ConceptId>> contradictions;
  std::vector<CandidateRow> candidates;
  std::optional<std::string> reaction, presentation;  // rule names
  std::optional<std::string> reaction_text, presentation_text;
  std::string response;
  std::vector<ConceptId> added, pruned;
  std::size_t wm_before_prune = 0, wm_after_prune = 0;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings_ms;  // excluded from replay comparison
};

nlohmann::json to_json(const ParseInput& p);
ParseInput parse_input_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TurnRecord& r, bool with_timings = true);
nlohmann::json to_json(const WorkingMemory& wm);

class Conversation {
 public:
  /// Starts from the pinned concepts plus `seeds` (knowledge-language
  /// statements, mentioned at turn 0).
  Conversation(const Engine& engine, std::vector<std::string> seeds = {});

  /// All-or-nothing: on error the conversation is unchanged.
  TurnRecord turn(const std::string& text);
  TurnRecord turn(const ParseInput& p);

  const WorkingMemory& memory() const { return wm_; }
  const std::vector<TurnRecord>& history() const { return history_; }
  const std::vector<std::string>& seeds() const { return seeds_; }

 private:
  const Engine* engine_;
  std::vector<std::string> seeds_;
  WorkingMemory wm_;
  IdGen ids_;
  std::vector<TurnRecord> history_;
};

/// Header line + one TurnRecord per line.
std::string conversation_log(const Conversation& c);

struct ReplayResult {
  bool identical = true;
  int first_divergent_turn = -1;
  std::string detail;
  std::vector<std::string> responses;
  nlohmann::json final_memory;
};

/// Re-runs a conversation log and compares responses, records (without
/// timings) and the final WM dump.
ReplayResult replay(const Engine& engine, const std::string& ndjson);

struct Golden {
  std::string name;
  std::vector<std::string> seeds;
  struct Turn {
    std::string user;  // empty: the bot speaks first
    std::string bot;
  };
  std::vector<Turn> turns;
};

Golden parse_golden(const std::string& text, const std::string& name = "");

struct GoldenResult {
  bool pass = true;
  int first_divergent_turn = -1;
  std::string expected, actual;
  std::vector<std::string> responses;
};

GoldenResult run_golden(const Engine& engine, const Golden& g);

/// Compiles, audits pairing and replays goldens. Empty means clean.
std::vector<std::string> validate_pack(const std::filesystem::path& manifest);

}  // namespace cgchat
