#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cgchat/compiler.hpp"
#include "cgchat/config.hpp"
#include "cgchat/lexicon.hpp"
#include "cgchat/nlu.hpp"

namespace cgchat {

/// Everything a conversation needs, compiled once at startup.
struct ContentPack {
  std::filesystem::path root;
  Manifest manifest;
  ConceptGraph kb;
  Lexicon lexicon;
  std::vector<Rule> rules;
  std::vector<Template> templates;
  std::map<std::string, ParseInput> fixtures;  // keyed by utterance text
  Diagnostics diagnostics;

  std::vector<const Rule*> of_kind(RuleKind k) const;
  std::vector<const Rule*> responses() const;
  const Rule* rule(const std::string& name) const;
  std::vector<const Template*> templates_for(const std::string& rule) const;
};

Manifest parse_manifest(const std::string& json_text);

/// Compiles every file named by the manifest. Throws CompileError on the
/// first bad file and on rule/template pairing errors.
ContentPack load_pack(const std::filesystem::path& manifest_path);

/// Builds a pack from in-memory sources (tests, single-file tools).
ContentPack load_pack_sources(const std::vector<std::pair<std::string, std::string>>& kb,
                              const std::vector<std::pair<std::string, std::string>>& rules,
                              const std::string& lexicon = "",
                              const std::string& fixtures = "", Manifest manifest = {});

/// Pairing audit: every response rule needs a template whose precondition
/// holds on the rule's own precondition. Returns one message per problem.
std::vector<std::string> audit_templates(const ContentPack& pack);

std::string read_file(const std::filesystem::path& p);

}  // namespace cgchat
