#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgchat/common.hpp"

namespace cgchat {

struct LexEntry {
  std::string surface;
  ConceptId target;
  bool canonical = false;
};

/// Many-to-one surface string -> concept map. Used by the gazetteer in one
/// direction and by the realizer in the other.
class Lexicon {
 public:
  /// Throws CompileError when a surface string is mapped to two concepts.
  void add(const std::string& surface, const ConceptId& target,
           bool canonical = false, const std::string& path = "<lexicon>",
           int line = 0);

  /// `surface<TAB>concept[<TAB>canonical]` lines; `#` starts a comment.
  static Lexicon parse(std::string_view text, const std::string& path);
  void merge(const Lexicon& other);

  const std::vector<LexEntry>& entries() const { return entries_; }
  std::optional<ConceptId> lookup(const std::string& surface) const;

  /// Generation direction: shortest canonical string, else first declared.
  std::optional<std::string> surface(const ConceptId& c) const;

 private:
  std::vector<LexEntry> entries_;
  std::map<std::string, std::size_t> by_surface_;
  std::map<ConceptId, std::vector<std::size_t>> by_concept_;
};

/// Whitespace tokenization shared by lexicon patterns and the naive parse.
std::vector<std::string> split_tokens(std::string_view text);
std::string lowercase(std::string s);

}  // namespace cgchat
