#include "cgchat/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cgchat {

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream is{std::string(text)};
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void Lexicon::add(const std::string& surface, const ConceptId& target,
                  bool canonical, const std::string& path, int line) {
  std::string key;
  for (const auto& t : split_tokens(surface)) key += (key.empty() ? "" : " ") + t;
  if (key.empty())
    throw CompileError("LexiconError", path, line, 1, "empty surface string");
  if (auto it = by_surface_.find(key); it != by_surface_.end()) {
    if (entries_[it->second].target != target)
      throw CompileError("LexiconError", path, line, 1,
                         "'" + key + "' already maps to '" +
                             entries_[it->second].target + "'");
    entries_[it->second].canonical = entries_[it->second].canonical || canonical;
    return;
  }
  by_surface_[key] = entries_.size();
  by_concept_[target].push_back(entries_.size());
  entries_.push_back({key, target, canonical});
}

Lexicon Lexicon::parse(std::string_view text, const std::string& path) {
  Lexicon lex;
  std::istringstream is{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string col;
    while (std::getline(ls, col, '\t')) {
      auto b = col.find_first_not_of(" \r");
      auto e = col.find_last_not_of(" \r");
      cols.push_back(b == std::string::npos ? "" : col.substr(b, e - b + 1));
    }
    if (cols.size() < 2 || cols.size() > 3 || cols[1].empty() ||
        (cols.size() == 3 && cols[2] != "canonical"))
      throw CompileError("LexiconError", path, n, 1,
                         "expected 'surface<TAB>target[<TAB>canonical]'");
    lex.add(cols[0], cols[1], cols.size() == 3, path, n);
  }
  return lex;
}

void Lexicon::merge(const Lexicon& other) {
  for (const auto& e : other.entries_) add(e.surface, e.target, e.canonical);
}

std::optional<ConceptId> Lexicon::lookup(const std::string& surface) const {
  auto it = by_surface_.find(surface);
  if (it == by_surface_.end()) return std::nullopt;
  return entries_[it->second].target;
}

std::optional<std::string> Lexicon::surface(const ConceptId& c) const {
  auto it = by_concept_.find(c);
  if (it == by_concept_.end()) return std::nullopt;
  const LexEntry* best = nullptr;
  for (auto i : it->second) {
    const auto& e = entries_[i];
    if (e.canonical && (!best || e.surface.size() < best->surface.size())) best = &e;
  }
  return best ? best->surface : entries_[it->second.front()].surface;
}

}  // namespace cgchat
