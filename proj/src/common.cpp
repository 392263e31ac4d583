#include "cgchat/common.hpp"

namespace cgchat {

const char* to_string(Truth t) {
  return t == Truth::positive ? "positive" : "negative";
}

const char* to_string(Tense t) {
  switch (t) {
    case Tense::past:
      return "past";
    case Tense::now:
      return "now";
    case Tense::future:
      return "future";
  }
  return "now";
}

std::optional<Tense> parse_tense(const std::string& s) {
  if (s == "past") return Tense::past;
  if (s == "now" || s == "present") return Tense::now;
  if (s == "future") return Tense::future;
  return std::nullopt;
}

CompileError::CompileError(const std::string& kind, const std::string& path,
                           int line, int column, const std::string& message)
    : Error(path + ":" + std::to_string(line) + ":" + std::to_string(column) +
            ": " + kind + ": " + message),
      kind_(kind),
      line_(line),
      column_(column) {}

ConceptId IdGen::fresh(const std::string& prefix) {
  for (;;) {
    ConceptId id = prefix + "_" + std::to_string(next_++);
    if (!taken_ || !taken_(id)) return id;
  }
}

}  // namespace cgchat
