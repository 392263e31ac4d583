#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgchat {

/// Concept symbols are interned as plain identifier strings. Ordered
/// containers keyed by ConceptId give every dump a stable order.
using ConceptId = std::string;

enum class Truth { positive, negative };
enum class Tense { past, now, future };

const char* to_string(Truth t);
const char* to_string(Tense t);
std::optional<Tense> parse_tense(const std::string& s);

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CycleError : public Error {
 public:
  using Error::Error;
};

class RedefinitionError : public Error {
 public:
  using Error::Error;
};

class SignatureConflict : public Error {
 public:
  using Error::Error;
};

class UnknownConcept : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public Error {
 public:
  using Error::Error;
};

/// Raised when compiling structured text. Carries the 1-based source
/// position of the offending token.
class CompileError : public Error {
 public:
  CompileError(const std::string& kind, const std::string& path, int line,
               int column, const std::string& message);
  const std::string& kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string kind_;
  int line_;
  int column_;
};

/// Monotonic generator of fresh concept ids of the form `prefix_N`.
/// An optional `taken` predicate lets callers skip ids that already exist
/// in a graph owned by someone else (the knowledge base, typically).
class IdGen {
 public:
  IdGen() = default;
  explicit IdGen(std::function<bool(const ConceptId&)> taken)
      : taken_(std::move(taken)) {}

  ConceptId fresh(const std::string& prefix);
  std::uint64_t counter() const { return next_; }
  void set_counter(std::uint64_t n) { next_ = n; }
  void set_taken(std::function<bool(const ConceptId&)> taken) {
    taken_ = std::move(taken);
  }

 private:
  std::uint64_t next_ = 1;
  std::function<bool(const ConceptId&)> taken_;
};

/// Collected non-fatal diagnostics.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

}  // namespace cgchat
