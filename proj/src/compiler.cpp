#include "cgchat/compiler.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "cgchat/nlg.hpp"

namespace cgchat {

const char* to_string(RuleKind k) {
  switch (k) {
    case RuleKind::inference:
      return "rule";
    case RuleKind::transformation:
      return "transform";
    case RuleKind::reaction:
      return "reaction";
    case RuleKind::presentation:
      return "presentation";
    case RuleKind::template_:
      return "template";
  }
  return "rule";
}

const char* to_string(Priority p) {
  switch (p) {
    case Priority::low:
      return "low";
    case Priority::mid:
      return "mid";
    case Priority::high:
      return "high";
    case Priority::critical:
      return "critical";
  }
  return "low";
}

std::optional<Priority> parse_priority(const std::string& s) {
  if (s == "low") return Priority::low;
  if (s == "mid") return Priority::mid;
  if (s == "high") return Priority::high;
  if (s == "critical") return Priority::critical;
  return std::nullopt;
}

double rating(Priority p) {
  switch (p) {
    case Priority::low:
      return 0.1;
    case Priority::mid:
      return 0.4;
    case Priority::high:
      return 0.7;
    case Priority::critical:
      return 1.0;
  }
  return 0.1;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  ident, slash, lparen, rparen, comma, arrow, colon, lbrack, rbrack, dash,
  string, blank, eof
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_keyword(const std::string& s) {
  return s == "rule" || s == "transform" || s == "reaction" ||
         s == "presentation" || s == "template";
}

class Lexer {
 public:
  Lexer(std::string_view src, const std::string& path) : src_(src), path_(path) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    auto push = [&](Tok k, std::string text, int line, int col) {
      if (k == Tok::blank && (out.empty() || out.back().kind == Tok::blank))
        return;
      out.push_back({k, std::move(text), line, col});
    };
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      int line = line_, col = col_;
      if (c == '\n') {
        advance();
        // A whitespace-only line ends the current block.
        std::size_t p = pos_;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' ||
                                   src_[p] == '\r'))
          ++p;
        if (p < src_.size() && src_[p] == '\n') push(Tok::blank, "", line_, 1);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (is_ident_char(c)) {
        std::string s;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) {
          s += src_[pos_];
          advance();
        }
        push(Tok::ident, std::move(s), line, col);
        continue;
      }
      if (c == '"') {
        advance();
        std::string s;
        for (;;) {
          if (pos_ >= src_.size() || src_[pos_] == '\n')
            throw CompileError("SyntaxError", path_, line, col,
                               "unterminated string literal");
          char d = src_[pos_];
          advance();
          if (d == '"') break;
          if (d == '\\' && pos_ < src_.size()) {
            s += src_[pos_];
            advance();
            continue;
          }
          s += d;
        }
        push(Tok::string, std::move(s), line, col);
        continue;
      }
      if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        advance();
        advance();
        push(Tok::arrow, "->", line, col);
        continue;
      }
      Tok k;
      switch (c) {
        case '/': k = Tok::slash; break;
        case '(': k = Tok::lparen; break;
        case ')': k = Tok::rparen; break;
        case ',': k = Tok::comma; break;
        case ':': k = Tok::colon; break;
        case '[': k = Tok::lbrack; break;
        case ']': k = Tok::rbrack; break;
        case '-': k = Tok::dash; break;
        default:
          throw CompileError("SyntaxError", path_, line, col,
                             std::string("unexpected character '") + c + "'");
      }
      advance();
      push(k, std::string(1, c), line, col);
    }
    out.push_back({Tok::eof, "", line_, col_});
    return out;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  const std::string& path_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Syntax tree

struct Term {
  Token head;
  bool slash = false;
  std::optional<Token> type;
  bool call = false;
  std::vector<std::optional<Term>> args;

  bool plain() const { return !call; }
};

enum class Mode { knowledge, pre, post };

struct NotRecord {
  std::string id;  // explicit `n/not(x)` id, empty when anonymous
  std::string target;
  Token at;
};

/// Knowledge visible to a compilation: the loaded kb plus this file's own
/// knowledge section.
struct Known {
  const ConceptGraph& kb;
  const ConceptGraph& local;
  bool contains(const ConceptId& c) const {
    return kb.contains(c) || local.contains(c);
  }
};

struct Scope {
  Mode mode;
  ConceptGraph& g;
  std::set<ConceptId>* vars = nullptr;    // pre: collected; post: read
  std::set<ConceptId>* locals = nullptr;  // post only
  std::vector<std::pair<ConceptId, ConceptId>>* distinct = nullptr;
  std::vector<NotRecord> nots;
};

// ---------------------------------------------------------------------------
// Parser + emitter

class Compiler {
 public:
  Compiler(std::string_view src, const std::string& path, const ConceptGraph& kb,
           IdGen& ids)
      : path_(path), known_{kb, result_.knowledge}, ids_(ids) {
    toks_ = Lexer(src, path).run();
  }

  CompileResult run() {
    Scope top{Mode::knowledge, result_.knowledge};
    while (peek().kind != Tok::eof) {
      if (peek().kind == Tok::blank) {
        ++pos_;
        continue;
      }
      if (peek().kind == Tok::ident && is_keyword(peek().text)) {
        parse_block();
        continue;
      }
      Term t = parse_term();
      emit_checked(t, top);
    }
    apply_nots(top);
    return std::move(result_);
  }

 private:
  // -- token helpers --------------------------------------------------------
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& kind, const Token& at,
                         const std::string& msg) const {
    throw CompileError(kind, path_, at.line, at.col, msg);
  }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k)
      fail("SyntaxError", peek(),
           std::string("expected ") + what + ", found '" + peek().text + "'");
    return next();
  }

  bool at_term_end() const {
    const Token& t = peek();
    return t.kind == Tok::eof || t.kind == Tok::blank || t.kind == Tok::arrow ||
           (t.kind == Tok::ident && is_keyword(t.text));
  }

  // -- terms ----------------------------------------------------------------
  Term parse_term() {
    Term t{expect(Tok::ident, "identifier")};
    if (peek().kind == Tok::slash) {
      next();
      t.slash = true;
      if (peek().kind == Tok::ident) t.type = next();
      expect(Tok::lparen, "'('");
      t.call = true;
      parse_args(t);
    } else if (peek().kind == Tok::lparen) {
      next();
      t.call = true;
      parse_args(t);
    }
    return t;
  }

  void parse_args(Term& t) {
    if (peek().kind == Tok::rparen) {
      next();
      return;
    }
    for (;;) {
      if (peek().kind == Tok::dash) {
        next();
        t.args.emplace_back(std::nullopt);
      } else {
        t.args.emplace_back(parse_term());
      }
      if (peek().kind == Tok::comma) {
        next();
        continue;
      }
      expect(Tok::rparen, "')' or ','");
      return;
    }
  }

  ConceptId resolve_instance(const std::string& name, Scope& s) {
    switch (s.mode) {
      case Mode::knowledge:
        break;
      case Mode::pre:
        if (!known_.contains(name) && s.vars->insert(name).second) {
          if (std::islower(static_cast<unsigned char>(name[0])))
            result_.diagnostics.warn(path_ + ": lowercase variable '" + name +
                                     "' in rule '" + rule_name_ + "'");
        }
        break;
      case Mode::post:
        if (!s.vars->count(name) && !known_.contains(name))
          s.locals->insert(name);
        break;
    }
    s.g.add_concept(name);
    return name;
  }

  ConceptId resolve_type(const std::string& name, Scope& s) {
    s.g.add_concept(name);
    return name;
  }

  ConceptId anonymous(const std::string& type, Scope& s) {
    ConceptId id = ids_.fresh(type);
    if (s.mode == Mode::pre) s.vars->insert(id);
    if (s.mode == Mode::post) s.locals->insert(id);
    s.g.add_concept(id);
    return id;
  }

  std::optional<ConceptId> emit_arg(const std::optional<Term>& a, Scope& s) {
    if (!a) return std::nullopt;
    return emit(*a, s);
  }

  const Token& plain_arg(const Term& t, std::size_t i, const char* what) {
    if (i >= t.args.size() || !t.args[i] || !t.args[i]->plain())
      fail("SyntaxError", t.head,
           std::string("'") + t.head.text + "' expects " + what);
    return t.args[i]->head;
  }

  void check_arity(const Term& t) {
    if (t.args.size() > 2)
      fail("ArityError", t.head,
           "'" + t.head.text + "' has " + std::to_string(t.args.size()) +
               " arguments; predicates take at most two");
  }

  void emit_checked(const Term& t, Scope& s) {
    try {
      emit(t, s);
    } catch (const CompileError&) {
      throw;
    } catch (const Error& e) {
      std::string kind = dynamic_cast<const CycleError*>(&e)          ? "CycleError"
                         : dynamic_cast<const RedefinitionError*>(&e) ? "RedefinitionError"
                         : dynamic_cast<const SignatureConflict*>(&e) ? "SignatureConflict"
                                                                      : "Error";
      fail(kind, t.head, e.what());
    }
  }

  ConceptId emit(const Term& t, Scope& s) {
    if (!t.call) return resolve_instance(t.head.text, s);
    check_arity(t);

    if (t.slash) {
      if (t.type && t.type->text == "not") {
        const Token& target = plain_arg(t, 0, "one plain identifier");
        s.nots.push_back({t.head.text, target.text, t.head});
        return t.head.text;
      }
      if (t.type && t.type->text == "type") {
        Term edge = t;
        edge.slash = false;
        edge.head = *t.type;
        return emit(edge, s);
      }
      ConceptId id = resolve_instance(t.head.text, s);
      std::optional<ConceptId> type;
      if (t.type) type = resolve_type(t.type->text, s);
      if (t.args.empty()) {
        if (type) s.g.add_type(id, *type);
        return id;
      }
      auto subj = emit_arg(t.args[0], s);
      std::optional<ConceptId> obj;
      if (t.args.size() > 1)
        obj = type && *type == "time"
                  ? resolve_type(plain_arg(t, 1, "a tense (past, now, future)").text, s)
                  : emit_arg(t.args[1], s);
      if (type) {
        s.g.add_predicate(id, *type, subj, obj);
      } else {
        if (s.g.is_predicate(id))
          throw RedefinitionError("predicate '" + id + "' already has a signature");
        s.g.set_signature(id, {subj, obj});
      }
      if (type && *type == "time") apply_time(t, id, s);
      return id;
    }

    const std::string& name = t.head.text;
    if (name == "type") {
      if (t.args.size() != 2 || !t.args[0])
        fail("SyntaxError", t.head, "type() takes (instance, type)");
      ConceptId inst = emit(*t.args[0], s);
      const Token& ty = plain_arg(t, 1, "a type identifier as second argument");
      s.g.add_type(inst, resolve_type(ty.text, s));
      return inst;
    }
    if (name == "not") {
      if (t.args.size() != 1)
        fail("SyntaxError", t.head, "not() takes exactly one argument");
      const Token& target = plain_arg(t, 0, "one plain identifier");
      s.nots.push_back({"", target.text, t.head});
      return target.text;
    }
    if (name == "distinct" && s.mode == Mode::pre) {
      const Token& a = plain_arg(t, 0, "two variables");
      const Token& b = plain_arg(t, 1, "two variables");
      s.distinct->emplace_back(a.text, b.text);
      return a.text;
    }

    ConceptId id = anonymous(name, s);
    ConceptId type = resolve_type(name, s);
    if (t.args.empty()) {
      s.g.add_type(id, type);
      return id;
    }
    auto subj = emit_arg(t.args[0], s);
    std::optional<ConceptId> obj;
    if (t.args.size() > 1) {
      if (name == "time") {
        const Token& v = plain_arg(t, 1, "a tense (past, now, future)");
        obj = resolve_type(v.text, s);
      } else {
        obj = emit_arg(t.args[1], s);
      }
    }
    s.g.add_predicate(id, type, subj, obj);
    if (name == "time") apply_time(t, id, s);
    return id;
  }

  void apply_time(const Term& t, const ConceptId& pred, Scope& s) {
    const Signature& sig = s.g.signature(pred);
    if (!sig.subject || !sig.object)
      fail("SyntaxError", t.head, "time() takes (predicate, tense)");
    auto tense = parse_tense(*sig.object);
    if (!tense)
      fail("SyntaxError", t.head, "unknown tense '" + *sig.object + "'");
    s.g.features(*sig.subject).tense = tense;
  }

  /// Resolves not() records: a negation is effective unless itself negated
  /// an odd number of times; targets flip once per effective negation.
  void apply_nots(Scope& s) {
    if (s.nots.empty()) return;
    std::set<std::string> not_ids;
    for (const auto& n : s.nots)
      if (!n.id.empty()) not_ids.insert(n.id);
    for (const auto& n : s.nots) {
      if (!s.g.contains(n.target) && !not_ids.count(n.target))
        fail("UnknownTarget", n.at, "not() target '" + n.target + "' is undeclared");
      if (not_ids.count(n.target))
        result_.diagnostics.warn(path_ + ":" + std::to_string(n.at.line) +
                                 ": double negation of '" + n.target + "'");
    }
    std::map<std::string, bool> memo;
    auto effective = [&](auto&& self, const std::string& id, int depth) -> bool {
      if (id.empty()) return true;
      if (depth > static_cast<int>(s.nots.size()))
        fail("SyntaxError", s.nots.front().at, "cyclic negation");
      if (auto it = memo.find(id); it != memo.end()) return it->second;
      int flips = 0;
      for (const auto& n : s.nots)
        if (n.target == id && self(self, n.id, depth + 1)) ++flips;
      return memo[id] = (flips % 2 == 0);
    };
    std::map<std::string, int> flips;
    for (const auto& n : s.nots)
      if (!not_ids.count(n.target) && effective(effective, n.id, 0))
        ++flips[n.target];
    for (const auto& [target, count] : flips)
      s.g.features(target).truth = count % 2 ? Truth::negative : Truth::positive;
    s.nots.clear();
  }

  // -- blocks ---------------------------------------------------------------
  void parse_block() {
    const Token kw = next();
    Rule r;
    r.kind = kw.text == "rule"           ? RuleKind::inference
             : kw.text == "transform"    ? RuleKind::transformation
             : kw.text == "reaction"     ? RuleKind::reaction
             : kw.text == "presentation" ? RuleKind::presentation
                                         : RuleKind::template_;
    r.name = expect(Tok::ident, "rule name").text;
    r.path = path_;
    r.line = kw.line;
    rule_name_ = r.name;
    r.precondition.name = r.name;

    if (peek().kind == Tok::lbrack) {
      next();
      for (;;) {
        const Token& a = expect(Tok::ident, "priority or attribute");
        if (auto p = parse_priority(a.text))
          r.priority = p;
        else if (a.text == "repeat")
          r.repeatable = true;
        else
          fail("UnknownKindError", a, "unknown rule attribute '" + a.text + "'");
        if (peek().kind == Tok::comma) {
          next();
          continue;
        }
        expect(Tok::rbrack, "']'");
        break;
      }
    }
    expect(Tok::colon, "':'");
    if (r.is_response() && !r.priority)
      fail("UnknownKindError", kw, "response rule '" + r.name + "' needs a priority");
    if (!r.is_response() && r.priority)
      fail("UnknownKindError", kw, "only response rules carry a priority");

    Scope pre{Mode::pre, r.precondition.graph, &r.precondition.variables};
    pre.distinct = &r.precondition.distinct;
    while (!at_term_end()) emit_checked(parse_term(), pre);
    apply_nots(pre);
    warn_missing_constants(r);

    std::optional<std::string> text;
    const Token arrow = peek();
    if (peek().kind == Tok::arrow) {
      next();
      switch (r.kind) {
        case RuleKind::transformation:
          parse_attachments(r);
          break;
        case RuleKind::template_:
        case RuleKind::reaction:
        case RuleKind::presentation: {
          if (peek().kind == Tok::ident && peek().text == "template") next();
          if (peek().kind == Tok::string) text = next().text;
          if (r.kind == RuleKind::template_ && !text)
            fail("SyntaxError", peek(), "template block needs a string");
          if (r.kind == RuleKind::template_) break;
          [[fallthrough]];
        }
        case RuleKind::inference: {
          Scope post{Mode::post, r.postcondition, &r.precondition.variables,
                     &r.locals};
          while (!at_term_end()) emit_checked(parse_term(), post);
          apply_nots(post);
          break;
        }
      }
    }
    if (r.kind == RuleKind::inference && r.postcondition.empty())
      fail("SyntaxError", arrow, "inference rule '" + r.name + "' has no postcondition");
    if (r.kind == RuleKind::template_ && !text)
      fail("SyntaxError", arrow, "template block '" + r.name + "' needs '-> \"...\"'");
    if (peek().kind == Tok::arrow) fail("SyntaxError", peek(), "unexpected '->'");

    if (text) {
      Template t;
      t.rule = r.name;
      t.precondition = r.precondition;
      t.text = *text;
      try {
        t.tokens = parse_template_text(*text);
      } catch (const std::invalid_argument& e) {
        fail("TemplateError", kw, e.what());
      }
      for (const auto& tok : t.tokens)
        if (tok.kind != TemplateToken::Kind::literal &&
            !t.precondition.variables.count(tok.var))
          fail("TemplateError", kw,
               "template variable '" + tok.var + "' of '" + r.name +
                   "' is not a precondition variable");
      result_.templates.push_back(std::move(t));
    }
    if (r.kind != RuleKind::template_) result_.rules.push_back(std::move(r));
  }

  void parse_attachments(Rule& r) {
    const auto& vars = r.precondition.variables;
    auto need_var = [&](const Token& t) {
      if (!vars.count(t.text))
        fail("SyntaxError", t, "'" + t.text + "' is not a parse-pattern variable");
      return t.text;
    };
    while (!at_term_end()) {
      if (peek().kind == Tok::lparen) {
        next();
        Attachment a;
        a.from = need_var(expect(Tok::ident, "span variable"));
        expect(Tok::comma, "','");
        const Token& slot = expect(Tok::ident, "ARG0, ARG1 or T");
        if (slot.text == "ARG0")
          a.slot = EdgeLabel::ARG0;
        else if (slot.text == "ARG1")
          a.slot = EdgeLabel::ARG1;
        else if (slot.text == "T")
          a.slot = EdgeLabel::T;
        else
          fail("SyntaxError", slot, "unknown attachment slot '" + slot.text + "'");
        expect(Tok::comma, "','");
        a.to = need_var(expect(Tok::ident, "span variable"));
        expect(Tok::rparen, "')'");
        r.attachments.push_back(std::move(a));
        continue;
      }
      Term t = parse_term();
      if (t.call && !t.slash && t.head.text == "time") {
        ConceptId x = need_var(plain_arg(t, 0, "(span variable, tense)"));
        const Token& v = plain_arg(t, 1, "(span variable, tense)");
        auto tense = parse_tense(v.text);
        if (!tense) fail("SyntaxError", v, "unknown tense '" + v.text + "'");
        r.tenses.emplace_back(x, *tense);
        continue;
      }
      if (!t.call || t.slash || (t.head.text != "ref" && t.head.text != "var"))
        fail("SyntaxError", t.head, "expected an attachment tuple, ref(), var() or time()");
      RefDecl d;
      d.is_var = t.head.text == "var";
      d.focus = need_var(plain_arg(t, 0, "a span variable"));
      if (t.args.size() > 1) d.target = need_var(plain_arg(t, 1, "a span variable"));
      if (d.is_var && !d.target)
        fail("SyntaxError", t.head, "var() takes (focus, variable)");
      r.refs.push_back(std::move(d));
    }
  }

  void warn_missing_constants(const Rule& r) {
    if (r.kind == RuleKind::transformation) return;
    for (const auto& [c, f] : r.precondition.graph.nodes())
      if (!r.precondition.variables.count(c) && !known_.contains(c))
        result_.diagnostics.warn(path_ + ": constant '" + c + "' in rule '" +
                                 r.name + "' is absent from the knowledge base");
  }

  std::string path_;
  CompileResult result_;
  Known known_;
  IdGen& ids_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string rule_name_;
};

}  // namespace

CompileResult compile(std::string_view source, const std::string& path,
                      const ConceptGraph& kb, IdGen& ids) {
  return Compiler(source, path, kb, ids).run();
}

CompileResult compile(std::string_view source, const std::string& path) {
  ConceptGraph empty;
  IdGen ids;
  return compile(source, path, empty, ids);
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const ConceptGraph& g) {
  std::ostringstream os;
  std::set<ConceptId> referenced;
  for (const auto& [p, sig] : g.predicates()) {
    if (sig.subject) referenced.insert(*sig.subject);
    if (sig.object) referenced.insert(*sig.object);
  }
  for (const auto& [c, ps] : g.ontology())
    for (const auto& p : ps) referenced.insert(p);

  auto arg = [](const std::optional<ConceptId>& a) { return a ? *a : std::string("-"); };

  for (const auto& [c, f] : g.nodes()) {
    const auto& parents = g.parents(c);
    if (const Signature* sig = g.find_signature(c)) {
      os << c << '/';
      auto it = parents.begin();
      if (it != parents.end()) os << *it++;
      os << '(' << arg(sig->subject);
      if (sig->object) os << ", " << *sig->object;
      os << ")\n";
      for (; it != parents.end(); ++it) os << "type(" << c << ", " << *it << ")\n";
      if (f.truth == Truth::negative) os << "not(" << c << ")\n";
    } else if (!parents.empty()) {
      auto it = parents.begin();
      os << c << '/' << *it++ << "()\n";
      for (; it != parents.end(); ++it) os << "type(" << c << ", " << *it << ")\n";
    } else if (!referenced.count(c) && !g.is_type(c)) {
      os << c << '\n';
    }
  }
  return os.str();
}

}  // namespace cgchat
