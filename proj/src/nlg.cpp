#include "cgchat/nlg.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cgchat {

namespace {

const std::map<std::string, std::string>& irregular_past() {
  static const std::map<std::string, std::string> m = {
      {"be", "was"},       {"have", "had"},     {"go", "went"},
      {"do", "did"},       {"see", "saw"},      {"eat", "ate"},
      {"give", "gave"},    {"run", "ran"},      {"buy", "bought"},
      {"make", "made"},    {"take", "took"},    {"get", "got"},
      {"come", "came"},    {"know", "knew"},    {"think", "thought"},
      {"say", "said"},     {"find", "found"},   {"tell", "told"},
      {"feel", "felt"},    {"leave", "left"},   {"bring", "brought"},
      {"begin", "began"},  {"write", "wrote"},  {"read", "read"},
      {"sing", "sang"},    {"swim", "swam"},    {"drink", "drank"},
      {"fly", "flew"},     {"drive", "drove"},  {"win", "won"},
      {"meet", "met"},     {"sit", "sat"},      {"stand", "stood"},
      {"lose", "lost"},    {"pay", "paid"},     {"hear", "heard"},
      {"sleep", "slept"},  {"teach", "taught"}, {"catch", "caught"},
      {"ride", "rode"},    {"spend", "spent"},  {"put", "put"},
  };
  return m;
}

const std::map<std::string, std::string>& irregular_plural() {
  static const std::map<std::string, std::string> m = {
      {"child", "children"}, {"person", "people"}, {"foot", "feet"},
      {"man", "men"},        {"woman", "women"},   {"mouse", "mice"},
      {"tooth", "teeth"},    {"goose", "geese"},   {"ox", "oxen"},
      {"leaf", "leaves"},    {"knife", "knives"},  {"wife", "wives"},
      {"life", "lives"},     {"sheep", "sheep"},   {"fish", "fish"},
      {"deer", "deer"},      {"series", "series"},
  };
  return m;
}

bool is_vowel(char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; }

bool ends_with(const std::string& s, std::string_view suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

std::string past_tense(const std::string& verb) {
  if (auto it = irregular_past().find(verb); it != irregular_past().end())
    return it->second;
  const auto n = verb.size();
  if (n == 0) return verb;
  if (verb.back() == 'e') return verb + "d";
  if (n >= 2 && verb.back() == 'y' && !is_vowel(verb[n - 2]))
    return verb.substr(0, n - 1) + "ied";
  // Short consonant-vowel-consonant stems double the final consonant.
  if (n >= 3 && n <= 4 && !is_vowel(verb[n - 1]) && is_vowel(verb[n - 2]) &&
      !is_vowel(verb[n - 3]) && std::string_view("wxy").find(verb.back()) == std::string_view::npos)
    return verb + verb.back() + "ed";
  return verb + "ed";
}

std::string inflect_verb(const std::string& lemma, Tense t) {
  switch (t) {
    case Tense::past:
      return past_tense(lemma);
    case Tense::future:
      return "will " + lemma;
    case Tense::now:
      break;
  }
  return lemma;
}

std::string pluralize(const std::string& noun) {
  if (auto it = irregular_plural().find(noun); it != irregular_plural().end())
    return it->second;
  const auto n = noun.size();
  if (n == 0) return noun;
  if (ends_with(noun, "s") || ends_with(noun, "x") || ends_with(noun, "z") ||
      ends_with(noun, "ch") || ends_with(noun, "sh"))
    return noun + "es";
  if (n >= 2 && noun.back() == 'y' && !is_vowel(noun[n - 2]))
    return noun.substr(0, n - 1) + "ies";
  return noun + "s";
}

std::vector<TemplateToken> parse_template_text(const std::string& text) {
  std::vector<TemplateToken> out;
  std::string lit;
  auto flush = [&] {
    if (!lit.empty()) out.push_back({TemplateToken::Kind::literal, lit, "", {}});
    lit.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '}') throw std::invalid_argument("unbalanced '}' in template");
    if (c != '{') {
      lit += c;
      continue;
    }
    auto close = text.find('}', i);
    if (close == std::string::npos)
      throw std::invalid_argument("unterminated '{' in template");
    std::string body = text.substr(i + 1, close - i - 1);
    i = close;
    flush();
    auto colon = body.find(':');
    if (colon == std::string::npos) {
      if (body.empty() || body.find_first_of(" @.") != std::string::npos)
        throw std::invalid_argument("bad slot '{" + body + "}'");
      out.push_back({TemplateToken::Kind::slot, "", body, {}});
      continue;
    }
    std::string cat = body.substr(0, colon);
    auto at = body.find('@', colon);
    auto dot = body.find('.', at == std::string::npos ? colon : at);
    if (at == std::string::npos || dot == std::string::npos || at + 1 >= dot)
      throw std::invalid_argument("expected '{" + cat + ":lemma@var.feature}'");
    TemplateToken t{TemplateToken::Kind::inflect, body.substr(colon + 1, at - colon - 1),
                    body.substr(at + 1, dot - at - 1), {}};
    std::string feature = body.substr(dot + 1);
    if (feature == "tense")
      t.feature = GrammarFeature::tense;
    else if (feature == "number")
      t.feature = GrammarFeature::number;
    else
      throw std::invalid_argument("unsupported grammatical feature '" + feature +
                                  "' (only tense and number)");
    if (cat != "verb" && cat != "noun")
      throw std::invalid_argument("unknown word class '" + cat + "'");
    if (t.text.empty()) throw std::invalid_argument("empty lemma in template");
    out.push_back(std::move(t));
  }
  flush();
  return out;
}

std::optional<Tense> tense_of(const ConceptGraph& g, const ConceptId& c) {
  if (!g.contains(c)) return std::nullopt;
  if (g.features(c).tense) return g.features(c).tense;
  for (const auto& [p, sig] : g.predicates())
    if (sig.subject == c && sig.object && g.has_type(p, "time"))
      if (auto t = parse_tense(*sig.object)) return t;
  return std::nullopt;
}

std::string surface_of(const ConceptId& c, const Lexicon& lex, Diagnostics* diag) {
  if (auto s = lex.surface(c)) return *s;
  if (diag) diag->warn("no surface form for '" + c + "'");
  std::string s = c;
  for (auto& ch : s)
    if (ch == '_') ch = ' ';
  return s;
}

std::string realize(const Template& t, const Solution& sol, const ConceptGraph& wm,
                    const Lexicon& lex, Diagnostics* diag) {
  auto bound = [&](const ConceptId& v) -> const ConceptId& {
    auto it = sol.bindings.find(v);
    if (it == sol.bindings.end())
      throw UnboundVariable("template of '" + t.rule + "' needs a binding for '" + v + "'");
    return it->second;
  };
  std::string raw;
  for (const auto& tok : t.tokens) {
    switch (tok.kind) {
      case TemplateToken::Kind::literal:
        raw += tok.text;
        break;
      case TemplateToken::Kind::slot:
        raw += surface_of(bound(tok.var), lex, diag);
        break;
      case TemplateToken::Kind::inflect: {
        const ConceptId& gov = bound(tok.var);
        if (tok.feature == GrammarFeature::tense) {
          auto tense = tense_of(wm, gov);
          raw += inflect_verb(tok.text, tense.value_or(Tense::now));
        } else {
          bool group = wm.contains(gov) && wm.has_type(gov, "group");
          raw += group ? pluralize(tok.text) : tok.text;
        }
        break;
      }
    }
  }
  // Collapse whitespace and capitalize the first letter.
  std::string out;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  for (auto& c : out)
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    }
  return out;
}

std::string compose(const std::optional<std::string>& reaction,
                    const std::optional<std::string>& presentation) {
  std::string out;
  for (const auto* seg : {&reaction, &presentation}) {
    if (!*seg) continue;
    std::istringstream words(**seg);
    for (std::string w; words >> w;) {
      if (!out.empty()) out += ' ';
      out += w;
    }
  }
  if (out.empty()) throw EmptyResponse("both response segments are empty");
  return out;
}

}  // namespace cgchat
