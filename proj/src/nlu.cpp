#include "cgchat/nlu.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace cgchat {

const char* to_string(SpanSource s) {
  switch (s) {
    case SpanSource::gazetteer:
      return "gazetteer";
    case SpanSource::ner:
      return "ner";
    case SpanSource::pos:
      return "pos";
  }
  return "pos";
}

const char* to_string(SpanKind k) {
  switch (k) {
    case SpanKind::instance:
      return "instance";
    case SpanKind::entity_type:
      return "entity_type";
    case SpanKind::predicate_type:
      return "predicate_type";
  }
  return "instance";
}

// ---------------------------------------------------------------------------
// Parse input

void validate(const ParseInput& p) {
  const int n = static_cast<int>(p.tokens.size());
  std::vector<NerSpan> ner = p.ner;
  std::sort(ner.begin(), ner.end(), [](auto& a, auto& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < ner.size(); ++i) {
    const auto& s = ner[i];
    if (s.start < 0 || s.end > n || s.start >= s.end)
      throw InvalidParse("NER span " + std::to_string(s.start) + ".." +
                         std::to_string(s.end) + " out of range");
    if (i > 0 && ner[i - 1].end > s.start)
      throw InvalidParse("overlapping NER spans at token " + std::to_string(s.start));
  }
  for (const auto& d : p.deps)
    if (d.head < 0 || d.head >= n || d.child < 0 || d.child >= n)
      throw InvalidParse("dependency " + d.rel + " index out of range");
}

std::vector<ParseInput> parse_fixtures(std::string_view text, const std::string& path) {
  std::vector<ParseInput> out;
  std::istringstream is{std::string(text)};
  std::string line;
  int n = 0;
  std::optional<ParseInput> cur;
  int block_line = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw CompileError("FixtureError", path, n, 1, msg);
  };
  auto ints = [&](std::istringstream& ls, int& a, int& b) {
    if (!(ls >> a >> b)) fail("expected two token indices");
  };
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line.substr(first));
    std::string key;
    ls >> key;
    std::string rest;
    std::getline(ls >> std::ws, rest);
    if (key == "UTTERANCE") {
      if (cur) fail("UTTERANCE inside an open block");
      cur.emplace();
      cur->text = rest;
      block_line = n;
      continue;
    }
    if (!cur) fail("'" + key + "' outside an UTTERANCE block");
    std::istringstream rs(rest);
    if (key == "CASED") {
      if (rest != "true" && rest != "false") fail("CASED takes true or false");
      cur->cased = rest == "true";
    } else if (key == "TOK") {
      cur->tokens = split_tokens(rest);
    } else if (key == "POS") {
      cur->pos = split_tokens(rest);
    } else if (key == "NER") {
      NerSpan s;
      ints(rs, s.start, s.end);
      if (!(rs >> s.label)) fail("NER needs a label");
      cur->ner.push_back(s);
    } else if (key == "DEP") {
      DepEdge d;
      ints(rs, d.head, d.child);
      if (!(rs >> d.rel)) fail("DEP needs a relation");
      cur->deps.push_back(d);
    } else if (key == "END") {
      if (cur->tokens.empty()) fail("block has no TOK line");
      try {
        validate(*cur);
      } catch (const InvalidParse& e) {
        throw CompileError("FixtureError", path, block_line, 1, e.what());
      }
      out.push_back(std::move(*cur));
      cur.reset();
    } else {
      fail("unknown fixture key '" + key + "'");
    }
  }
  if (cur) throw CompileError("FixtureError", path, block_line, 1, "block without END");
  return out;
}

ParseInput naive_parse(const std::string& text) {
  ParseInput p;
  p.text = text;
  p.cased = false;
  for (auto w : split_tokens(text)) {
    std::vector<std::string> tail;
    while (w.size() > 1 && std::string_view(".,!?;:").find(w.back()) != std::string_view::npos) {
      tail.insert(tail.begin(), std::string(1, w.back()));
      w.pop_back();
    }
    p.tokens.push_back(w);
    p.tokens.insert(p.tokens.end(), tail.begin(), tail.end());
  }
  p.pos.assign(p.tokens.size(), "x");
  return p;
}

// ---------------------------------------------------------------------------
// Gazetteer

struct Gazetteer::Automaton {
  struct Node {
    std::map<std::string, int> next;
    int fail = 0;
    std::vector<int> out;  // pattern indices
  };
  struct Pattern {
    std::size_t length;
    ConceptId concept_id;
    std::size_t surface_length;
  };
  std::vector<Node> nodes{1};
  std::vector<Pattern> patterns;

  void add(const std::vector<std::string>& toks, const ConceptId& c, std::size_t chars) {
    int s = 0;
    for (const auto& t : toks) {
      auto it = nodes[s].next.find(t);
      if (it == nodes[s].next.end()) {
        nodes.emplace_back();
        it = nodes[s].next.emplace(t, static_cast<int>(nodes.size()) - 1).first;
      }
      s = it->second;
    }
    if (!nodes[s].out.empty()) return;  // same token sequence: first declared wins
    nodes[s].out.push_back(static_cast<int>(patterns.size()));
    patterns.push_back({toks.size(), c, chars});
  }

  void build() {
    std::deque<int> queue;
    for (auto& [t, v] : nodes[0].next) queue.push_back(v);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (auto& [t, v] : nodes[u].next) {
        int f = nodes[u].fail;
        while (f && !nodes[f].next.count(t)) f = nodes[f].fail;
        auto it = nodes[f].next.find(t);
        nodes[v].fail = (it != nodes[f].next.end() && it->second != v) ? it->second : 0;
        const auto& inherited = nodes[nodes[v].fail].out;
        nodes[v].out.insert(nodes[v].out.end(), inherited.begin(), inherited.end());
        queue.push_back(v);
      }
    }
  }

  int step(int s, const std::string& t) const {
    while (s && !nodes[s].next.count(t)) s = nodes[s].fail;
    auto it = nodes[s].next.find(t);
    return it == nodes[s].next.end() ? 0 : it->second;
  }
};

Gazetteer::Gazetteer(const Lexicon& lex, const ConceptGraph& kb) : kb_(&kb) {
  auto cased = std::make_shared<Automaton>();
  auto uncased = std::make_shared<Automaton>();
  for (const auto& e : lex.entries()) {
    auto toks = split_tokens(e.surface);
    cased->add(toks, e.target, e.surface.size());
    for (auto& t : toks) t = lowercase(t);
    uncased->add(toks, e.target, e.surface.size());
  }
  cased->build();
  uncased->build();
  cased_ = std::move(cased);
  uncased_ = std::move(uncased);
  for (const auto& [p, sig] : kb.predicates())
    if (sig.subject && kb.has_type(p, "transitive")) transitive_.insert(*sig.subject);
}

std::vector<Gazetteer::Hit> Gazetteer::all_hits(const std::vector<std::string>& tokens,
                                                bool cased) const {
  const Automaton& a = cased ? *cased_ : *uncased_;
  std::vector<Hit> hits;
  int s = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    s = a.step(s, cased ? tokens[i] : lowercase(tokens[i]));
    for (int pid : a.nodes[s].out) {
      const auto& p = a.patterns[pid];
      int end = static_cast<int>(i) + 1;
      hits.push_back({end - static_cast<int>(p.length), end, p.concept_id, p.surface_length});
    }
  }
  return hits;
}

SpanKind Gazetteer::classify(const ConceptId& c) const {
  if (!kb_->contains(c)) return SpanKind::instance;
  if (kb_->has_type(c, "predicate")) return SpanKind::predicate_type;
  if (kb_->is_type(c)) return SpanKind::entity_type;
  return SpanKind::instance;
}

std::vector<SpanConcept> Gazetteer::match(const std::vector<std::string>& tokens,
                                          bool cased) const {
  auto hits = all_hits(tokens, cased);
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    if (a.surface_length != b.surface_length) return a.surface_length > b.surface_length;
    return a.concept_id < b.concept_id;
  });
  std::vector<SpanConcept> out;
  int cursor = 0;
  for (const auto& h : hits) {
    if (h.start < cursor) continue;
    SpanConcept sc;
    sc.start = h.start;
    sc.end = h.end;
    sc.source = SpanSource::gazetteer;
    sc.label = h.concept_id;
    sc.kind = classify(h.concept_id);
    sc.expects_object = sc.kind == SpanKind::predicate_type && transitive(h.concept_id);
    out.push_back(std::move(sc));
    cursor = h.end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Span-to-concept map

const SpanConcept* SpanConceptMap::containing(int i) const {
  for (const auto& e : entries)
    if (e.start <= i && i < e.end) return &e;
  return nullptr;
}

ConceptGraph SpanConceptMap::graph() const {
  ConceptGraph g;
  for (const auto& e : entries) {
    switch (e.kind) {
      case SpanKind::instance:
        g.add_concept(e.focal);
        break;
      case SpanKind::entity_type:
        g.add_type(e.focal, e.label);
        break;
      case SpanKind::predicate_type:
        g.add_predicate(e.focal, e.label, std::nullopt, std::nullopt);
        break;
    }
  }
  return g;
}

std::string tag_concept(const std::string& tag) {
  std::string out = lowercase(tag);
  bool any = false;
  for (auto& c : out) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      any = true;
    else
      c = '_';
  }
  return any ? out : "punct";
}

std::vector<SpanConcept> ner_concepts(const ParseInput& p) {
  std::vector<SpanConcept> out;
  for (const auto& s : p.ner)
    out.push_back({s.start, s.end, SpanSource::ner, SpanKind::entity_type, tag_concept(s.label)});
  return out;
}

std::vector<SpanConcept> pos_concepts(const ParseInput& p) {
  std::vector<SpanConcept> out;
  for (std::size_t i = 0; i < p.pos.size() && i < p.tokens.size(); ++i) {
    int k = static_cast<int>(i);
    out.push_back({k, k + 1, SpanSource::pos, SpanKind::entity_type, tag_concept(p.pos[i])});
  }
  return out;
}

SpanConceptMap merge_span_concepts(const std::vector<SpanConcept>& gaz,
                                   const std::vector<SpanConcept>& ner,
                                   const std::vector<SpanConcept>& pos, int n_tokens,
                                   IdGen& ids) {
  std::vector<int> owner(n_tokens, -1);
  SpanConceptMap m;
  auto free = [&](const SpanConcept& s) {
    if (s.start < 0 || s.end > n_tokens || s.start >= s.end) return false;
    for (int i = s.start; i < s.end; ++i)
      if (owner[i] >= 0) return false;
    return true;
  };
  auto take = [&](const SpanConcept& s) {
    for (int i = s.start; i < s.end; ++i) owner[i] = static_cast<int>(m.entries.size());
    m.entries.push_back(s);
  };
  for (const auto& s : gaz) {
    if (!free(s)) throw CoverageError("gazetteer spans overlap");
    take(s);
  }
  for (const auto& s : ner)
    if (free(s)) take(s);
  for (const auto& s : pos)
    if (free(s)) take(s);
  for (int i = 0; i < n_tokens; ++i)
    if (owner[i] < 0) throw CoverageError("token " + std::to_string(i) + " has no concept");

  std::sort(m.entries.begin(), m.entries.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  for (auto& e : m.entries)
    e.focal = e.kind == SpanKind::instance ? e.label : ids.fresh(e.label);
  return m;
}

// ---------------------------------------------------------------------------
// Parse graph and transformations

std::string token_concept(int i) { return "tok_" + std::to_string(i); }

ConceptGraph build_parse_cg(const ParseInput& p) {
  ConceptGraph g;
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    auto t = token_concept(static_cast<int>(i));
    g.add_concept(t);
    if (i < p.pos.size()) g.add_type(t, tag_concept(p.pos[i]));
  }
  for (std::size_t k = 0; k < p.deps.size(); ++k) {
    const auto& d = p.deps[k];
    g.add_predicate("dep_" + std::to_string(k), d.rel, token_concept(d.head),
                    token_concept(d.child));
  }
  return g;
}

namespace {

int token_index(const ConceptId& c) {
  if (c.rfind("tok_", 0) != 0)
    throw DanglingSpan("'" + c + "' is not a token span");
  return std::stoi(c.substr(4));
}

void warn(Diagnostics* diag, std::string msg) {
  if (diag) diag->warn(std::move(msg));
}

void attach(ConceptGraph& g, const ConceptAttachment& a,
            const std::map<ConceptId, bool>& expects, Diagnostics* diag) {
  if (a.slot == EdgeLabel::T) {
    try {
      g.add_type(a.from, a.to);
    } catch (const CycleError& e) {
      warn(diag, e.what());
    }
    return;
  }
  if (a.from == a.to) {
    warn(diag, "skipped self attachment on '" + a.from + "'");
    return;
  }
  if (!g.is_predicate(a.from)) {
    warn(diag, "skipped " + std::string(to_string(a.slot)) + " attachment on non-predicate '" +
                   a.from + "'");
    return;
  }
  if (a.slot == EdgeLabel::ARG1) {
    auto it = expects.find(a.from);
    if (it != expects.end() && !it->second) {
      warn(diag, "'" + a.from + "' takes no object; dropped '" + a.to + "'");
      return;
    }
  }
  Signature sig = g.signature(a.from);
  auto& slot = a.slot == EdgeLabel::ARG0 ? sig.subject : sig.object;
  if (slot) {
    if (*slot != a.to)
      warn(diag, "conflicting " + std::string(to_string(a.slot)) + " for '" + a.from +
                     "': kept '" + *slot + "', dropped '" + a.to + "'");
    return;
  }
  slot = a.to;
  g.set_signature(a.from, sig);
}

}  // namespace

TransformResult apply_transformations(const std::vector<const Rule*>& rules,
                                      const ConceptGraph& parse_cg,
                                      const SpanConceptMap& scm, IdGen& ids,
                                      Diagnostics* diag) {
  TransformResult out;
  out.graph = scm.graph();
  std::map<ConceptId, bool> expects;
  for (const auto& e : scm.entries)
    if (e.kind == SpanKind::predicate_type) expects[e.focal] = e.expects_object;

  auto concept_at = [&](int i) {
    const SpanConcept* e = scm.containing(i);
    if (!e) throw DanglingSpan("token " + std::to_string(i) + " lies in no mapped span");
    return e->focal;
  };
  auto bound = [](const Solution& s, const ConceptId& v) { return token_index(s.bindings.at(v)); };

  const DataIndex index(parse_cg);
  for (const Rule* r : rules) {
    for (const auto& sol : match(r->precondition, index)) {
      TransformApplication app{r->name, sol, {}, {}};
      for (const auto& a : r->attachments) {
        int i = bound(sol, a.from), j = bound(sol, a.to);
        app.spans.emplace_back(i, j);
        app.attachments.push_back({concept_at(i), a.slot, concept_at(j)});
      }
      for (const auto& a : app.attachments) attach(out.graph, a, expects, diag);
      for (const auto& [var, tense] : r->tenses) {
        ConceptId c = concept_at(bound(sol, var));
        if (!out.graph.is_predicate(c) || out.graph.features(c).tense) continue;
        out.graph.add_predicate(ids.fresh("time"), "time", c, to_string(tense));
        out.graph.features(c).tense = tense;
      }
      for (const auto& d : r->refs) {
        ConceptId focus = concept_at(bound(sol, d.focus));
        std::optional<ConceptId> target;
        if (d.target) target = concept_at(bound(sol, *d.target));
        const char* type = d.is_var ? "var" : "ref";
        out.graph.add_predicate(ids.fresh(type), type, focus, target);
      }
      out.applied.push_back(std::move(app));
    }
  }
  return out;
}

NluResult understand(const ParseInput& p, const Gazetteer& gaz,
                     const std::vector<const Rule*>& transforms, IdGen& ids,
                     Diagnostics* diag) {
  validate(p);
  NluResult r;
  r.scm = merge_span_concepts(gaz.match(p.tokens, p.cased), ner_concepts(p), pos_concepts(p),
                              static_cast<int>(p.tokens.size()), ids);
  r.parse_cg = build_parse_cg(p);
  r.transformed = apply_transformations(transforms, r.parse_cg, r.scm, ids, diag);
  return r;
}

}  // namespace cgchat
