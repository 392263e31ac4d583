#include "cgchat/engine.hpp"

#include <chrono>
#include <sstream>

#include "cgchat/inference.hpp"
#include "cgchat/nlg.hpp"

namespace cgchat {

using nlohmann::json;

Engine::Engine(ContentPack pack)
    : pack_(std::move(pack)), gaz_(pack_.lexicon, pack_.kb), index_(pack_.kb) {
  inference_ = pack_.of_kind(RuleKind::inference);
  transforms_ = pack_.of_kind(RuleKind::transformation);
  responses_ = pack_.responses();
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ParseInput Engine::parse_for(const std::string& text) const {
  std::string t = trim(text);
  if (t.empty()) return ParseInput{};
  auto it = pack_.fixtures.find(t);
  if (it != pack_.fixtures.end()) return it->second;
  if (pack_.manifest.naive_parse) return naive_parse(t);
  throw ParseFixtureMissing("no parse fixture for \"" + t + "\"");
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const ParseInput& p) {
  json ner = json::array(), deps = json::array();
  for (const auto& n : p.ner) ner.push_back({n.start, n.end, n.label});
  for (const auto& d : p.deps) deps.push_back({d.head, d.child, d.rel});
  return {{"text", p.text}, {"tokens", p.tokens}, {"pos", p.pos},
          {"ner", ner},     {"deps", deps},       {"cased", p.cased}};
}

ParseInput parse_input_from_json(const json& j) {
  ParseInput p;
  p.text = j.value("text", "");
  p.tokens = j.value("tokens", std::vector<std::string>{});
  p.pos = j.value("pos", std::vector<std::string>{});
  p.cased = j.value("cased", true);
  for (const auto& n : j.value("ner", json::array()))
    p.ner.push_back({n.at(0).get<int>(), n.at(1).get<int>(), n.at(2).get<std::string>()});
  for (const auto& d : j.value("deps", json::array()))
    p.deps.push_back({d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<std::string>()});
  if (p.pos.empty() && !p.tokens.empty()) p.pos.assign(p.tokens.size(), "x");
  validate(p);
  return p;
}

json to_json(const TurnRecord& r, bool with_timings) {
  json cands = json::array();
  for (const auto& c : r.candidates)
    cands.push_back({{"rule", c.rule},
                     {"type", to_string(c.rtype)},
                     {"priority", to_string(c.priority)},
                     {"score", c.score},
                     {"mean_salience", c.mean_salience},
                     {"d_set", c.d_set},
                     {"bindings", c.bindings},
                     {"selected", c.selected}});
  json res = json::array(), contra = json::array();
  for (const auto& x : r.resolutions) res.push_back({{"focus", x.focus}, {"referent", x.referent}});
  for (const auto& [a, b] : r.contradictions) contra.push_back({a, b});
  auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
  json j = {{"turn", r.turn},
            {"input", r.input},
            {"parse", to_json(r.parse)},
            {"utterance", r.utterance},
            {"fired", r.fired},
            {"resolutions", res},
            {"contradictions", contra},
            {"candidates", cands},
            {"reaction", opt(r.reaction)},
            {"presentation", opt(r.presentation)},
            {"reaction_text", opt(r.reaction_text)},
            {"presentation_text", opt(r.presentation_text)},
            {"response", r.response},
            {"added", r.added},
            {"pruned", r.pruned},
            {"wm_before_prune", r.wm_before_prune},
            {"wm_after_prune", r.wm_after_prune},
            {"warnings", r.warnings}};
  if (with_timings) j["timings_ms"] = r.timings_ms;
  return j;
}

json to_json(const WorkingMemory& wm) {
  const auto& g = wm.graph;
  json concepts = json::array();
  for (const auto& [c, f] : g.nodes()) {
    json e = {{"id", c},
              {"types", std::vector<ConceptId>(g.parents(c).begin(), g.parents(c).end())},
              {"salience", f.salience},
              {"last_mention", f.last_mention},
              {"pinned", f.pinned || wm.pinned.count(c) > 0},
              {"is_type", g.is_type(c)}};
    if (const Signature* sig = g.find_signature(c)) {
      e["subject"] = sig->subject ? json(*sig->subject) : json(nullptr);
      e["object"] = sig->object ? json(*sig->object) : json(nullptr);
      e["truth"] = to_string(f.truth);
      e["covered"] = f.covered;
    }
    if (f.tense) e["tense"] = to_string(*f.tense);
    concepts.push_back(std::move(e));
  }
  json fired = json::array();
  for (const auto& k : wm.fired) fired.push_back({{"rule", k.rule}, {"bindings", k.bindings}});
  return {{"turn", wm.turn}, {"concepts", concepts}, {"fired", fired}};
}

// ---------------------------------------------------------------------------
// Conversation

Conversation::Conversation(const Engine& engine, std::vector<std::string> seeds)
    : engine_(&engine), seeds_(std::move(seeds)) {
  const ContentPack& pack = engine.pack();
  const ConceptGraph* kb = &pack.kb;
  ids_ = IdGen([kb](const ConceptId& c) { return kb->contains(c); });
  for (const auto& p : pack.manifest.pinned) {
    wm_.graph.add_concept(p);
    if (kb->contains(p))
      for (const auto& t : kb->parents(p)) wm_.graph.add_type(p, t);
    wm_.pinned.insert(p);
  }
  for (const auto& s : seeds_) {
    auto r = compile(s, "<seed>", pack.kb, ids_);
    wm_.graph.union_with(r.knowledge);
    for (const auto& [c, f] : r.knowledge.nodes())
      if (!r.knowledge.is_type(c)) mention(wm_, c, pack.manifest.salience);
  }
}

TurnRecord Conversation::turn(const std::string& text) {
  ParseInput p = engine_->parse_for(text);
  p.text = text;
  return turn(p);
}

namespace {

struct Realized {
  std::string text;
  std::vector<ConceptId> verbalized;
};

Realized realize_candidate(const Candidate& c, const ContentPack& pack, const ConceptGraph& wm,
                           Diagnostics* diag) {
  for (const Template* t : pack.templates_for(c.rule->name)) {
    Solution seed;
    for (const auto& v : t->precondition.variables) {
      auto it = c.solution.bindings.find(v);
      if (it != c.solution.bindings.end()) seed.bindings[v] = it->second;
    }
    auto sols = match(t->precondition, wm, seed);
    if (sols.empty()) continue;
    Realized out{realize(*t, sols.front(), wm, pack.lexicon, diag), {}};
    for (const auto& tok : t->tokens)
      if (tok.kind == TemplateToken::Kind::slot) out.verbalized.push_back(sols.front().bindings.at(tok.var));
    return out;
  }
  throw Error("no template of '" + c.rule->name + "' matches its candidate");
}

}  // namespace

TurnRecord Conversation::turn(const ParseInput& p) {
  using clock = std::chrono::steady_clock;
  const ContentPack& pack = engine_->pack();
  const SalienceConfig& cfg = pack.manifest.salience;
  const int threads = pack.manifest.threads;

  WorkingMemory wm = wm_;
  IdGen ids = ids_;
  Diagnostics diag;
  TurnRecord rec;
  rec.turn = wm.turn + 1;
  rec.input = p.text;
  rec.parse = p;

  auto t0 = clock::now();
  auto lap = [&](const char* stage) {
    auto now = clock::now();
    rec.timings_ms[stage] = std::chrono::duration<double, std::milli>(now - t0).count();
    t0 = now;
  };

  ConceptGraph utt;
  if (!p.tokens.empty()) utt = understand(p, engine_->gazetteer(), engine_->transforms(), ids, &diag).graph();
  rec.utterance = serialize(utt);
  lap("nlu");

  ingest_turn(wm, utt, cfg);
  lap("ingest");
  retrieve_knowledge(wm, engine_->kb_index(), cfg);
  lap("retrieve");
  for (const auto& f : apply_rules(wm, engine_->inference_rules(), pack.manifest.inference_passes,
                                   ids, threads))
    rec.fired.push_back(f.rule + " " + format_solution(f.solution));
  lap("infer");
  rec.resolutions = resolve_references(wm);
  rec.contradictions = detect_contradictions(wm);
  lap("resolve");

  auto cands = identify_candidates(wm, engine_->response_rules(), threads);
  Selection sel = select_compound(cands);
  for (const auto& c : cands) {
    bool chosen = (sel.reaction && sel.reaction->key() == c.key()) ||
                  (sel.presentation && sel.presentation->key() == c.key());
    rec.candidates.push_back({c.rule->name, c.rtype(), c.priority(), c.score, c.mean_salience,
                              c.d_set, c.solution.bindings, chosen});
  }
  lap("select");

  std::vector<ConceptId> verbalized;
  std::vector<ConceptGraph> effects;
  auto speak = [&](const std::optional<Candidate>& c, std::optional<std::string>& name,
                   std::optional<std::string>& text) {
    if (!c) return;
    auto r = realize_candidate(*c, pack, wm.graph, &diag);
    name = c->rule->name;
    text = r.text;
    verbalized.insert(verbalized.end(), r.verbalized.begin(), r.verbalized.end());
    if (!c->rule->postcondition.empty()) effects.push_back(instantiate(*c->rule, c->solution, ids));
  };
  speak(sel.reaction, rec.reaction, rec.reaction_text);
  speak(sel.presentation, rec.presentation, rec.presentation_text);
  rec.response = compose(rec.reaction_text, rec.presentation_text);
  commit_selection(wm, sel);
  for (const auto& e : effects) {
    wm.graph.union_with(e);
    for (const auto& [c, f] : e.nodes())
      if (!e.is_type(c)) mention(wm, c, cfg);
  }
  for (const auto& c : verbalized)
    if (wm.graph.contains(c)) mention(wm, c, cfg);
  lap("nlg");

  update_salience(wm, cfg);
  rec.wm_before_prune = wm.graph.size();
  auto gone = prune(wm, cfg);
  rec.pruned.assign(gone.begin(), gone.end());
  rec.wm_after_prune = wm.graph.size();
  for (const auto& [c, f] : wm.graph.nodes())
    if (!wm_.graph.contains(c)) rec.added.push_back(c);
  lap("salience");

  rec.warnings = diag.warnings;
  wm_ = std::move(wm);
  ids_ = ids;
  history_.push_back(rec);
  return rec;
}

std::string conversation_log(const Conversation& c) {
  std::string out = json{{"seeds", c.seeds()}}.dump() + "\n";
  for (const auto& r : c.history()) out += to_json(r).dump() + "\n";
  return out;
}

ReplayResult replay(const Engine& engine, const std::string& ndjson) {
  ReplayResult out;
  std::istringstream in(ndjson);
  std::string line;
  std::vector<json> lines;
  while (std::getline(in, line))
    if (!trim(line).empty()) lines.push_back(json::parse(line));
  if (lines.empty() || !lines[0].contains("seeds"))
    throw Error("replay log needs a header line with \"seeds\"");

  Conversation conv(engine, lines[0]["seeds"].get<std::vector<std::string>>());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    json expected = lines[i];
    expected.erase("timings_ms");
    auto rec = conv.turn(parse_input_from_json(expected.at("parse")));
    out.responses.push_back(rec.response);
    json got = to_json(rec, false);
    if (out.identical && got != expected) {
      out.identical = false;
      out.first_divergent_turn = rec.turn;
      out.detail = "expected response \"" + expected.value("response", "") + "\", got \"" +
                   rec.response + "\"";
    }
  }
  out.final_memory = to_json(conv.memory());
  return out;
}

// ---------------------------------------------------------------------------
// Goldens

Golden parse_golden(const std::string& text, const std::string& name) {
  Golden g;
  g.name = name;
  std::istringstream in(text);
  std::string line, pending;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto colon = t.find(':');
    std::string tag = colon == std::string::npos ? "" : t.substr(0, colon);
    std::string body = colon == std::string::npos ? "" : trim(t.substr(colon + 1));
    if (tag == "seed")
      g.seeds.push_back(body);
    else if (tag == "user")
      pending = body;
    else if (tag == "bot") {
      g.turns.push_back({pending, body});
      pending.clear();
    } else
      throw CompileError("GoldenError", name, n, 1, "expected seed:, user: or bot:");
  }
  return g;
}

GoldenResult run_golden(const Engine& engine, const Golden& g) {
  GoldenResult out;
  Conversation conv(engine, g.seeds);
  for (const auto& t : g.turns) {
    auto rec = conv.turn(t.user);
    out.responses.push_back(rec.response);
    if (out.pass && rec.response != t.bot) {
      out.pass = false;
      out.first_divergent_turn = rec.turn;
      out.expected = t.bot;
      out.actual = rec.response;
    }
  }
  return out;
}

std::vector<std::string> validate_pack(const std::filesystem::path& manifest) {
  std::vector<std::string> problems;
  std::unique_ptr<Engine> engine;
  try {
    engine = std::make_unique<Engine>(load_pack(manifest));
  } catch (const CompileError& e) {
    problems.push_back(e.what());
    return problems;
  } catch (const Error& e) {
    problems.push_back(e.what());
    return problems;
  }
  for (const auto& path : engine->pack().manifest.goldens) {
    auto full = engine->pack().root / path;
    try {
      auto r = run_golden(*engine, parse_golden(read_file(full), path));
      if (!r.pass)
        problems.push_back(path + ": turn " + std::to_string(r.first_divergent_turn) +
                           " expected \"" + r.expected + "\" got \"" + r.actual + "\"");
    } catch (const std::exception& e) {
      problems.push_back(path + ": " + e.what());
    }
  }
  return problems;
}

}  // namespace cgchat
