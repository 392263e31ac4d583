#include "cgchat/content_pack.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cgchat {

using nlohmann::json;

void SalienceConfig::check() const {
  auto unit = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0))
      throw std::invalid_argument(std::string(name) + " must lie in (0, 1]");
  };
  unit(mention_value, "mention_value");
  unit(turn_decay, "turn_decay");
  unit(propagation_delta, "propagation_delta");
  unit(retrieval_threshold, "retrieval_threshold");
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");
  if (retrieval_hops < 0) throw std::invalid_argument("retrieval_hops must be >= 0");
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<const Rule*> ContentPack::of_kind(RuleKind k) const {
  std::vector<const Rule*> out;
  for (const auto& r : rules)
    if (r.kind == k) out.push_back(&r);
  return out;
}

std::vector<const Rule*> ContentPack::responses() const {
  std::vector<const Rule*> out;
  for (const auto& r : rules)
    if (r.is_response()) out.push_back(&r);
  return out;
}

const Rule* ContentPack::rule(const std::string& name) const {
  for (const auto& r : rules)
    if (r.name == name) return &r;
  return nullptr;
}

std::vector<const Template*> ContentPack::templates_for(const std::string& rule) const {
  std::vector<const Template*> out;
  for (const auto& t : templates)
    if (t.rule == rule) out.push_back(&t);
  return out;
}

Manifest parse_manifest(const std::string& json_text) {
  Manifest m;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  auto list = [&](const char* key, std::vector<std::string>& out) {
    if (j.contains(key)) out = j.at(key).get<std::vector<std::string>>();
  };
  try {
    list("kb", m.kb);
    list("rules", m.rules);
    list("templates", m.templates);
    list("lexicon", m.lexicon);
    list("fixtures", m.fixtures);
    list("goldens", m.goldens);
    list("pinned", m.pinned);
    m.inference_passes = j.value("inference_passes", m.inference_passes);
    m.naive_parse = j.value("naive_parse", m.naive_parse);
    m.port = j.value("port", m.port);
    m.threads = j.value("threads", m.threads);
    if (j.contains("salience")) {
      const auto& s = j.at("salience");
      auto& c = m.salience;
      c.mention_value = s.value("mention_value", c.mention_value);
      c.turn_decay = s.value("turn_decay", c.turn_decay);
      c.propagation_delta = s.value("propagation_delta", c.propagation_delta);
      c.cap = s.value("cap", c.cap);
      c.retrieval_threshold = s.value("retrieval_threshold", c.retrieval_threshold);
      c.retrieval_hops = s.value("retrieval_hops", c.retrieval_hops);
      std::string passes = s.value("propagation_passes", std::string("fixpoint"));
      if (passes != "fixpoint" && passes != "1")
        throw std::invalid_argument("propagation_passes must be \"fixpoint\" or \"1\"");
      c.propagate_to_fixpoint = passes == "fixpoint";
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  if (m.inference_passes < 0) throw std::invalid_argument("inference_passes must be >= 0");
  m.salience.check();
  return m;
}

namespace {

void add_fixtures(ContentPack& pack, const std::string& text, const std::string& path) {
  for (auto& p : parse_fixtures(text, path)) {
    std::string key = p.text;
    if (!pack.fixtures.emplace(key, std::move(p)).second)
      throw CompileError("FixtureError", path, 1, 1, "duplicate utterance '" + key + "'");
  }
}

void compile_into(ContentPack& pack, const std::string& text, const std::string& path,
                  IdGen& ids) {
  auto r = compile(text, path, pack.kb, ids);
  try {
    pack.kb.union_with(r.knowledge);
  } catch (const Error& e) {
    throw CompileError("UnionError", path, 1, 1, e.what());
  }
  for (auto& rule : r.rules) {
    if (pack.rule(rule.name))
      throw CompileError("RedefinitionError", path, rule.line, 1,
                         "rule '" + rule.name + "' is defined twice");
    pack.rules.push_back(std::move(rule));
  }
  for (auto& t : r.templates) pack.templates.push_back(std::move(t));
  for (auto& w : r.diagnostics.warnings) pack.diagnostics.warn(std::move(w));
}

void finish(ContentPack& pack) {
  auto problems = audit_templates(pack);
  if (!problems.empty()) throw CompileError("PairingError", "<pack>", 1, 1, problems.front());
}

}  // namespace

std::vector<std::string> audit_templates(const ContentPack& pack) {
  std::vector<std::string> out;
  for (const auto& t : pack.templates) {
    const Rule* r = pack.rule(t.rule);
    if (!r || !r->is_response())
      out.push_back("template for '" + t.rule + "' names no response rule");
  }
  for (const Rule* r : pack.responses()) {
    auto ts = pack.templates_for(r->name);
    if (ts.empty()) {
      out.push_back("response rule '" + r->name + "' has no template");
      continue;
    }
    // The rule's own precondition, read as data, is the most general
    // situation in which it fires.
    ConceptGraph data = pack.kb;
    try {
      data.union_with(r->precondition.graph);
    } catch (const Error& e) {
      out.push_back("response rule '" + r->name + "': " + e.what());
      continue;
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      Solution seed;
      for (const auto& v : ts[i]->precondition.variables)
        if (r->precondition.variables.count(v)) seed.bindings.emplace(v, v);
      if (match(ts[i]->precondition, data, seed).empty())
        out.push_back("template " + std::to_string(i + 1) + " of '" + r->name +
                      "' does not cover the rule's precondition");
    }
  }
  return out;
}

ContentPack load_pack(const std::filesystem::path& manifest_path) {
  ContentPack pack;
  pack.root = manifest_path.parent_path();
  try {
    pack.manifest = parse_manifest(read_file(manifest_path));
  } catch (const std::invalid_argument& e) {
    throw CompileError("ManifestError", manifest_path.string(), 1, 1, e.what());
  }
  IdGen ids;
  auto each = [&](const std::vector<std::string>& files, auto&& fn) {
    for (const auto& f : files) {
      auto p = pack.root / f;
      std::string text;
      try {
        text = read_file(p);
      } catch (const std::runtime_error& e) {
        throw CompileError("MissingFile", p.string(), 1, 1, e.what());
      }
      fn(text, p.string());
    }
  };
  each(pack.manifest.kb, [&](const std::string& text, const std::string& path) { compile_into(pack, text, path, ids); });
  each(pack.manifest.rules, [&](const std::string& text, const std::string& path) { compile_into(pack, text, path, ids); });
  each(pack.manifest.templates,
       [&](const std::string& text, const std::string& path) { compile_into(pack, text, path, ids); });
  each(pack.manifest.lexicon,
       [&](const std::string& text, const std::string& path) { pack.lexicon.merge(Lexicon::parse(text, path)); });
  each(pack.manifest.fixtures, [&](const std::string& text, const std::string& path) { add_fixtures(pack, text, path); });
  for (const auto& g : pack.manifest.goldens)
    if (!std::filesystem::exists(pack.root / g))
      throw CompileError("MissingFile", (pack.root / g).string(), 1, 1, "golden not found");
  finish(pack);
  return pack;
}

ContentPack load_pack_sources(const std::vector<std::pair<std::string, std::string>>& kb,
                              const std::vector<std::pair<std::string, std::string>>& rules,
                              const std::string& lexicon, const std::string& fixtures,
                              Manifest manifest) {
  ContentPack pack;
  pack.manifest = std::move(manifest);
  IdGen ids;
  for (const auto& [path, text] : kb) compile_into(pack, text, path, ids);
  for (const auto& [path, text] : rules) compile_into(pack, text, path, ids);
  pack.lexicon = Lexicon::parse(lexicon, "<lexicon>");
  add_fixtures(pack, fixtures, "<fixtures>");
  finish(pack);
  return pack;
}

}  // namespace cgchat
