#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "cgchat/compiler.hpp"
#include "cgchat/engine.hpp"
#include "cgchat/inference.hpp"
#include "cgchat/service.hpp"

using namespace cgchat;

namespace {

enum Exit { ok = 0, usage = 1, compile_error = 2, runtime = 3 };

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

void print_candidates(const TurnRecord& r) {
  std::cout << "  " << std::left << std::setw(16) << "rule" << std::setw(14) << "type"
            << std::setw(10) << "priority" << "score\n";
  for (const auto& c : r.candidates)
    std::cout << (c.selected ? "* " : "  ") << std::setw(16) << c.rule << std::setw(14)
              << to_string(c.rtype) << std::setw(10) << to_string(c.priority) << std::fixed
              << std::setprecision(4) << c.score << "\n";
  for (const auto& f : r.fired) std::cout << "  fired " << f << "\n";
  for (const auto& x : r.resolutions) std::cout << "  ref " << x.focus << " -> " << x.referent << "\n";
  for (const auto& [a, b] : r.contradictions) std::cout << "  contradiction " << a << " / " << b << "\n";
  for (const auto& w : r.warnings) std::cout << "  warning: " << w << "\n";
  std::cout << "  timings:";
  for (const auto& [k, v] : r.timings_ms) std::cout << " " << k << "=" << std::setprecision(3) << v << "ms";
  std::cout << "\n";
}

ConceptGraph load_knowledge(const std::vector<std::string>& files, IdGen& ids) {
  ConceptGraph kb;
  for (const auto& f : files) kb.union_with(compile(read_file(f), f, kb, ids).knowledge);
  return kb;
}

int cmd_chat(const std::string& manifest, bool trace, bool naive, const std::vector<std::string>& seeds,
             const std::string& log_path) {
  ContentPack pack = load_pack(manifest);
  if (naive) pack.manifest.naive_parse = true;
  Engine engine(std::move(pack));
  Conversation conv(engine, seeds);
  auto say = [&](const std::string& text) {
    try {
      auto r = conv.turn(text);
      std::cout << "bot: " << r.response << "\n";
      if (trace) print_candidates(r);
    } catch (const ParseFixtureMissing& e) {
      std::cout << "(" << e.what() << "; try --naive-parse)\n";
    }
  };
  if (!seeds.empty()) say("");
  std::string line;
  while (std::cout << "you: " << std::flush, std::getline(std::cin, line)) {
    if (line == "/quit") break;
    say(line);
  }
  if (!log_path.empty()) std::ofstream(log_path) << conversation_log(conv);
  return ok;
}

int cmd_compile(const std::vector<std::string>& files, bool quiet) {
  IdGen ids;
  ConceptGraph kb;
  for (const auto& f : files) {
    auto r = compile(read_file(f), f, kb, ids);
    kb.union_with(r.knowledge);
    for (const auto& w : r.diagnostics.warnings) std::cerr << "warning: " << w << "\n";
    if (quiet) continue;
    for (const auto& rule : r.rules)
      std::cout << "# " << to_string(rule.kind) << " " << rule.name << " (" << f << ":" << rule.line
                << ")\n";
    for (const auto& t : r.templates) std::cout << "# template " << t.rule << ": \"" << t.text << "\"\n";
  }
  if (!quiet) std::cout << serialize(kb);
  return ok;
}

int cmd_match(const std::vector<std::string>& data, const std::string& query) {
  IdGen ids;
  ConceptGraph kb = load_knowledge(data, ids);
  auto r = compile("rule query: " + query + " -> matched(query)", "<query>", kb, ids);
  for (const auto& s : match(r.rules.at(0).precondition, kb)) std::cout << format_solution(s) << "\n";
  return ok;
}

int cmd_infer(const std::vector<std::string>& data, const std::vector<std::string>& rule_files,
              int passes, int threads) {
  IdGen ids;
  ConceptGraph kb = load_knowledge(data, ids);
  std::vector<Rule> rules;
  for (const auto& f : rule_files) {
    auto r = compile(read_file(f), f, kb, ids);
    for (auto& rule : r.rules)
      if (rule.kind == RuleKind::inference) rules.push_back(std::move(rule));
  }
  std::vector<const Rule*> ptrs;
  for (const auto& r : rules) ptrs.push_back(&r);
  auto t0 = std::chrono::steady_clock::now();
  auto trace = infer(kb, ptrs, passes, ids, threads);
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::cout << format_firings(trace);
  std::cerr << trace.size() << " firings in " << ms << " ms\n";
  return ok;
}

int cmd_serve(const std::string& manifest, int port, const std::string& host, const std::string& ui) {
  Engine engine(load_pack(manifest));
  if (port == 0) port = engine.pack().manifest.port;
  Service service(engine, ui);
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on http://" << host << ":" << port << "\n";
  if (!service.listen(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return runtime;
  }
  g_service = nullptr;
  return ok;
}

int cmd_replay(const std::string& manifest, const std::string& log) {
  Engine engine(load_pack(manifest));
  auto r = replay(engine, read_file(log));
  for (const auto& s : r.responses) std::cout << "bot: " << s << "\n";
  if (!r.identical) {
    std::cerr << "diverged at turn " << r.first_divergent_turn << ": " << r.detail << "\n";
    return runtime;
  }
  std::cerr << "replay identical\n";
  return ok;
}

int cmd_validate(const std::string& manifest) {
  try {
    load_pack(manifest);
  } catch (const CompileError& e) {
    std::cerr << e.what() << "\n";
    return compile_error;
  }
  auto problems = validate_pack(manifest);
  for (const auto& p : problems) std::cerr << p << "\n";
  if (!problems.empty()) return runtime;
  std::cout << "pack ok\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-graph dialogue engine"};
  app.require_subcommand(1);
  std::string manifest = "content/manifest.json";

  auto* chat = app.add_subcommand("chat", "interactive conversation on stdin");
  bool trace = false, naive = false;
  std::vector<std::string> seeds;
  std::string log_path;
  chat->add_option("--manifest", manifest, "content manifest");
  chat->add_flag("--trace", trace, "print candidates, firings and timings");
  chat->add_flag("--naive-parse", naive, "parse text without fixtures");
  chat->add_option("--seed", seeds, "knowledge statement added before the first turn");
  chat->add_option("--log", log_path, "write the turn log here on exit");

  auto* comp = app.add_subcommand("compile", "compile .kb files and print the knowledge");
  std::vector<std::string> files;
  bool quiet = false;
  comp->add_option("files", files)->required();
  comp->add_flag("-q,--quiet", quiet, "only report errors");

  auto* mat = app.add_subcommand("match", "match a precondition against knowledge");
  std::vector<std::string> data;
  std::string query;
  mat->add_option("--data", data, "knowledge files")->required();
  mat->add_option("query", query, "precondition terms")->required();

  auto* inf = app.add_subcommand("infer", "forward-chain rules over knowledge");
  std::vector<std::string> rule_files;
  int passes = 2, threads = 0;
  inf->add_option("--data", data, "knowledge files")->required();
  inf->add_option("--rules", rule_files, "rule files")->required();
  inf->add_option("--passes", passes)->check(CLI::PositiveNumber);
  inf->add_option("--threads", threads);

  auto* srv = app.add_subcommand("serve", "HTTP conversation service");
  int port = 0;
  std::string host = "127.0.0.1", ui = "ui/dist";
  srv->add_option("--manifest", manifest);
  srv->add_option("--port", port, "default: manifest port");
  srv->add_option("--host", host);
  srv->add_option("--ui", ui, "static files mounted at /");

  auto* rep = app.add_subcommand("replay", "re-run a turn log and compare");
  std::string log;
  rep->add_option("log", log)->required()->check(CLI::ExistingFile);
  rep->add_option("--manifest", manifest);

  auto* val = app.add_subcommand("validate", "compile, audit and replay goldens");
  val->add_option("--manifest", manifest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    if (*chat) return cmd_chat(manifest, trace, naive, seeds, log_path);
    if (*comp) return cmd_compile(files, quiet);
    if (*mat) return cmd_match(data, query);
    if (*inf) return cmd_infer(data, rule_files, passes, threads);
    if (*srv) return cmd_serve(manifest, port, host, ui);
    if (*rep) return cmd_replay(manifest, log);
    if (*val) return cmd_validate(manifest);
  } catch (const CompileError& e) {
    std::cerr << e.what() << "\n";
    return compile_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return runtime;
  }
  return usage;
}
