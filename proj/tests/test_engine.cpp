#include <random>

#include "cgchat/engine.hpp"
#include "doctest.h"

using namespace cgchat;

namespace {

const Engine& shipped() {
  static Engine e(load_pack("content/manifest.json"));
  return e;
}

Golden golden(const std::string& name) {
  return parse_golden(read_file("content/goldens/" + name + ".golden"), name);
}

}  // namespace

TEST_CASE("shipped goldens replay turn for turn") {
  for (const char* name : {"fan_of_action", "particular_movie", "weekend"}) {
    auto r = run_golden(shipped(), golden(name));
    INFO(name << " turn " << r.first_divergent_turn << ": " << r.actual);
    CHECK(r.pass);
  }
}

TEST_CASE("the deferred question comes back on the next turn") {
  Conversation c(shipped(), {"topic(bot, weekend)"});
  c.turn("");
  auto t2 = c.turn("I watched the Avengers. It's my favorite movie.");
  CHECK(t2.reaction == std::optional<std::string>("sounds_fun"));
  CHECK(t2.presentation == std::optional<std::string>("share_weekend"));
  bool ask_why_offered = false;
  for (const auto& row : t2.candidates)
    if (row.rule == "ask_why") ask_why_offered = !row.selected;
  CHECK(ask_why_offered);
  auto t3 = c.turn("That's cool.");
  CHECK(t3.presentation == std::optional<std::string>("ask_why"));
}

TEST_CASE("answer resolves the open reference") {
  Conversation c(shipped());
  c.turn("Let's talk about movies.");
  auto t = c.turn("The Avengers");
  REQUIRE(t.resolutions.size() == 1);
  CHECK(t.resolutions[0].referent == "avengers");
  bool like_avengers = false;
  const auto& g = c.memory().graph;
  for (const auto& [p, sig] : g.predicates())
    if (g.has_type(p, "like") && sig.subject == std::optional<ConceptId>("user") &&
        sig.object == std::optional<ConceptId>("avengers"))
      like_avengers = true;
  CHECK(like_avengers);
}

TEST_CASE("empty input falls back and the conversation continues") {
  Conversation c(shipped());
  auto t = c.turn("");
  CHECK(t.response == "Tell me more.");
  CHECK(c.turn("   ").response == "Tell me more.");
  CHECK(c.memory().turn == 2);
}

TEST_CASE("missing fixture fails without touching the conversation") {
  Conversation c(shipped(), {"fan(bot, action)"});
  c.turn("");
  auto before = to_json(c.memory()).dump();
  CHECK_THROWS_AS(c.turn("no fixture has this text"), ParseFixtureMissing);
  CHECK(to_json(c.memory()).dump() == before);
  CHECK(c.history().size() == 1);
}

TEST_CASE("mentioned concepts enter memory at full salience") {
  Conversation c(shipped());
  auto t = c.turn("Tom watched dog by bus stop near Central Park");
  const auto& g = c.memory().graph;
  // One turn of decay after the mention.
  for (const auto& id : {"Tom"}) CHECK(g.features(id).salience == doctest::Approx(0.9));
  int watch = 0;
  for (const auto& [p, sig] : g.predicates())
    if (g.has_type(p, "watch")) {
      ++watch;
      CHECK(sig.subject == std::optional<ConceptId>("Tom"));
      CHECK(g.features(p).salience == doctest::Approx(0.9));
    }
  CHECK(watch == 1);
  CHECK(t.response == "Tell me more.");
}

TEST_CASE("replay reproduces records and memory") {
  Conversation c(shipped(), {"topic(bot, weekend)"});
  c.turn("");
  c.turn("I watched the Avengers. It's my favorite movie.");
  c.turn("That's cool.");
  auto log = conversation_log(c);
  auto a = replay(shipped(), log);
  auto b = replay(shipped(), log);
  CHECK(a.identical);
  CHECK(b.identical);
  CHECK(a.final_memory.dump() == to_json(c.memory()).dump());
  CHECK(a.final_memory.dump() == b.final_memory.dump());
  CHECK(a.responses == b.responses);
}

TEST_CASE("replay points at a tampered turn") {
  Conversation c(shipped(), {"fan(bot, action)"});
  c.turn("");
  c.turn("Yeah, I like the Avengers.");
  auto log = conversation_log(c);
  auto pos = log.find("What do you like about the Avengers?");
  REQUIRE(pos != std::string::npos);
  log.replace(pos, 4, "Why ");
  auto r = replay(shipped(), log);
  CHECK_FALSE(r.identical);
  CHECK(r.first_divergent_turn == 2);
}

TEST_CASE("mutated golden localizes the first divergent turn") {
  auto g = golden("weekend");
  g.turns[1].bot = "Something else.";
  auto r = run_golden(shipped(), g);
  CHECK_FALSE(r.pass);
  CHECK(r.first_divergent_turn == 2);
  CHECK(r.actual == "That sounds fun. For my weekend I went hiking.");
}

TEST_CASE("conversations are isolated") {
  Conversation a(shipped()), b(shipped());
  a.turn("I'm sad.");
  b.turn("Yeah, I like the Avengers.");
  auto has_type = [](const Conversation& c, const char* t) {
    for (const auto& [p, sig] : c.memory().graph.predicates())
      if (c.memory().graph.has_type(p, t)) return true;
    return false;
  };
  CHECK(has_type(a, "sad"));
  CHECK_FALSE(has_type(b, "sad"));
  CHECK(has_type(b, "like"));
  CHECK_FALSE(has_type(a, "like"));
}

TEST_CASE("critical reaction wins when the user is sad") {
  Conversation c(shipped());
  auto t = c.turn("I'm sad.");
  CHECK(t.reaction == std::optional<std::string>("comfort"));
  CHECK(t.response == "I'm sorry to hear that. Tell me more.");
}

TEST_CASE("shipped pack validates cleanly") {
  CHECK(validate_pack("content/manifest.json").empty());
}

TEST_CASE("response rule without a template is a pairing error") {
  try {
    load_pack_sources({{"<kb>", "bot/agent() type(fan, predicate)"}},
                      {{"<r>", "presentation lonely [mid]: fan(bot)\n"}});
    FAIL("expected a pairing error");
  } catch (const CompileError& e) {
    CHECK(e.kind() == "PairingError");
    CHECK(std::string(e.what()).find("lonely") != std::string::npos);
  }
}

TEST_CASE("naive parse keeps free chat going") {
  ContentPack pack = load_pack("content/manifest.json");
  pack.manifest.naive_parse = true;
  Engine e(std::move(pack));
  Conversation c(e);
  auto t = c.turn("I like Frozen a lot");
  CHECK_FALSE(t.response.empty());
  bool frozen = false;
  for (const auto& [id, f] : c.memory().graph.nodes()) frozen = frozen || id == "frozen";
  CHECK(frozen);
}

TEST_CASE("memory stays bounded over random conversations") {
  ContentPack pack = load_pack("content/manifest.json");
  pack.manifest.naive_parse = true;
  Engine e(std::move(pack));
  std::vector<std::string> words;
  for (const auto& entry : e.pack().lexicon.entries()) words.push_back(entry.surface);
  for (int i = 0; i < 40; ++i) words.push_back("w" + std::to_string(i));
  std::mt19937 rng(3);
  std::size_t pruned = 0;
  for (int conv = 0; conv < 20; ++conv) {
    Conversation c(e);
    for (int turn = 0; turn < 20; ++turn) {
      std::string text;
      int n = 5 + static_cast<int>(rng() % 15);
      for (int k = 0; k < n; ++k) text += words[rng() % words.size()] + " ";
      pruned += c.turn(text).pruned.size();
      CHECK(unprotected_count(c.memory()) <= 100);
      const auto& g = c.memory().graph;
      for (const auto& [p, sig] : g.predicates())
        for (const auto& a : {sig.subject, sig.object})
          if (a) CHECK(g.contains(*a));
    }
  }
  CHECK(pruned > 0);
}
