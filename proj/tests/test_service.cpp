#include <thread>

#include "cgchat/service.hpp"
#include "doctest.h"
#include "httplib.h"

using namespace cgchat;
using nlohmann::json;

namespace {

struct Running {
  Engine engine{load_pack("content/manifest.json")};
  Service service{engine};
  int port = 0;
  std::thread thread;

  Running() {
    port = service.bind_any("127.0.0.1");
    thread = std::thread([this] { service.run(); });
  }
  ~Running() {
    service.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }
};

std::string create(httplib::Client& c, const json& body = json::object()) {
  auto r = c.Post("/conversations", body.dump(), "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 201);
  return json::parse(r->body)["id"];
}

json post_text(httplib::Client& c, const std::string& id, const std::string& text, int expect = 200) {
  auto r = c.Post("/conversations/" + id + "/turns", json{{"text", text}}.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == expect);
  return json::parse(r->body);
}

}  // namespace

TEST_CASE("conversation over http") {
  Running srv;
  auto c = srv.client();
  auto id = create(c, {{"seeds", {"fan(bot, action)"}}});
  CHECK(post_text(c, id, "")["response"] == "I'm a big fan of action movies.");
  auto turn = post_text(c, id, "Yeah, I like the Avengers.");
  CHECK(turn["response"] == "What do you like about the Avengers?");
  CHECK(turn["record"]["presentation"] == "ask_why");
  CHECK(turn["record"].contains("timings_ms"));

  auto cands = json::parse(c.Get("/conversations/" + id + "/candidates")->body);
  CHECK(cands["turn"] == 2);
  CHECK(cands["candidates"][0]["rule"] == "ask_why");
  CHECK(cands["candidates"][0]["selected"] == true);
  CHECK(cands["candidates"] == turn["record"]["candidates"]);

  auto mem = json::parse(c.Get("/conversations/" + id + "/memory")->body);
  CHECK(mem["turn"] == 2);
  bool avengers = false;
  for (const auto& e : mem["concepts"]) avengers = avengers || e["id"] == "avengers";
  CHECK(avengers);

  auto log = c.Get("/conversations/" + id + "/log");
  REQUIRE(log);
  CHECK(replay(srv.engine, log->body).identical);
}

TEST_CASE("parse payloads are accepted") {
  Running srv;
  auto c = srv.client();
  auto id = create(c);
  json parse = {{"text", "I'm sad."},
                {"tokens", {"I", "'m", "sad", "."}},
                {"pos", {"PRP", "VBP", "JJ", "."}},
                {"deps", {{2, 0, "nsbj"}, {2, 1, "cop"}, {2, 3, "punct"}}}};
  auto r = c.Post("/conversations/" + id + "/turns", json{{"parse", parse}}.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["record"]["reaction"] == "comfort");
}

TEST_CASE("request errors") {
  Running srv;
  auto c = srv.client();
  auto r = c.Post("/conversations/nope/turns", R"({"text":"hi"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);
  CHECK(c.Get("/conversations/nope/memory")->status == 404);
  CHECK(c.Delete("/conversations/nope")->status == 404);

  auto id = create(c);
  CHECK(c.Post("/conversations/" + id + "/turns", "not json", "application/json")->status == 400);
  CHECK(c.Post("/conversations/" + id + "/turns", R"({"txt":"x"})", "application/json")->status == 400);
  auto missing = post_text(c, id, "no fixture for this", 422);
  CHECK(missing["error"] == "ParseFixtureMissing");
  CHECK(c.Post("/conversations", R"({"seeds":["fan(bot"]})", "application/json")->status == 400);

  // The failed turn left the conversation untouched.
  CHECK(json::parse(c.Get("/conversations/" + id + "/memory")->body)["turn"] == 0);
}

TEST_CASE("interleaved conversations do not share memory") {
  Running srv;
  auto c = srv.client();
  auto a = create(c), b = create(c);
  CHECK(a != b);
  post_text(c, a, "I'm sad.");
  post_text(c, b, "Yeah, I like the Avengers.");
  post_text(c, a, "");
  auto ids = [&](const std::string& id) {
    std::set<std::string> out;
    auto mem = json::parse(c.Get("/conversations/" + id + "/memory")->body);
    for (const auto& e : mem["concepts"]) out.insert(e["id"].get<std::string>());
    return out;
  };
  CHECK(ids(a).count("avengers") == 0);
  CHECK(ids(b).count("avengers") == 1);
  CHECK(json::parse(c.Get("/conversations/" + a + "/memory")->body)["turn"] == 2);
  CHECK(json::parse(c.Get("/conversations/" + b + "/memory")->body)["turn"] == 1);
}

TEST_CASE("concurrent turns on one conversation are serialized") {
  Running srv;
  auto c0 = srv.client();
  auto id = create(c0);
  std::vector<std::thread> ts;
  for (int i = 0; i < 4; ++i)
    ts.emplace_back([&] {
      auto c = srv.client();
      for (int k = 0; k < 5; ++k)
        c.Post("/conversations/" + id + "/turns", R"({"text":""})", "application/json");
    });
  for (auto& t : ts) t.join();
  auto mem = json::parse(c0.Get("/conversations/" + id + "/memory")->body);
  CHECK(mem["turn"] == 20);
}

TEST_CASE("event stream delivers turn records") {
  Running srv;
  auto c = srv.client();
  auto id = create(c);
  post_text(c, id, "I'm sad.");
  std::string got;
  auto events = srv.client();
  events.Get("/conversations/" + id + "/events", [&](const char* data, std::size_t n) {
    got.append(data, n);
    return got.find("\n\n") == std::string::npos;
  });
  REQUIRE(got.rfind("event: turn\ndata: ", 0) == 0);
  auto payload = json::parse(got.substr(18, got.find("\n\n") - 18));
  CHECK(payload["response"] == "I'm sorry to hear that. Tell me more.");
}

TEST_CASE("delete ends the conversation") {
  Running srv;
  auto c = srv.client();
  auto id = create(c);
  CHECK(c.Delete("/conversations/" + id)->status == 204);
  CHECK(c.Get("/conversations/" + id + "/memory")->status == 404);
  auto list = json::parse(c.Get("/conversations")->body);
  CHECK(list["conversations"].empty());
}
