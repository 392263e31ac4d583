#include "cgchat/service.hpp"

#include <chrono>

#include "httplib.h"

namespace cgchat {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& msg) {
  send_json(res, {{"error", kind}, {"message", msg}}, status);
}

}  // namespace

Service::Service(const Engine& engine, std::filesystem::path static_dir)
    : engine_(&engine), http_(std::make_unique<httplib::Server>()) {
  routes();
  if (!static_dir.empty() && std::filesystem::is_directory(static_dir))
    http_->set_mount_point("/", static_dir.string());
}

Service::~Service() { stop(); }

std::shared_ptr<Service::Session> Service::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void Service::routes() {
  auto& s = *http_;

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  });

  s.Post("/conversations", [this](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::string> seeds;
    if (!req.body.empty()) {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object())
        return send_error(res, 400, "BadRequest", "body must be a JSON object");
      if (body.contains("seeds")) {
        if (!body["seeds"].is_array()) return send_error(res, 400, "BadRequest", "seeds must be an array");
        for (const auto& x : body["seeds"]) {
          if (!x.is_string()) return send_error(res, 400, "BadRequest", "seeds must be strings");
          seeds.push_back(x.get<std::string>());
        }
      }
    }
    std::shared_ptr<Session> session;
    try {
      session = std::make_shared<Session>(*engine_, seeds);
    } catch (const CompileError& e) {
      return send_error(res, 400, e.kind(), e.what());
    }
    std::string id;
    {
      std::lock_guard lock(mu_);
      id = "c" + std::to_string(next_id_++);
      sessions_[id] = session;
    }
    std::lock_guard lock(session->mu);
    send_json(res, {{"id", id}, {"memory", to_json(session->conv.memory())}}, 201);
  });

  s.Get("/conversations", [this](const httplib::Request&, httplib::Response& res) {
    json ids = json::array();
    std::lock_guard lock(mu_);
    for (const auto& [id, _] : sessions_) ids.push_back(id);
    send_json(res, {{"conversations", ids}});
  });

  s.Post(R"(/conversations/([^/]+)/turns)", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    if (!session) return send_error(res, 404, "NotFound", "unknown conversation");
    json body = json::parse(req.body, nullptr, false);
    bool has_text = body.is_object() && body.contains("text") && body["text"].is_string();
    bool has_parse = body.is_object() && body.contains("parse") && body["parse"].is_object();
    if (body.is_discarded() || !(has_text || has_parse))
      return send_error(res, 400, "BadRequest", "expected {\"text\": ...} or {\"parse\": {...}}");
    std::unique_lock lock(session->mu);
    if (session->closed) return send_error(res, 404, "NotFound", "unknown conversation");
    try {
      TurnRecord rec = has_parse
                           ? session->conv.turn(parse_input_from_json(body["parse"]))
                           : session->conv.turn(body["text"].get<std::string>());
      lock.unlock();
      session->changed.notify_all();
      send_json(res, {{"response", rec.response}, {"record", to_json(rec)}});
    } catch (const ParseFixtureMissing& e) {
      send_error(res, 422, "ParseFixtureMissing", e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "BadRequest", e.what());
    } catch (const Error& e) {
      send_error(res, 422, "TurnError", e.what());
    }
  });

  s.Get(R"(/conversations/([^/]+)/memory)", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    if (!session) return send_error(res, 404, "NotFound", "unknown conversation");
    std::lock_guard lock(session->mu);
    send_json(res, to_json(session->conv.memory()));
  });

  s.Get(R"(/conversations/([^/]+)/candidates)", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    if (!session) return send_error(res, 404, "NotFound", "unknown conversation");
    std::lock_guard lock(session->mu);
    const auto& h = session->conv.history();
    json rows = json::array();
    if (!h.empty()) rows = to_json(h.back())["candidates"];
    send_json(res, {{"turn", h.empty() ? 0 : h.back().turn}, {"candidates", rows}});
  });

  s.Get(R"(/conversations/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    if (!session) return send_error(res, 404, "NotFound", "unknown conversation");
    std::lock_guard lock(session->mu);
    res.set_content(conversation_log(session->conv), "application/x-ndjson");
  });

  s.Get(R"(/conversations/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.matches[1]);
    if (!session) return send_error(res, 404, "NotFound", "unknown conversation");
    // Replays past turns, then streams new ones. `?from=N` skips the first N.
    std::size_t from = 0;
    if (req.has_param("from")) from = std::stoul(req.get_param_value("from"));
    auto sent = std::make_shared<std::size_t>(from);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, session, sent](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(session->mu);
          session->changed.wait_for(lock, std::chrono::milliseconds(500), [&] {
            return session->closed || stopping_ || session->conv.history().size() > *sent;
          });
          if (session->closed || stopping_) {
            lock.unlock();
            sink.done();
            return true;
          }
          const auto& h = session->conv.history();
          std::string out;
          for (; *sent < h.size(); ++*sent)
            out += "event: turn\ndata: " + to_json(h[*sent]).dump() + "\n\n";
          lock.unlock();
          if (out.empty()) out = ": keepalive\n\n";
          return sink.write(out.data(), out.size());
        });
  });

  s.Delete(R"(/conversations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Session> session;
    {
      std::lock_guard lock(mu_);
      auto it = sessions_.find(req.matches[1]);
      if (it == sessions_.end()) return send_error(res, 404, "NotFound", "unknown conversation");
      session = it->second;
      sessions_.erase(it);
    }
    {
      std::lock_guard lock(session->mu);
      session->closed = true;
    }
    session->changed.notify_all();
    res.status = 204;
  });
}

bool Service::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Service::bind_any(const std::string& host) { return http_->bind_to_any_port(host); }

void Service::run() { http_->listen_after_bind(); }

void Service::stop() {
  stopping_ = true;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, s] : sessions_) s->changed.notify_all();
  }
  if (http_) http_->stop();
}

}  // namespace cgchat
