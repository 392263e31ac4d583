#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "cgchat/engine.hpp"

namespace httplib {
class Server;
}

namespace cgchat {

/// HTTP front end. Conversations run in parallel; each one processes a
/// single turn at a time.
///
///   POST   /conversations                 {"seeds": [...]}  -> 201
///   GET    /conversations
///   POST   /conversations/{id}/turns      {"text": ...} | {"parse": {...}}
///   GET    /conversations/{id}/memory
///   GET    /conversations/{id}/candidates
///   GET    /conversations/{id}/log        newline-delimited records
///   GET    /conversations/{id}/events     text/event-stream of turns
///   DELETE /conversations/{id}
class Service {
 public:
  explicit Service(const Engine& engine, std::filesystem::path static_dir = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves until stop(). Returns false if the port is taken.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it; serve with run().
  int bind_any(const std::string& host);
  void run();
  void stop();

 private:
  struct Session {
    explicit Session(const Engine& e, std::vector<std::string> seeds) : conv(e, std::move(seeds)) {}
    std::mutex mu;
    std::condition_variable changed;
    Conversation conv;
    bool closed = false;
  };

  std::shared_ptr<Session> find(const std::string& id);
  void routes();

  const Engine* engine_;
  std::unique_ptr<httplib::Server> http_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  std::atomic<bool> stopping_{false};
};

}  // namespace cgchat
