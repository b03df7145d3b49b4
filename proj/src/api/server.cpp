#include "crosscut/api/server.hpp"

#include "crosscut/api/views.hpp"

#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <deque>

namespace crosscut::api {

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& error) { send_json(res, error_json(error), http_status(error.code())); }

// Wraps a handler so module errors become ApiError responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_json(res, error_json(ErrorCode::BadRequest, std::string("invalid JSON: ") + e.what()), 400);
    }
  };
}

trace::Seq seq_param(const std::string& text, const char* name) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::BadRequest, std::string(name) + " must be an integer, got '" + text + "'");
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

} // namespace

// Fan-out of session publications to connected event-stream clients.
struct EventHub {
  std::mutex mutex;
  std::condition_variable changed;
  std::deque<std::string> messages; // bounded history
  std::uint64_t first_index = 0;    // index of messages.front()
  bool stopping = false;

  void push(std::string message) {
    {
      std::lock_guard lock(mutex);
      messages.push_back(std::move(message));
      if (messages.size() > 256) {
        messages.pop_front();
        ++first_index;
      }
    }
    changed.notify_all();
  }

  std::uint64_t end_index() {
    std::lock_guard lock(mutex);
    return first_index + messages.size();
  }
};

int port_from_env(int fallback) {
  if (const char* env = std::getenv("CROSSCUT_PORT"); env != nullptr && *env != '\0') {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadRequest, std::string("CROSSCUT_PORT is not a port number: ") + env);
    }
  }
  return fallback;
}

Server::Server(std::shared_ptr<session::Session> session)
    : session_(std::move(session)), http_(std::make_unique<httplib::Server>()), hub_(std::make_shared<EventHub>()) {
  // httplib's default adds SO_REUSEPORT, which would let a second server
  // share a busy port instead of reporting it.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  std::weak_ptr<EventHub> hub = hub_;
  listener_ = session_->subscribe([hub](const std::vector<std::string>& run_ids) {
    if (auto h = hub.lock()) h->push(json{{"type", "runs-updated"}, {"run_ids", run_ids}}.dump());
  });
  routes();
}

Server::~Server() {
  stop();
  session_->unsubscribe(listener_);
}

int Server::bind(const std::string& host, int port) {
  const int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::PortInUse, "cannot listen on " + host + ":" + std::to_string(port));
  }
  port_ = bound;
  return bound;
}

void Server::listen() { http_->listen_after_bind(); }

void Server::start() {
  thread_ = std::thread([this] { listen(); });
  http_->wait_until_ready();
}

void Server::stop() {
  {
    std::lock_guard lock(hub_->mutex);
    hub_->stopping = true;
  }
  hub_->changed.notify_all();
  http_->stop();
  if (thread_.joinable()) thread_.join();
}

void Server::routes() {
  auto& s = *http_;
  auto session = session_;

  s.Get("/examples", guarded([session](const httplib::Request&, httplib::Response& res) {
    send_json(res, examples_json(*session->state()));
  }));

  s.Post(R"(/examples/(.+)/active)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    bool active = true;
    if (auto q = param(req, "active")) {
      active = *q != "false" && *q != "0";
    } else if (!req.body.empty()) {
      const json body = json::parse(req.body);
      if (!body.contains("active") || !body["active"].is_boolean()) {
        throw Error(ErrorCode::BadRequest, "body must be {\"active\": true|false}");
      }
      active = body["active"].get<bool>();
    }
    const auto run_id = session->set_active(req.matches[1], active);
    send_json(res, {{"example_id", req.matches[1]}, {"active", active}, {"run_id", run_id ? json(*run_id) : json(nullptr)}});
  }));

  s.Post(R"(/run/(.+))", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto run_id = session->run_example(req.matches[1]);
    const auto state = session->state();
    send_json(res, run_summary_json(*state, require_run(*state, run_id)));
  }));

  s.Get("/runs", guarded([session](const httplib::Request&, httplib::Response& res) {
    send_json(res, runs_json(*session->state()));
  }));

  s.Get(R"(/runs/([^/]+))", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    send_json(res, run_summary_json(*state, require_run(*state, req.matches[1])));
  }));

  s.Get(R"(/runs/([^/]+)/tree)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    TreeQuery query;
    query.filter = param(req, "filter");
    if (auto d = param(req, "depth")) query.depth = static_cast<int>(seq_param(*d, "depth"));
    if (auto c = param(req, "children-of")) query.children_of = seq_param(*c, "children-of");
    send_json(res, tree_json(require_run(*state, req.matches[1]), query));
  }));

  s.Get(R"(/runs/([^/]+)/procedures)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    send_json(res, procedures_json(require_run(*state, req.matches[1])));
  }));

  s.Get(R"(/runs/([^/]+)/annotations)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    send_json(res, annotations_json(require_run(*state, req.matches[1])));
  }));

  s.Get(R"(/runs/([^/]+)/paths)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    const auto& run = require_run(*state, req.matches[1]);
    const auto target = param(req, "target");
    if (!target) throw Error(ErrorCode::BadRequest, "missing target parameter");
    const auto mode = param(req, "mode").value_or("summarized");
    if (mode != "summarized" && mode != "detailed") {
      throw Error(ErrorCode::BadRequest, "mode must be summarized or detailed");
    }
    send_json(res, paths_json(run, analysis::Target::parse(*target),
                              mode == "detailed" ? PathMode::Detailed : PathMode::Summarized));
  }));

  s.Get(R"(/runs/([^/]+)/probe/(.+)/values)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    const auto offset = param(req, "offset");
    const auto limit = param(req, "limit");
    const auto count = [](const std::string& text, const char* name) {
      const auto v = seq_param(text, name);
      if (v < 0) throw Error(ErrorCode::BadRequest, std::string(name) + " must be non-negative");
      return static_cast<std::size_t>(v);
    };
    send_json(res, probe_values_json(require_run(*state, req.matches[1]), req.matches[2],
                                     offset ? count(*offset, "offset") : 0,
                                     limit ? count(*limit, "limit") : kProbeValuePage));
  }));

  s.Get(R"(/runs/([^/]+)/probe-log)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    send_json(res, probe_log_json(require_run(*state, req.matches[1])));
  }));

  s.Get(R"(/runs/([^/]+)/node/([^/]+)/succession)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    send_json(res, succession_json(require_run(*state, req.matches[1]), seq_param(req.matches[2], "seq")));
  }));

  s.Get(R"(/runs/([^/]+)/node/([^/]+)/callees)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    send_json(res, callees_json(require_run(*state, req.matches[1]), seq_param(req.matches[2], "seq")));
  }));

  s.Get(R"(/runs/([^/]+)/find)", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const auto state = session->state();
    const auto& run = require_run(*state, req.matches[1]);
    const auto method = param(req, "method");
    if (!method) throw Error(ErrorCode::BadRequest, "missing method parameter");
    const auto from = param(req, "from");
    const auto dir = param(req, "dir").value_or("next");
    if (dir != "next" && dir != "prev") throw Error(ErrorCode::BadRequest, "dir must be next or prev");
    send_json(res, find_json(run, analysis::parse_method(*method), from ? seq_param(*from, "from") : 0,
                             dir == "next" ? analysis::Direction::Next : analysis::Direction::Prev));
  }));

  s.Get(R"(/source/(.+))", guarded([session](const httplib::Request& req, httplib::Response& res) {
    send_json(res, source_json(*session->state(), req.matches[1]));
  }));

  s.Post("/scope", guarded([session](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (!body.contains("modules") || !body["modules"].is_array()) {
      throw Error(ErrorCode::BadRequest, "body must be {\"modules\": [...]}");
    }
    std::set<std::string> modules;
    for (const auto& m : body["modules"]) {
      if (!m.is_string()) throw Error(ErrorCode::BadRequest, "modules must be strings");
      modules.insert(m.get<std::string>());
    }
    send_json(res, {{"run_ids", session->set_scope(modules)}});
  }));

  auto hub = hub_;
  s.Get("/events", [hub](const httplib::Request&, httplib::Response& res) {
    auto cursor = std::make_shared<std::uint64_t>(hub->end_index());
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [hub, cursor](std::size_t, httplib::DataSink& sink) {
      std::unique_lock lock(hub->mutex);
      hub->changed.wait_for(lock, std::chrono::milliseconds(250), [&] {
        return hub->stopping || *cursor < hub->first_index + hub->messages.size();
      });
      if (hub->stopping) {
        sink.done();
        return true;
      }
      *cursor = std::max(*cursor, hub->first_index);
      std::string out;
      while (*cursor < hub->first_index + hub->messages.size()) {
        out += "data: " + hub->messages[static_cast<std::size_t>(*cursor - hub->first_index)] + "\n\n";
        ++*cursor;
      }
      lock.unlock();
      if (out.empty()) out = ": keep-alive\n\n";
      return sink.write(out.data(), out.size());
    });
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_json(res, error_json(ErrorCode::BadRequest, "no such endpoint"), res.status);
    }
  });
}

} // namespace crosscut::api
