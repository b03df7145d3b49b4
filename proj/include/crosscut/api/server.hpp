#pragma once

#include "crosscut/session/session.hpp"

#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace crosscut::api {

// JSON HTTP service over a session. Also serves /events, a server-sent event
// stream that pushes {"type":"runs-updated","run_ids":[...]} after every
// publication.
class Server {
public:
  explicit Server(std::shared_ptr<session::Session> session);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Port 0 picks a free port. Throws Error(PortInUse).
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // listen() on a background thread.
  void start();
  void stop();

  int port() const { return port_; }

private:
  void routes();

  std::shared_ptr<session::Session> session_;
  std::unique_ptr<httplib::Server> http_;
  std::shared_ptr<struct EventHub> hub_;
  std::thread thread_;
  int port_ = -1;
  int listener_ = -1;
};

// Port from CROSSCUT_PORT if set, otherwise `fallback`.
int port_from_env(int fallback);

} // namespace crosscut::api
