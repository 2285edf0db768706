// Live session service: UDP pose datagrams in, WebSocket UI bridge in/out,
// fixed-rate tick loop. Everything runs on one io_context thread, so the
// tick handler is the only writer of session state and no handler blocks on
// network I/O.
#pragma once

#include "imuteleop/teleop/session.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace boost::asio {
class io_context;
}

namespace imuteleop {

struct ServerConfig {
  SessionConfig session;
  std::string bind_address = "127.0.0.1";
  std::uint16_t udp_port = 9870;  ///< 0 picks a free port
  std::uint16_t ui_port = 9871;   ///< 0 picks a free port
  /// Static files served over HTTP on the UI port (index.html etc.); empty
  /// disables file serving.
  std::filesystem::path static_dir;
};

class Server {
 public:
  Server(boost::asio::io_context& io, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds sockets and arms the tick timer.
  void start();
  /// Cancels all pending operations; the io_context run() then returns.
  void stop();

  std::uint16_t udp_port() const;
  std::uint16_t ui_port() const;

  /// Trials finished so far (completed or stopped).
  std::vector<TrialRecord> finished_trials() const;

  /// Called on the io thread after every tick.
  void on_tick(std::function<void(const SessionState&)> callback);

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace imuteleop
