#include "imuteleop/teleop/server.hpp"

#include "imuteleop/teleop/ui_protocol.hpp"

#include <array>
#include <chrono>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace imuteleop {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using udp = asio::ip::udp;

namespace {

constexpr std::size_t kMaxQueuedFrames = 16;

std::string content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

}  // namespace

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
  class Client;
  class HttpConnection;

  Impl(asio::io_context& io, ServerConfig cfg)
      : io(io),
        config(std::move(cfg)),
        session(config.session),
        udp_socket(io),
        acceptor(io),
        timer(io) {}

  asio::io_context& io;
  ServerConfig config;
  TeleopSession session;
  udp::socket udp_socket;
  udp::endpoint udp_sender;
  std::array<std::uint8_t, 2048> udp_buffer{};
  tcp::acceptor acceptor;
  asio::steady_timer timer;
  std::chrono::steady_clock::time_point epoch;
  std::chrono::steady_clock::duration period{};
  std::uint64_t tick_count = 0;
  std::vector<std::weak_ptr<Client>> clients;
  std::vector<TrialRecord> finished;
  std::optional<TrialSummary> last_summary;
  TrialPhase last_phase = TrialPhase::idle;
  std::function<void(const SessionState&)> tick_callback;
  bool stopped = false;

  double now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch).count();
  }

  void start();
  void stop();
  void receive_datagram();
  void accept_connection();
  void schedule_tick();
  void tick();
  void handle_control(const std::string& text);
  void broadcast(const std::shared_ptr<const std::string>& frame);
};

class Server::Impl::Client : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, std::weak_ptr<Impl> server)
      : ws_(std::move(socket)), server_(std::move(server)) {}

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      if (auto server = self->server_.lock()) {
        self->send(std::make_shared<const std::string>(scene_message(server->config.session).dump()));
      }
      self->read();
    });
  }

  void send(std::shared_ptr<const std::string> frame) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueuedFrames) return;  // slow reader: drop the newest
    queue_.push_back(std::move(frame));
    if (queue_.size() == 1) write();
  }

  void close() {
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

  bool closed() const { return closed_; }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (auto server = self->server_.lock()) server->handle_control(text);
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        self->queue_.clear();
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  std::weak_ptr<Impl> server_;
  bool closed_ = false;
};

class Server::Impl::HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, std::weak_ptr<Impl> server)
      : stream_(std::move(socket)), server_(std::move(server)) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(10));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->dispatch();
                     });
  }

 private:
  void dispatch() {
    auto server = server_.lock();
    if (!server) return;
    if (websocket::is_upgrade(request_)) {
      stream_.expires_never();
      auto client = std::make_shared<Client>(stream_.release_socket(), server_);
      server->clients.push_back(client);
      client->run(std::move(request_));
      return;
    }
    respond(*server);
  }

  void respond(const Impl& server) {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(request_.version());
    res->keep_alive(false);
    std::string target(request_.target());
    if (auto q = target.find('?'); q != std::string::npos) target.erase(q);
    if (target.empty() || target.back() == '/') target += "index.html";
    const std::filesystem::path rel = std::filesystem::path(target).relative_path();
    const bool safe = rel.string().find("..") == std::string::npos;
    std::string body;
    bool found = false;
    if (request_.method() == http::verb::get && safe && !server.config.static_dir.empty()) {
      std::ifstream in(server.config.static_dir / rel, std::ios::binary);
      if (in) {
        std::stringstream buf;
        buf << in.rdbuf();
        body = buf.str();
        found = true;
      }
    }
    if (found) {
      res->result(http::status::ok);
      res->set(http::field::content_type, content_type(rel));
      res->body() = std::move(body);
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code, std::size_t) {
                        beast::error_code ec;
                        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::weak_ptr<Impl> server_;
};

void Server::Impl::start() {
  const auto address = asio::ip::make_address(config.bind_address);

  udp_socket.open(address.is_v6() ? udp::v6() : udp::v4());
  udp_socket.bind({address, config.udp_port});

  const tcp::endpoint ui_endpoint{address, config.ui_port};
  acceptor.open(ui_endpoint.protocol());
  acceptor.set_option(asio::socket_base::reuse_address(true));
  acceptor.bind(ui_endpoint);
  acceptor.listen();

  epoch = std::chrono::steady_clock::now();
  period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / config.session.loop_rate));
  receive_datagram();
  accept_connection();
  schedule_tick();
}

void Server::Impl::stop() {
  stopped = true;
  beast::error_code ec;
  timer.cancel();
  udp_socket.close(ec);
  acceptor.close(ec);
  for (auto& weak : clients) {
    if (auto c = weak.lock()) c->close();
  }
  clients.clear();
}

void Server::Impl::receive_datagram() {
  udp_socket.async_receive_from(
      asio::buffer(udp_buffer), udp_sender,
      [self = shared_from_this()](beast::error_code ec, std::size_t n) {
        if (ec == asio::error::operation_aborted || self->stopped) return;
        if (!ec) {
          self->session.offer_datagram(std::span<const std::uint8_t>(self->udp_buffer.data(), n));
        }
        self->receive_datagram();
      });
}

void Server::Impl::accept_connection() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec == asio::error::operation_aborted || self->stopped) return;
    if (!ec) std::make_shared<HttpConnection>(std::move(socket), self)->run();
    self->accept_connection();
  });
}

void Server::Impl::schedule_tick() {
  ++tick_count;
  timer.expires_at(epoch + period * static_cast<std::int64_t>(tick_count));
  timer.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec || self->stopped) return;
    self->tick();
    self->schedule_tick();
  });
}

void Server::Impl::tick() {
  const SessionState& state = session.tick(now());
  if (state.phase == TrialPhase::done && last_phase == TrialPhase::running &&
      session.finished_trial()) {
    finished.push_back(*session.finished_trial());
    last_summary = finished.back().samples.empty()
                       ? std::nullopt
                       : std::optional<TrialSummary>(summarize(finished.back()));
  }
  if (state.phase == TrialPhase::running) last_summary.reset();
  last_phase = state.phase;

  const auto frame = std::make_shared<const std::string>(
      state_message(state, config.session,
                    state.phase == TrialPhase::done ? last_summary : std::nullopt)
          .dump());
  broadcast(frame);
  if (tick_callback) tick_callback(state);
}

void Server::Impl::handle_control(const std::string& text) {
  ControlMessage msg;
  try {
    msg = parse_control_message(text);
  } catch (const std::invalid_argument& e) {
    std::cerr << "ui bridge: ignoring message: " << e.what() << "\n";
    return;
  }
  if (auto* c = std::get_if<Command>(&msg)) {
    session.command(*c);
  } else if (auto* p = std::get_if<InputPoseMessage>(&msg)) {
    session.offer_pose(now(), p->pose);
  } else if (auto* j = std::get_if<InputJointsMessage>(&msg)) {
    session.offer_joints(now(), j->joints);
  }
}

void Server::Impl::broadcast(const std::shared_ptr<const std::string>& frame) {
  std::erase_if(clients, [](const std::weak_ptr<Client>& w) {
    auto c = w.lock();
    return !c || c->closed();
  });
  for (auto& weak : clients) {
    if (auto c = weak.lock()) c->send(frame);
  }
}

Server::Server(asio::io_context& io, ServerConfig config)
    : impl_(std::make_shared<Impl>(io, std::move(config))) {}

Server::~Server() {
  if (impl_ && !impl_->stopped) impl_->stop();
}

void Server::start() { impl_->start(); }
void Server::stop() { impl_->stop(); }

std::uint16_t Server::udp_port() const { return impl_->udp_socket.local_endpoint().port(); }
std::uint16_t Server::ui_port() const { return impl_->acceptor.local_endpoint().port(); }

std::vector<TrialRecord> Server::finished_trials() const { return impl_->finished; }

void Server::on_tick(std::function<void(const SessionState&)> callback) {
  impl_->tick_callback = std::move(callback);
}

}  // namespace imuteleop
