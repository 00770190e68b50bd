#include "codrill/session/server.hpp"

#include <chrono>
#include <list>
#include <mutex>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "codrill/common/error.hpp"
#include "codrill/scenario/runlog.hpp"
#include "codrill/session/live_session.hpp"

namespace codrill::session {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

class Connection;

struct SessionServer::Impl {
  scenario::Scenario scenario;
  ServeOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::uint16_t port = 0;
  int next_id = 1;
  std::size_t ended = 0;
  mutable std::mutex logs_mutex;
  std::vector<std::filesystem::path> logs;

  void accept();
  void session_ended(int id, std::optional<scenario::RunLog> log);
  std::filesystem::path log_path(int id) const;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, SessionServer::Impl& server, int id)
      : ws_(std::move(socket)), timer_(server.ioc), server_(server), id_(id) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kMaxMessageBytes);
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

 private:
  struct Outgoing {
    std::string text;
    bool reliable;
  };

  void on_accept(beast::error_code ec) {
    if (ec) return end();
    try {
      session_ = std::make_unique<LiveSession>(server_.scenario, SessionOptions{id_, server_.options.snapshot_rate});
    } catch (const Error& e) {
      closing_ = true;
      enqueue(error_message(e.code(), e.what()).dump(), true);
      return;
    }
    pacer_.emplace(server_.scenario.live.max_catch_up, server_.options.time_scale);
    start_ = std::chrono::steady_clock::now();
    enqueue(to_json(session_->hello()).dump(), true);
    read();
    schedule();
  }

  void read() { ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return end();
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      const auto j = parse_frame(text);
      const auto type = message_type(j);
      if (type != "steer") throw FormatError("unexpected message type '" + type + "'");
      session_->submit(steer_from_json(j));
    } catch (const Error& e) {
      enqueue(error_message(e.code(), e.what()).dump(), true);
    }
    read();
  }

  void schedule() {
    timer_.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(server_.options.tick_period)));
    timer_.async_wait(beast::bind_front_handler(&Connection::on_tick, shared_from_this()));
  }

  void on_tick(beast::error_code ec) {
    if (ec || ended_) return;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    try {
      session_->advance_to(pacer_->target(wall, session_->time()));
    } catch (const Error& e) {
      closing_ = true;
      enqueue(error_message(e.code(), e.what()).dump(), true);
      return;
    }
    for (auto& m : session_->drain()) enqueue(m.dump(), m.at("type") != "snapshot");
    schedule();
  }

  void enqueue(std::string text, bool reliable) {
    queue_.push_back({std::move(text), reliable});
    if (!reliable && ++snapshots_ > server_.options.max_backlog) drop_oldest_snapshot();
    if (!writing_) write_next();
  }

  // Snapshots are disposable; events and errors are not.
  void drop_oldest_snapshot() {
    auto it = queue_.begin();
    if (writing_ && it != queue_.end()) ++it;
    for (; it != queue_.end(); ++it) {
      if (!it->reliable) {
        queue_.erase(it);
        --snapshots_;
        return;
      }
    }
  }

  void write_next() {
    if (queue_.empty()) {
      if (closing_) close();
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front().text),
                    beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (!queue_.front().reliable) --snapshots_;
    queue_.pop_front();
    if (ec) return end();
    write_next();
  }

  void close() {
    ws_.async_close(websocket::close_code::normal,
                    beast::bind_front_handler(&Connection::on_close, shared_from_this()));
  }

  void on_close(beast::error_code) { end(); }

  void end() {
    if (ended_) return;
    ended_ = true;
    timer_.cancel();
    std::optional<scenario::RunLog> log;
    if (session_) log = session_->finish();
    server_.session_ended(id_, std::move(log));
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  SessionServer::Impl& server_;
  int id_;
  beast::flat_buffer buffer_;
  std::unique_ptr<LiveSession> session_;
  std::optional<Pacer> pacer_;
  std::chrono::steady_clock::time_point start_;
  std::list<Outgoing> queue_;
  std::size_t snapshots_ = 0;
  bool writing_ = false;
  bool closing_ = false;
  bool ended_ = false;
};

void SessionServer::Impl::accept() {
  acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<Connection>(std::move(socket), *this, next_id++)->start();
    accept();
  });
}

std::filesystem::path SessionServer::Impl::log_path(int id) const {
  const auto& out = *options.out;
  if (id == 1) return out;
  auto p = out;
  p.replace_filename(out.stem().string() + "-" + std::to_string(id) + out.extension().string());
  return p;
}

void SessionServer::Impl::session_ended(int id, std::optional<scenario::RunLog> log) {
  if (log && options.out) {
    const auto path = log_path(id);
    scenario::save_runlog(path, *log);
    std::lock_guard lock(logs_mutex);
    logs.push_back(path);
  }
  ++ended;
  if (options.max_sessions && ended >= options.max_sessions) {
    beast::error_code ignored;
    acceptor.close(ignored);
    ioc.stop();
  }
}

SessionServer::SessionServer(scenario::Scenario scenario, ServeOptions options) : impl_(std::make_unique<Impl>()) {
  if (scenario.input != scenario::InputKind::live)
    throw ConfigurationError("scenario '" + scenario.name + "' is not a live scenario (input.type must be live)");
  scenario::validate_scenario(scenario);
  impl_->scenario = std::move(scenario);
  impl_->options = std::move(options);
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->options.address, ec);
  if (ec) throw ConfigurationError("invalid address '" + impl_->options.address + "'");
  const tcp::endpoint endpoint(address, impl_->options.port);
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec)
    throw ConfigurationError("cannot listen on " + impl_->options.address + ":" +
                             std::to_string(impl_->options.port) + ": " + ec.message());
  impl_->port = acceptor.local_endpoint().port();
}

SessionServer::~SessionServer() = default;

std::uint16_t SessionServer::port() const { return impl_->port; }

void SessionServer::run() {
  impl_->accept();
  impl_->ioc.run();
}

void SessionServer::stop() { impl_->ioc.stop(); }

std::vector<std::filesystem::path> SessionServer::saved_logs() const {
  std::lock_guard lock(impl_->logs_mutex);
  return impl_->logs;
}

}  // namespace codrill::session
