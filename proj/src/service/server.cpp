#include "service/server.hpp"

#include <chrono>
#include <deque>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "common/error.hpp"
#include "common/log.hpp"
#include "io/dictionary_file.hpp"
#include "pipeline/control.hpp"
#include "pipeline/enhancer.hpp"
#include "pipeline/telemetry.hpp"

namespace gccnmf {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, TelemetryHub& hub, Enhancer<float>& enhancer)
      : ws_(std::move(socket)), hub_(hub), enhancer_(enhancer) {}

  ~Session() {
    if (id_) hub_.unsubscribe(id_);
  }

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(
        beast::bind_front_handler(&Session::on_accept, shared_from_this()));
  }

  void close() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ec);
      self->ws_.next_layer().close();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<Session> weak = shared_from_this();
    id_ = hub_.subscribe([weak] {
      if (auto self = weak.lock())
        asio::post(self->ws_.get_executor(), [self] { self->write_next(); });
    });
    log(LogLevel::kInfo, "connection " + std::to_string(id_) + " opened");
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Session::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      log(LogLevel::kInfo, "connection " + std::to_string(id_) + " closed: " + ec.message());
      hub_.unsubscribe(id_);
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!ws_.got_text()) {
      hub_.send_to(id_, false, ControlAck{id_, -1, false, "control frames must be text", 0}.to_json());
    } else {
      handle_control(text);
    }
    read_next();
  }

  void handle_control(const std::string& text) {
    std::optional<std::int64_t> msg_id;
    try {
      ControlMessage msg = parse_control(text, &msg_id);
      msg.source = id_;
      if (msg.kind == ControlKind::kSetDictionary) {
        const auto& p = msg.payload;
        require(p.contains("path") && p["path"].is_string(), ErrorCode::kInvalidInput,
                "set_dictionary needs a string path");
        msg.dictionary = std::make_shared<const Dictionary>(
            load_dictionary(p["path"].get<std::string>()));
      }
      enhancer_.post(std::move(msg));
    } catch (const std::exception& e) {
      ControlAck ack{id_, msg_id.value_or(-1), false, e.what(), 0};
      hub_.send_to(id_, false, ack.to_json());
    }
  }

  void write_next() {
    if (writing_) return;
    std::optional<OutboundMessage> m;
    if (!(m = hub_.try_pop(id_))) return;
    writing_ = true;
    current_ = std::move(*m);
    ws_.binary(current_.binary);
    ws_.async_write(asio::buffer(*current_.data),
                    beast::bind_front_handler(&Session::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    current_ = {};
    if (ec) {
      hub_.unsubscribe(id_);
      return;
    }
    write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  TelemetryHub& hub_;
  Enhancer<float>& enhancer_;
  beast::flat_buffer buffer_;
  std::uint64_t id_ = 0;
  bool writing_ = false;
  OutboundMessage current_;
};

}  // namespace

constexpr int kSendBufferBytes = 64 * 1024;

struct Service::Impl {
  ServiceConfig config;
  Enhancer<float> enhancer;
  TelemetryHub hub;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread net_thread;
  std::thread audio_thread;
  std::atomic<bool> stopping{false};
  std::atomic<std::uint64_t> published{0};
  std::atomic<std::uint64_t> frames{0};
  std::mutex sessions_mutex;
  std::vector<std::weak_ptr<Session>> sessions;

  Impl(ServiceConfig c, std::shared_ptr<const Dictionary> dict)
      : config(std::move(c)), enhancer(config.enhancer, std::move(dict)),
        hub(config.queue_capacity) {}

  void accept_next() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket s) {
      if (ec) return;
      // Keep kernel buffering short so a stalled reader reaches the hub's
      // drop policy instead of queueing seconds of stale telemetry.
      s.set_option(asio::socket_base::send_buffer_size(kSendBufferBytes), ec);
      auto session = std::make_shared<Session>(std::move(s), hub, enhancer);
      {
        std::lock_guard lock(sessions_mutex);
        sessions.push_back(session);
      }
      session->start();
      accept_next();
    });
  }

  void audio_loop() {
    const std::size_t hop = enhancer.hop();
    const auto& src = config.source;
    const std::size_t length = src.frames();
    std::vector<float> il(hop), ir(hop), ol(hop), orr(hop);
    std::size_t pos = 0;
    const auto period = std::chrono::duration<double>(static_cast<double>(hop) /
                                                      config.enhancer.sample_rate);
    auto next = std::chrono::steady_clock::now();
    while (!stopping) {
      for (std::size_t i = 0; i < hop; ++i) {
        il[i] = src.channels[0][pos];
        ir[i] = src.channels[1][pos];
        if (++pos == length) pos = 0;
      }
      enhancer.process(il, ir, ol, orr);
      ++frames;
      for (auto& ack : enhancer.take_acks()) hub.send_to(ack.source, false, ack.to_json());
      if (enhancer.telemetry_due()) {
        const auto bytes = encode_telemetry(enhancer.telemetry());
        hub.broadcast(true, std::string(bytes.begin(), bytes.end()));
        enhancer.mark_telemetry_published();
        ++published;
      }
      if (config.stream_audio) {
        const auto bytes = encode_audio(enhancer.frames() - 1, ol, orr);
        hub.broadcast(true, std::string(bytes.begin(), bytes.end()));
      }
      if (config.realtime) {
        next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
        std::this_thread::sleep_until(next);
      }
    }
  }
};

Service::Service(ServiceConfig config, std::shared_ptr<const Dictionary> dict) {
  require(config.source.channel_count() == 2, ErrorCode::kInvalidInput,
          "service source must be stereo");
  require(config.source.frames() > 0, ErrorCode::kEmptyInput, "service source is empty");
  require(std::abs(config.source.sample_rate - config.enhancer.sample_rate) < 1e-9,
          ErrorCode::kConfigMismatch, "source sample rate differs from the configuration");
  impl_ = std::make_unique<Impl>(std::move(config), std::move(dict));
  impl_->enhancer.set_looping_source(true);

  beast::error_code ec;
  const auto address = asio::ip::make_address(impl_->config.host, ec);
  require(!ec, ErrorCode::kInvalidParameter, "bad host address " + impl_->config.host);
  const tcp::endpoint endpoint(address, impl_->config.port);
  auto& acc = impl_->acceptor;
  acc.open(endpoint.protocol(), ec);
  if (!ec) acc.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(endpoint, ec);
  if (ec)
    fail(ErrorCode::kPortBusy, "cannot bind " + impl_->config.host + ":" +
                                   std::to_string(impl_->config.port) + ": " + ec.message());
  acc.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) fail(ErrorCode::kPortBusy, "cannot listen: " + ec.message());

  impl_->accept_next();
  impl_->net_thread = std::thread([this] { impl_->ioc.run(); });
  impl_->audio_thread = std::thread([this] { impl_->audio_loop(); });
  log(LogLevel::kInfo, "serving on port " + std::to_string(port()));
}

Service::~Service() { stop(); }

std::uint16_t Service::port() const noexcept {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

ServiceStats Service::stats() const {
  ServiceStats s;
  s.frames = impl_->frames;
  s.telemetry_published = impl_->published;
  s.telemetry_dropped = impl_->hub.total_dropped();
  s.connections = impl_->hub.subscribers();
  return s;
}

void Service::stop() {
  if (!impl_ || impl_->stopping.exchange(true)) return;
  if (impl_->audio_thread.joinable()) impl_->audio_thread.join();
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    std::lock_guard lock(impl_->sessions_mutex);
    for (auto& w : impl_->sessions)
      if (auto s = w.lock()) s->close();
  });
  // Let pending closes run, then stop.
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  impl_->ioc.stop();
  if (impl_->net_thread.joinable()) impl_->net_thread.join();
}

}  // namespace gccnmf
