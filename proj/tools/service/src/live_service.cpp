#include "sonibot_tools/live_service.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "sonibot/live_session.hpp"
#include "sonibot/messages.hpp"
#include "sonibot/synth.hpp"
#include "sonibot/wav.hpp"

namespace sonibot::service {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;
using Text = std::shared_ptr<const std::string>;

constexpr std::size_t kMaxQueuedMessages = 512;
constexpr auto kShutdownGrace = std::chrono::milliseconds(500);

class Client;

struct Inbound {
  std::weak_ptr<Client> client;
  wire::SteerMessage message;
};

struct Reply {
  std::weak_ptr<Client> client;
  Text text;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

class ServiceCore {
 public:
  ServiceCore(EngineConfig config, ServiceOptions options)
      : config_(std::move(config)), options_(std::move(options)), session_(config_, options_.seed) {
    throw_if_invalid(config_.validate());
    if (!(options_.speed > 0.0)) throw std::invalid_argument("speed must be positive");
  }

  std::uint16_t start();
  void wait();
  void stop();
  void finish() {
    {
      std::lock_guard lock(state_mutex_);
      finished_ = true;
    }
    state_cv_.notify_all();
  }

  // io thread only
  void attach(const std::shared_ptr<Client>& client) {
    clients_.insert(client);
    client_count_ = clients_.size();
  }
  void detach(const std::shared_ptr<Client>& client) {
    clients_.erase(client);
    client_count_ = clients_.size();
  }
  void enqueue(std::weak_ptr<Client> client, wire::SteerMessage message) {
    std::lock_guard lock(inbound_mutex_);
    inbound_.push_back({std::move(client), std::move(message)});
  }

  std::uint64_t frames_sent() const noexcept { return frames_sent_; }
  std::size_t client_count() const noexcept { return client_count_; }

 private:
  void accept();
  void control_loop();
  void audio_loop();
  void write_recordings();
  bool wait_until(Clock::time_point deadline) {
    std::unique_lock lock(state_mutex_);
    return !state_cv_.wait_until(lock, deadline, [&] { return stopping_; });
  }

  EngineConfig config_;
  ServiceOptions options_;
  LiveSession session_;  // control thread only while running

  asio::io_context ioc_;
  tcp::acceptor acceptor_{ioc_};
  std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work_;
  std::optional<asio::signal_set> signals_;
  std::set<std::shared_ptr<Client>> clients_;
  std::atomic<std::size_t> client_count_{0};

  std::mutex inbound_mutex_;
  std::vector<Inbound> inbound_;

  synth::ParamMailbox mailbox_;
  std::vector<float> audio_;  // audio thread only while running

  std::mutex state_mutex_;
  std::condition_variable state_cv_;
  bool finished_ = false;
  bool stopping_ = false;
  bool started_ = false;
  bool stopped_ = false;
  std::atomic<std::uint64_t> frames_sent_{0};

  std::thread io_thread_;
  std::thread control_thread_;
  std::thread audio_thread_;
};

class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, ServiceCore& core) : ws_(std::move(socket)), core_(core) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(beast::bind_front_handler(&Client::on_accept, shared_from_this()));
  }

  void send(Text text) {
    if (!open_ || closing_) return;
    if (queue_.size() >= kMaxQueuedMessages) {
      // A client that cannot keep up is dropped rather than buffering without bound.
      beast::get_lowest_layer(ws_).close();
      return;
    }
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void close() {
    if (!open_ || closing_) return;
    closing_ = true;
    if (queue_.empty()) do_close();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    open_ = true;
    core_.attach(shared_from_this());
    send(std::make_shared<const std::string>(wire::encode_hello()));
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Client::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      open_ = false;
      core_.detach(shared_from_this());
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());

    auto decoded = wire::decode_client_message(text);
    if (const auto* error = std::get_if<wire::DecodeError>(&decoded)) {
      send(std::make_shared<const std::string>(wire::encode_error(error->reason, error->request_id)));
      if (error->unsupported_schema) {
        close();
        return;
      }
    } else if (auto* steer = std::get_if<wire::SteerMessage>(&std::get<wire::ClientMessage>(decoded))) {
      core_.enqueue(weak_from_this(), std::move(*steer));
    }
    do_read();
  }

  void do_write() {
    ws_.async_write(asio::buffer(*queue_.front()),
                    beast::bind_front_handler(&Client::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      queue_.clear();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      do_write();
    } else if (closing_) {
      do_close();
    }
  }

  void do_close() {
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) { self->open_ = false; });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<Text> queue_;
  ServiceCore& core_;
  bool open_ = false;
  bool closing_ = false;
};

std::uint16_t ServiceCore::start() {
  if (started_) throw std::logic_error("service already started");
  started_ = true;

  const tcp::endpoint endpoint(asio::ip::make_address(options_.host), options_.port);
  acceptor_.open(endpoint.protocol());
  acceptor_.set_option(asio::socket_base::reuse_address(true));
  acceptor_.bind(endpoint);
  acceptor_.listen(asio::socket_base::max_listen_connections);
  const auto port = acceptor_.local_endpoint().port();

  work_.emplace(ioc_.get_executor());
  if (options_.handle_signals) {
    signals_.emplace(ioc_, SIGINT, SIGTERM);
    signals_->async_wait([this](beast::error_code ec, int) {
      if (!ec) finish();
    });
  }
  accept();
  io_thread_ = std::thread([this] { ioc_.run(); });
  control_thread_ = std::thread([this] { control_loop(); });
  audio_thread_ = std::thread([this] { audio_loop(); });
  return port;
}

void ServiceCore::accept() {
  acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Client>(std::move(socket), *this)->start();
    accept();
  });
}

void ServiceCore::control_loop() {
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(1.0 / (config_.control_rate_hz * options_.speed)));
  std::optional<std::size_t> frame_limit;
  if (options_.duration_s) {
    scenario::Scenario probe;
    probe.duration_s = *options_.duration_s;
    probe.frame_rate = config_.control_rate_hz;
    frame_limit = probe.frame_count();
  }

  auto deadline = Clock::now();
  while (!frame_limit || session_.next_frame() < *frame_limit) {
    std::vector<Inbound> batch;
    {
      std::lock_guard lock(inbound_mutex_);
      batch.swap(inbound_);
    }
    std::vector<Reply> replies;
    for (auto& item : batch) {
      const auto outcome = session_.apply(item.message);
      auto text = outcome.accepted
                      ? wire::encode_ack(item.message.request_id, outcome.frame, outcome.applied_at)
                      : wire::encode_error(outcome.reason, item.message.request_id);
      replies.push_back({std::move(item.client), std::make_shared<const std::string>(std::move(text))});
    }

    const auto frame = session_.tick();
    mailbox_.publish(frame.sound);
    auto text = std::make_shared<const std::string>(wire::encode_frame(frame));
    asio::post(ioc_, [this, replies = std::move(replies), text = std::move(text)] {
      for (const auto& reply : replies) {
        if (auto client = reply.client.lock()) client->send(reply.text);
      }
      for (const auto& client : clients_) client->send(text);
    });
    ++frames_sent_;

    deadline += period;
    const auto now = Clock::now();
    if (now > deadline + period) deadline = now;  // overloaded: stretch instead of bursting
    if (!wait_until(deadline)) return;
  }
  finish();
}

void ServiceCore::audio_loop() {
  synth::Synthesizer synth(config_.synth);
  const auto block = static_cast<std::size_t>(config_.synth.block_size);
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
      static_cast<double>(block) / (config_.synth.sample_rate * options_.speed)));
  std::vector<float> samples(block);
  std::vector<std::int16_t> pcm(block);

  auto deadline = Clock::now();
  while (true) {
    if (auto params = mailbox_.take()) synth.set_params(*params);
    synth.render(samples);
    switch (options_.audio) {
      case AudioSink::None:
        break;
      case AudioSink::WavFile:
        audio_.insert(audio_.end(), samples.begin(), samples.end());
        break;
      case AudioSink::PcmStdout:
        for (std::size_t i = 0; i < block; ++i) pcm[i] = wav::quantize(samples[i]);
        std::fwrite(pcm.data(), sizeof(std::int16_t), block, stdout);
        std::fflush(stdout);
        break;
    }
    deadline += period;
    const auto now = Clock::now();
    if (now > deadline + period) deadline = now;
    if (!wait_until(deadline)) return;
  }
}

void ServiceCore::wait() {
  std::unique_lock lock(state_mutex_);
  state_cv_.wait(lock, [&] { return finished_ || stopping_; });
}

void ServiceCore::stop() {
  if (!started_ || stopped_) return;
  stopped_ = true;
  {
    std::lock_guard lock(state_mutex_);
    stopping_ = true;
  }
  state_cv_.notify_all();
  control_thread_.join();
  audio_thread_.join();

  auto grace = std::make_shared<asio::steady_timer>(ioc_, kShutdownGrace);
  asio::post(ioc_, [this, grace] {
    beast::error_code ignored;
    acceptor_.close(ignored);
    if (signals_) signals_->cancel(ignored);
    for (const auto& client : clients_) client->close();
    work_.reset();
    grace->async_wait([this](beast::error_code) { ioc_.stop(); });
  });
  io_thread_.join();
  clients_.clear();
  client_count_ = 0;
  write_recordings();
}

void ServiceCore::write_recordings() {
  if (options_.record_dir) std::filesystem::create_directories(*options_.record_dir);
  if (options_.audio == AudioSink::WavFile) {
    if (options_.audio_path.has_parent_path()) std::filesystem::create_directories(options_.audio_path.parent_path());
    wav::write_wav(std::span<const float>(audio_), config_.synth.sample_rate, options_.audio_path);
  }
  if (!options_.record_dir) return;
  const auto& dir = *options_.record_dir;
  write_file(dir / "steer_log.jsonl", encode_steer_log(session_.steer_log()));
  write_file(dir / "replay.json", scenario::serialize_scenario(session_.replay_scenario()));
  write_file(dir / "config.json", serialize_config(config_));
  write_file(dir / "trace.csv", format_trace_csv(session_.rows()));
  write_file(dir / "events.log", format_event_log(session_.events()));
}

}  // namespace

struct LiveService::Impl : ServiceCore {
  using ServiceCore::ServiceCore;
};

LiveService::LiveService(EngineConfig config, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

LiveService::~LiveService() {
  try {
    impl_->stop();
  } catch (const std::exception& e) {
    std::cerr << "sonibot: shutdown: " << e.what() << "\n";
  }
}

std::uint16_t LiveService::start() { return impl_->start(); }
void LiveService::wait() { impl_->wait(); }
void LiveService::stop() { impl_->stop(); }
std::uint64_t LiveService::frames_sent() const noexcept { return impl_->frames_sent(); }
std::size_t LiveService::client_count() const { return impl_->client_count(); }

}  // namespace sonibot::service
