#include <doctest.h>

#include <fstream>
#include <sstream>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "sonibot/live_session.hpp"
#include "sonibot/scenario.hpp"
#include "sonibot/session.hpp"
#include "sonibot_tools/live_service.hpp"
#include "temp_dir.hpp"

using namespace sonibot;
using namespace sonibot::service;
using nlohmann::json;

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

constexpr int kMaxMessages = 4000;

class WsClient {
 public:
  explicit WsClient(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
    ws_.text(true);
    hello = read();
  }

  void send(const json& message) { ws_.write(asio::buffer(message.dump())); }
  void send_raw(const std::string& text) { ws_.write(asio::buffer(text)); }

  json read() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }

  /// Reads until a message satisfies pred; fails after kMaxMessages.
  template <class Pred>
  json read_until(Pred pred) {
    for (int i = 0; i < kMaxMessages; ++i) {
      auto msg = read();
      if (pred(msg)) return msg;
    }
    FAIL("message never arrived");
    return {};
  }

  json frame(std::uint64_t seq) {
    return read_until([&](const json& m) { return m["type"] == "frame" && m["seq"] == seq; });
  }

  beast::error_code read_error() {
    beast::flat_buffer buffer;
    beast::error_code ec;
    for (int i = 0; i < kMaxMessages && !ec; ++i) ws_.read(buffer, ec);
    return ec;
  }

  json hello;

 private:
  asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

json steer(const std::string& action, const std::string& id) {
  return {{"type", "steer"}, {"schema", 1}, {"action", action}, {"id", id}};
}

json spawn(const std::string& actor, double x, double y, double facing, const std::string& id) {
  auto m = steer("spawn_actor", id);
  m["actor"] = actor;
  m["x"] = x;
  m["y"] = y;
  m["facing_deg"] = facing;
  return m;
}

auto reply_to(const std::string& id) {
  return [id](const json& m) { return (m["type"] == "ack" || m["type"] == "error") && m["id"] == id; };
}

ServiceOptions fast_options() {
  ServiceOptions options;
  options.port = 0;
  options.speed = 4.0;
  return options;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("clients receive hello and identical frames") {
  LiveService service(EngineConfig{}, fast_options());
  const auto port = service.start();
  WsClient a(port);
  WsClient b(port);
  CHECK(a.hello["type"] == "hello");
  CHECK(a.hello["schema"] == 1);

  const auto first = a.read_until([](const json& m) { return m["type"] == "frame"; });
  const std::uint64_t seq = first["seq"].get<std::uint64_t>() + 5;
  const auto fa = a.frame(seq);
  const auto fb = b.frame(seq);
  CHECK(fa == fb);
  CHECK(fa["t"].get<double>() == doctest::Approx(double(seq) / 30.0));
  CHECK(service.client_count() == 2);
  service.stop();
}

TEST_CASE("steering engages and a treat retracts") {
  LiveService service(EngineConfig{}, fast_options());
  WsClient client(service.start());

  client.send(spawn("visitor", 0.3, 0.0, 180.0, "s1"));
  const auto ack = client.read_until(reply_to("s1"));
  REQUIRE(ack["type"] == "ack");
  const auto applied = ack["applied_frame"].get<std::uint64_t>();
  const auto spawned = client.frame(applied);
  REQUIRE(spawned["actors"].size() == 1);
  CHECK(spawned["actors"][0]["id"] == "visitor");

  client.read_until([](const json& m) { return m["type"] == "frame" && m["phase"] == "Engaged"; });

  client.send(steer("treat_taken", "t1"));
  const auto treat_ack = client.read_until(reply_to("t1"));
  REQUIRE(treat_ack["type"] == "ack");
  const auto frame = client.frame(treat_ack["applied_frame"].get<std::uint64_t>());
  bool retracted = false;
  for (const auto& ev : frame["events"]) retracted |= ev["kind"] == "RetractArm";
  CHECK(retracted);
  CHECK(frame["sound"]["audible"] == false);
  service.stop();
}

TEST_CASE("rejected steering gets an error reply") {
  LiveService service(EngineConfig{}, fast_options());
  WsClient client(service.start());
  auto move = steer("move_actor", "m1");
  move["actor"] = "ghost";
  move["x"] = 1.0;
  move["y"] = 0.0;
  move["facing_deg"] = 0.0;
  client.send(move);
  const auto reply = client.read_until(reply_to("m1"));
  CHECK(reply["type"] == "error");
  CHECK(reply["reason"].get<std::string>().find("ghost") != std::string::npos);

  auto bad = steer("set_config_overrides", "o1");
  bad["overrides"] = {{"p_off", 0.99}};
  client.send(bad);
  CHECK(client.read_until(reply_to("o1"))["type"] == "error");
  service.stop();
}

TEST_CASE("malformed input keeps the connection open") {
  LiveService service(EngineConfig{}, fast_options());
  WsClient client(service.start());
  client.send_raw("{this is not json");
  const auto error = client.read_until([](const json& m) { return m["type"] == "error"; });
  CHECK(error["reason"] == "malformed JSON");
  client.send(spawn("a", 1.0, 0.0, 180.0, "after"));
  CHECK(client.read_until(reply_to("after"))["type"] == "ack");
  service.stop();
}

TEST_CASE("an unsupported schema is refused and closed") {
  LiveService service(EngineConfig{}, fast_options());
  WsClient client(service.start());
  auto msg = steer("treat_taken", "v2");
  msg["schema"] = 2;
  client.send(msg);
  const auto error = client.read_until(reply_to("v2"));
  CHECK(error["type"] == "error");
  CHECK(error["reason"].get<std::string>().find("unsupported schema") != std::string::npos);
  CHECK(client.read_error() == websocket::error::closed);
  service.stop();
}

TEST_CASE("a timed session records a replayable log") {
  testing::TempDir dir;
  auto options = fast_options();
  options.duration_s = 2.0;
  options.record_dir = dir.path() / "rec";
  options.audio = AudioSink::WavFile;
  options.audio_path = dir.path() / "live.wav";
  LiveService service(EngineConfig{}, options);
  {
    WsClient client(service.start());
    client.send(spawn("visitor", 1.2, 0.1, 175.0, "s"));
    const auto ack = client.read_until(reply_to("s"));
    auto move = steer("move_actor", "m");
    move["actor"] = "visitor";
    move["x"] = 0.4;
    move["y"] = 0.0;
    move["facing_deg"] = 180.0;
    client.frame(ack["applied_frame"].get<std::uint64_t>() + 3);
    client.send(move);
    client.read_until(reply_to("m"));
    service.wait();
  }
  service.stop();
  CHECK(service.frames_sent() == 60);

  const auto rec = dir.path() / "rec";
  for (const char* name : {"steer_log.jsonl", "replay.json", "config.json", "trace.csv", "events.log"}) {
    CHECK(std::filesystem::exists(rec / name));
  }
  CHECK(std::filesystem::exists(options.audio_path));
  const auto log = decode_steer_log(slurp(rec / "steer_log.jsonl"));
  CHECK(log.size() == 2);

  const auto config = load_config(rec / "config.json").config;
  const auto replay = run_scenario(scenario::load_scenario(rec / "replay.json"), config, {0, false});
  CHECK(format_trace_csv(replay.rows) == slurp(rec / "trace.csv"));
}

TEST_CASE("stop is idempotent and safe before start") {
  LiveService idle(EngineConfig{}, fast_options());
  idle.stop();
  LiveService service(EngineConfig{}, fast_options());
  service.start();
  service.stop();
  service.stop();
  CHECK(service.client_count() == 0);
}
