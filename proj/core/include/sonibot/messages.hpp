#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "sonibot/engine.hpp"
#include "sonibot/scenario.hpp"

// JSON text messages exchanged with live clients; see docs/protocol.md.
namespace sonibot::wire {

inline constexpr int kSchemaVersion = 1;

enum class SteerAction { MoveActor, SpawnActor, RemoveActor, TreatTaken, SetConfigOverrides };

std::string_view to_string(SteerAction action);

struct SteerMessage {
  SteerAction action = SteerAction::MoveActor;
  std::string actor;  // empty only for treat_taken (engaged target) and overrides
  scenario::Pose pose;
  std::map<std::string, double> overrides;
  std::optional<std::string> request_id;  // echoed in the ack/error reply
};

struct Hello {
  int schema = kSchemaVersion;
};

using ClientMessage = std::variant<Hello, SteerMessage>;

struct DecodeError {
  std::string reason;
  std::optional<std::string> request_id;
  bool unsupported_schema = false;  // the peer speaks another protocol version
};

/// Accepts "hello" and "steer" messages. Unknown fields are ignored; a schema
/// other than kSchemaVersion is an error.
std::variant<ClientMessage, DecodeError> decode_client_message(std::string_view text);

std::string encode_steer(const SteerMessage& message);
std::string encode_hello();
std::string encode_frame(const engine::FrameOutput& frame);
std::string encode_ack(const std::optional<std::string>& request_id, std::uint64_t frame, double t);
std::string encode_error(std::string_view reason, const std::optional<std::string>& request_id);

}  // namespace sonibot::wire
