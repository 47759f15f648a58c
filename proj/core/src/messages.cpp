#include "sonibot/messages.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace sonibot::wire {
namespace {

using nlohmann::json;

json user_json(std::optional<UserId> id) {
  return id ? json(to_underlying(*id)) : json(nullptr);
}

std::optional<SteerAction> parse_action(const std::string& name) {
  if (name == "move_actor") return SteerAction::MoveActor;
  if (name == "spawn_actor") return SteerAction::SpawnActor;
  if (name == "remove_actor") return SteerAction::RemoveActor;
  if (name == "treat_taken") return SteerAction::TreatTaken;
  if (name == "set_config_overrides") return SteerAction::SetConfigOverrides;
  return std::nullopt;
}

std::optional<double> finite_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::nullopt;
  const double v = it->get<double>();
  return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

}  // namespace

std::string_view to_string(SteerAction action) {
  switch (action) {
    case SteerAction::MoveActor: return "move_actor";
    case SteerAction::SpawnActor: return "spawn_actor";
    case SteerAction::RemoveActor: return "remove_actor";
    case SteerAction::TreatTaken: return "treat_taken";
    case SteerAction::SetConfigOverrides: return "set_config_overrides";
  }
  return "?";
}

std::variant<ClientMessage, DecodeError> decode_client_message(std::string_view text) {
  const json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return DecodeError{"malformed JSON", std::nullopt, false};
  if (!doc.is_object()) return DecodeError{"message must be a JSON object", std::nullopt, false};

  std::optional<std::string> request_id;
  if (const auto it = doc.find("id"); it != doc.end()) {
    request_id = it->is_string() ? it->get<std::string>() : it->dump();
  }
  const auto fail = [&](std::string reason) { return DecodeError{std::move(reason), request_id, false}; };

  const auto schema = doc.find("schema");
  if (schema == doc.end() || !schema->is_number_integer()) return fail("missing integer \"schema\"");
  if (schema->get<int>() != kSchemaVersion) {
    return DecodeError{"unsupported schema " + schema->dump() + "; server speaks " + std::to_string(kSchemaVersion),
                       request_id, true};
  }

  const auto type = doc.find("type");
  if (type == doc.end() || !type->is_string()) return fail("missing string \"type\"");
  if (*type == "hello") return ClientMessage{Hello{schema->get<int>()}};
  if (*type != "steer") return fail("unknown message type " + type->dump());

  const auto action_it = doc.find("action");
  if (action_it == doc.end() || !action_it->is_string()) return fail("missing string \"action\"");
  const auto action = parse_action(action_it->get<std::string>());
  if (!action) return fail("unknown action " + action_it->dump());

  SteerMessage msg;
  msg.action = *action;
  msg.request_id = request_id;
  if (const auto it = doc.find("actor"); it != doc.end()) {
    if (!it->is_string()) return fail("\"actor\" must be a string");
    msg.actor = it->get<std::string>();
  }

  switch (msg.action) {
    case SteerAction::MoveActor:
    case SteerAction::SpawnActor: {
      if (msg.actor.empty()) return fail(std::string(to_string(msg.action)) + " needs \"actor\"");
      const auto x = finite_number(doc, "x");
      const auto y = finite_number(doc, "y");
      const auto facing = finite_number(doc, "facing_deg");
      if (!x || !y || !facing) {
        return fail(std::string(to_string(msg.action)) + " needs finite numbers x, y and facing_deg");
      }
      msg.pose = {*x, *y, *facing};
      break;
    }
    case SteerAction::RemoveActor:
      if (msg.actor.empty()) return fail("remove_actor needs \"actor\"");
      break;
    case SteerAction::TreatTaken:
      break;
    case SteerAction::SetConfigOverrides: {
      const auto it = doc.find("overrides");
      if (it == doc.end() || !it->is_object() || it->empty()) {
        return fail("set_config_overrides needs a non-empty \"overrides\" object");
      }
      for (const auto& [key, value] : it->items()) {
        if (!value.is_number()) return fail("override " + key + " must be a number");
        msg.overrides[key] = value.get<double>();
      }
      break;
    }
  }
  return ClientMessage{std::move(msg)};
}

std::string encode_steer(const SteerMessage& message) {
  json doc{{"type", "steer"}, {"schema", kSchemaVersion}, {"action", std::string(to_string(message.action))}};
  if (message.request_id) doc["id"] = *message.request_id;
  if (!message.actor.empty()) doc["actor"] = message.actor;
  if (message.action == SteerAction::MoveActor || message.action == SteerAction::SpawnActor) {
    doc["x"] = message.pose.x;
    doc["y"] = message.pose.y;
    doc["facing_deg"] = message.pose.facing_deg;
  }
  if (message.action == SteerAction::SetConfigOverrides) {
    doc["overrides"] = json::object();
    for (const auto& [key, value] : message.overrides) doc["overrides"][key] = value;
  }
  return doc.dump();
}

std::string encode_hello() {
  return json{{"type", "hello"},
              {"schema", kSchemaVersion},
              {"server", "sonibot"},
              {"supported", json::array({kSchemaVersion})}}
      .dump();
}

std::string encode_frame(const engine::FrameOutput& frame) {
  json doc;
  doc["type"] = "frame";
  doc["schema"] = kSchemaVersion;
  doc["seq"] = frame.frame;
  doc["t"] = frame.t;
  doc["phase"] = std::string(behavior::to_string(frame.phase));
  doc["target"] = user_json(frame.target);

  doc["users"] = json::array();
  for (const auto& s : frame.users) {
    doc["users"].push_back({{"id", to_underlying(s.user)},
                            {"raw_p", s.raw_p},
                            {"p", s.p},
                            {"dp_dt", s.dp_dt},
                            {"done", s.done}});
  }
  doc["sound"] = {{"volume", frame.sound.volume},
                  {"frequency", frame.sound.frequency},
                  {"vibrato", frame.sound.vibrato},
                  {"audible", frame.sound.audible}};
  doc["led"] = {{"rgb", {frame.led.rgb.r, frame.led.rgb.g, frame.led.rgb.b}},
                {"intensity", frame.led.intensity}};

  doc["events"] = json::array();
  for (const auto& ev : frame.actuator_events) {
    json e{{"kind", std::string(behavior::to_string(ev.kind))}, {"user", user_json(ev.user)}, {"t", ev.t}};
    if (ev.reason) e["reason"] = std::string(behavior::to_string(*ev.reason));
    doc["events"].push_back(std::move(e));
  }

  doc["actors"] = json::array();
  for (const auto& a : frame.actors) {
    doc["actors"].push_back({{"id", a.actor},
                             {"x", a.pose.x},
                             {"y", a.pose.y},
                             {"facing_deg", a.pose.facing_deg},
                             {"visible", a.visible},
                             {"user", user_json(a.user)}});
  }
  return doc.dump();
}

std::string encode_ack(const std::optional<std::string>& request_id, std::uint64_t frame, double t) {
  json doc{{"type", "ack"}, {"schema", kSchemaVersion}, {"applied_frame", frame}, {"applied_at", t}};
  doc["id"] = request_id ? json(*request_id) : json(nullptr);
  return doc.dump();
}

std::string encode_error(std::string_view reason, const std::optional<std::string>& request_id) {
  json doc{{"type", "error"}, {"schema", kSchemaVersion}, {"reason", std::string(reason)}};
  doc["id"] = request_id ? json(*request_id) : json(nullptr);
  return doc.dump();
}

}  // namespace sonibot::wire
