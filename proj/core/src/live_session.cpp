#include "sonibot/live_session.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sonibot {
namespace {

using nlohmann::json;

std::string incarnation_key(const std::string& name, int incarnation) {
  return incarnation <= 1 ? name : name + "#" + std::to_string(incarnation);
}

}  // namespace

LiveSession::LiveSession(EngineConfig config, std::uint64_t seed)
    : engine_(config, seed), frame_rate_(config.control_rate_hz) {}

double LiveSession::next_frame_time() const noexcept {
  return static_cast<double>(engine_.frames()) / frame_rate_;
}

std::vector<LiveSession::LiveActor>::iterator LiveSession::find_actor(const std::string& name) {
  return std::find_if(actors_.begin(), actors_.end(), [&](const LiveActor& a) { return a.name == name; });
}

SteerOutcome LiveSession::apply(const wire::SteerMessage& message) {
  SteerOutcome outcome;
  outcome.frame = engine_.frames();
  outcome.applied_at = next_frame_time();
  auto reject = [&](std::string reason) {
    outcome.accepted = false;
    outcome.reason = std::move(reason);
    return outcome;
  };

  using wire::SteerAction;
  switch (message.action) {
    case SteerAction::SpawnActor: {
      if (message.actor.empty()) return reject("spawn_actor needs an actor id");
      if (find_actor(message.actor) != actors_.end()) {
        return reject("actor \"" + message.actor + "\" already exists");
      }
      const int incarnation = ++incarnations_[message.actor];
      actors_.push_back({message.actor, incarnation_key(message.actor, incarnation), message.pose});
      break;
    }
    case SteerAction::MoveActor: {
      const auto it = find_actor(message.actor);
      if (it == actors_.end()) return reject("unknown actor \"" + message.actor + "\"");
      it->pose = message.pose;
      break;
    }
    case SteerAction::RemoveActor: {
      const auto it = find_actor(message.actor);
      if (it == actors_.end()) return reject("unknown actor \"" + message.actor + "\"");
      actors_.erase(it);
      break;
    }
    case SteerAction::TreatTaken: {
      engine::TreatRequest request;
      if (!message.actor.empty()) {
        const auto it = find_actor(message.actor);
        if (it == actors_.end()) return reject("unknown actor \"" + message.actor + "\"");
        request.actor = it->key;
      }
      pending_treats_.push_back(std::move(request));
      break;
    }
    case SteerAction::SetConfigOverrides: {
      try {
        engine_.apply_overrides(message.overrides);
      } catch (const InvalidConfig& e) {
        std::string reason = "config override rejected:";
        for (const auto& issue : e.issues()) reason += " " + issue.field + ": " + issue.message + ";";
        return reject(reason);
      }
      pending_log_.push_back({outcome.applied_at, "config_overrides", format_overrides(message.overrides)});
      break;
    }
  }

  log_.push_back({outcome.frame, outcome.applied_at, message});
  outcome.accepted = true;
  return outcome;
}

engine::FrameOutput LiveSession::tick() {
  engine::FrameInput input;
  input.t = next_frame_time();
  input.actors.reserve(actors_.size());
  for (const auto& actor : actors_) {
    input.actors.push_back({actor.key, scenario::ActorMode::Trajectory, actor.pose, 0.0});
  }
  input.treats.swap(pending_treats_);

  auto out = engine_.step(input);
  events_.insert(events_.end(), pending_log_.begin(), pending_log_.end());
  pending_log_.clear();
  events_.insert(events_.end(), out.log.begin(), out.log.end());
  rows_.push_back(TraceRow::from_frame(out));
  return out;
}

scenario::Scenario LiveSession::replay_scenario(const std::string& name) const {
  return scenario_from_steer_log(log_, frame_rate_, engine_.frames(), name);
}

scenario::Scenario scenario_from_steer_log(std::span<const SteerLogEntry> log, double frame_rate,
                                           std::uint64_t frames, const std::string& name) {
  using wire::SteerAction;
  scenario::Scenario s;
  s.name = name;
  s.frame_rate = frame_rate;
  s.duration_s = static_cast<double>(frames) / frame_rate;

  std::map<std::string, int> incarnations;
  std::map<std::string, std::size_t> current;  // actor name -> script index
  auto script_of = [&](const SteerLogEntry& entry) -> scenario::ActorScript& {
    const auto it = current.find(entry.message.actor);
    if (it == current.end()) {
      throw std::invalid_argument("steer log frame " + std::to_string(entry.frame) + ": actor \"" +
                                  entry.message.actor + "\" is not present");
    }
    return s.actors[it->second];
  };

  for (const auto& entry : log) {
    if (entry.frame >= frames) break;  // applied after the last tick: never observed
    const auto& msg = entry.message;
    switch (msg.action) {
      case SteerAction::SpawnActor: {
        if (current.count(msg.actor) != 0) {
          throw std::invalid_argument("steer log frame " + std::to_string(entry.frame) + ": actor \"" + msg.actor +
                                      "\" spawned twice");
        }
        scenario::ActorScript script;
        script.id = incarnation_key(msg.actor, ++incarnations[msg.actor]);
        script.mode = scenario::ActorMode::Trajectory;
        script.interpolation = scenario::Interpolation::Hold;
        script.enters_at = entry.t;
        script.waypoints.push_back({entry.t, msg.pose, 0.0});
        current[msg.actor] = s.actors.size();
        s.actors.push_back(std::move(script));
        break;
      }
      case SteerAction::MoveActor: {
        auto& script = script_of(entry);
        if (script.waypoints.back().t == entry.t) {
          script.waypoints.back().pose = msg.pose;
        } else {
          script.waypoints.push_back({entry.t, msg.pose, 0.0});
        }
        break;
      }
      case SteerAction::RemoveActor:
        script_of(entry).leaves_at = entry.t;
        current.erase(msg.actor);
        break;
      case SteerAction::TreatTaken: {
        scenario::ScenarioEvent ev;
        ev.t = entry.t;
        ev.kind = scenario::EventKind::TreatTaken;
        if (!msg.actor.empty()) ev.actor = script_of(entry).id;
        s.events.push_back(std::move(ev));
        break;
      }
      case SteerAction::SetConfigOverrides: {
        scenario::ScenarioEvent ev;
        ev.t = entry.t;
        ev.kind = scenario::EventKind::ConfigOverrides;
        ev.overrides = msg.overrides;
        s.events.push_back(std::move(ev));
        break;
      }
    }
  }

  // An actor spawned and removed between two ticks was never observed.
  std::set<std::string> unseen;
  std::erase_if(s.actors, [&](const scenario::ActorScript& a) {
    const bool never = a.leaves_at && !(*a.leaves_at > a.enters_at);
    if (never) unseen.insert(a.id);
    return never;
  });
  // Treats naming them were ignored live as well.
  std::erase_if(s.events, [&](const scenario::ScenarioEvent& ev) { return ev.actor && unseen.count(*ev.actor); });
  return s;
}

std::string encode_steer_log(std::span<const SteerLogEntry> log) {
  std::string out;
  for (const auto& entry : log) {
    json line{{"frame", entry.frame}, {"t", entry.t}, {"message", json::parse(wire::encode_steer(entry.message))}};
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<SteerLogEntry> decode_steer_log(std::string_view text) {
  std::vector<SteerLogEntry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json doc = json::parse(line, nullptr, false);
    const auto where = "steer log line " + std::to_string(line_no);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("message") || !doc.contains("t") ||
        !doc.contains("frame")) {
      throw std::runtime_error(where + ": expected {frame, t, message}");
    }
    auto decoded = wire::decode_client_message(doc["message"].dump());
    const auto* msg = std::get_if<wire::ClientMessage>(&decoded);
    const auto* steer = msg ? std::get_if<wire::SteerMessage>(msg) : nullptr;
    if (steer == nullptr) throw std::runtime_error(where + ": message is not a steer message");
    entries.push_back({doc["frame"].get<std::uint64_t>(), doc["t"].get<double>(), *steer});
  }
  return entries;
}

}  // namespace sonibot
