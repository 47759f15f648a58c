#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sonibot/behavior.hpp"
#include "sonibot/config.hpp"
#include "sonibot/scenario.hpp"
#include "sonibot/signal.hpp"
#include "sonibot/sonify.hpp"

namespace sonibot::engine {

/// Where an actor is (or what it feels) at one control frame.
struct ActorInput {
  std::string actor;
  scenario::ActorMode mode = scenario::ActorMode::Trajectory;
  scenario::Pose pose;
  double p = 0.0;  // direct_p mode
};

struct ActorView {
  std::string actor;
  scenario::ActorMode mode = scenario::ActorMode::Trajectory;
  scenario::Pose pose;
  bool visible = false;   // produced a sample this frame
  std::optional<UserId> user;
  double raw_p = 0.0;
};

/// "Treat taken" report. Applies only to the engaged target; a named actor
/// that is not the engaged target is ignored.
struct TreatRequest {
  std::optional<std::string> actor;
};

struct LogEvent {
  double t = 0.0;
  std::string event;
  std::string payload;
};

struct FrameInput {
  double t = 0.0;
  std::vector<ActorInput> actors;  // every present actor, in a stable order
  std::vector<TreatRequest> treats;
};

struct FrameOutput {
  std::uint64_t frame = 0;
  double t = 0.0;
  behavior::Phase phase = behavior::Phase::NoUsers;
  std::optional<UserId> target;
  std::vector<signal::SmoothedSignal> users;
  sonify::SoundParams sound;
  behavior::LedCommand led;
  std::vector<behavior::ActuatorEvent> actuator_events;
  std::vector<LogEvent> log;
  std::vector<ActorView> actors;

  const signal::SmoothedSignal* target_signal() const;
};

/// Stands in for body tracking: assigns track ids and turns actor state into
/// intention samples. An actor keeps its id across visibility gaps no longer
/// than the track-loss timeout; an actor that stops being present is forgotten.
class Perception {
 public:
  std::vector<ActorView> observe(double t, std::span<const ActorInput> actors,
                                 const scenario::IntentionModelConfig& model, double track_loss_timeout_s);

  std::optional<UserId> user_of(const std::string& actor) const;

 private:
  struct Memory {
    UserId user{};
    double last_visible_t = 0.0;
  };
  std::map<std::string, Memory> memory_;
  std::uint32_t next_user_ = 1;
};

/// One control-rate step of perception, tracking, engagement and sound mapping.
class Engine {
 public:
  explicit Engine(EngineConfig config, std::uint64_t seed = 0);

  FrameOutput step(const FrameInput& input);

  /// Throws InvalidConfig (keys as in config files) and leaves the config untouched.
  void apply_overrides(const std::map<std::string, double>& overrides);

  const EngineConfig& config() const noexcept { return config_; }
  const behavior::EngagementState& state() const noexcept { return state_; }
  const signal::Tracker& tracker() const noexcept { return tracker_; }
  std::uint64_t frames() const noexcept { return frame_; }

 private:
  EngineConfig config_;
  Perception perception_;
  signal::Tracker tracker_;
  behavior::EngagementState state_;
  std::mt19937_64 rng_;
  std::uint64_t frame_ = 0;
  std::optional<double> last_t_;
};

std::string format_time(double t);

}  // namespace sonibot::engine
