#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sonibot/config.hpp"
#include "sonibot/engine.hpp"
#include "sonibot/messages.hpp"
#include "sonibot/scenario.hpp"
#include "sonibot/session.hpp"

namespace sonibot {

struct SteerOutcome {
  bool accepted = false;
  std::string reason;          // set when rejected
  std::uint64_t frame = 0;     // frame the message takes effect in
  double applied_at = 0.0;
};

/// An accepted steering message and the frame it took effect in.
struct SteerLogEntry {
  std::uint64_t frame = 0;
  double t = 0.0;
  wire::SteerMessage message;
};

/// Interactive counterpart of run_scenario, on the control clock only.
///
/// Steering applied between tick() calls takes effect in the next frame, so a
/// session is fully described by its steering log. Actors are keyed by
/// incarnation: a respawned "visitor" is tracked as "visitor#2".
class LiveSession {
 public:
  explicit LiveSession(EngineConfig config, std::uint64_t seed = 0);

  SteerOutcome apply(const wire::SteerMessage& message);
  engine::FrameOutput tick();

  std::uint64_t next_frame() const noexcept { return engine_.frames(); }
  double next_frame_time() const noexcept;
  double frame_rate() const noexcept { return frame_rate_; }

  const EngineConfig& config() const noexcept { return engine_.config(); }
  const std::vector<SteerLogEntry>& steer_log() const noexcept { return log_; }
  const std::vector<TraceRow>& rows() const noexcept { return rows_; }
  const std::vector<engine::LogEvent>& events() const noexcept { return events_; }

  /// Offline scenario reproducing this session frame for frame.
  scenario::Scenario replay_scenario(const std::string& name = "live_replay") const;

 private:
  struct LiveActor {
    std::string name;
    std::string key;
    scenario::Pose pose;
  };

  std::vector<LiveActor>::iterator find_actor(const std::string& name);

  engine::Engine engine_;
  double frame_rate_;
  std::vector<LiveActor> actors_;
  std::map<std::string, int> incarnations_;
  std::vector<engine::TreatRequest> pending_treats_;
  std::vector<engine::LogEvent> pending_log_;
  std::vector<SteerLogEntry> log_;
  std::vector<TraceRow> rows_;
  std::vector<engine::LogEvent> events_;
};

/// Rebuilds a scenario from a steering log; frames is the number of ticks run.
scenario::Scenario scenario_from_steer_log(std::span<const SteerLogEntry> log, double frame_rate,
                                           std::uint64_t frames, const std::string& name);

std::string encode_steer_log(std::span<const SteerLogEntry> log);
std::vector<SteerLogEntry> decode_steer_log(std::string_view text);

}  // namespace sonibot
