#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sonibot/signal.hpp"
#include "sonibot/types.hpp"

namespace sonibot::behavior {

enum class Phase { NoUsers, Aware, Engaged };

enum class ActuatorKind { OrientToUser, ExtendArm, RetractArm, OrientNeutral };

/// Why the arm was retracted. Only LowProbability is subject to the hold time.
enum class RetractReason { LowProbability, TreatTaken, TrackLost };

std::string_view to_string(Phase phase);
std::string_view to_string(ActuatorKind kind);
std::string_view to_string(RetractReason reason);

struct EngagementState {
  Phase phase = Phase::NoUsers;
  std::optional<UserId> target;
  // Set only while Engaged and the target is below p_off.
  std::optional<double> below_since;
  std::optional<double> last_step_t;
};

struct ActuatorEvent {
  ActuatorKind kind = ActuatorKind::OrientNeutral;
  std::optional<UserId> user;
  double t = 0.0;
  std::optional<RetractReason> reason;  // RetractArm only
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct LedCommand {
  Rgb rgb;
  double intensity = 0.0;
};

struct FsmConfig {
  double p_on = 0.85;
  double p_off = 0.75;
  double release_hold_s = 1.0;
  double idle_intensity = 0.15;

  std::vector<ConfigIssue> validate(const std::string& prefix = "fsm") const;
};

struct StepResult {
  EngagementState state;
  std::vector<ActuatorEvent> events;
  LedCommand led;
};

/// Non-done signal with the highest p; ties go to the oldest track.
std::optional<UserId> select_target(std::span<const signal::SmoothedSignal> signals);

/// Advances the engagement machine to time t.
///
/// Aware -> Engaged when the selected target's smoothed p exceeds p_on; the
/// target is then frozen until release. Engaged -> Aware/NoUsers when the
/// target stays below p_off for release_hold_s, is marked done, or its track
/// disappears. Throws ClockRegression if t precedes the previous step.
StepResult step(const EngagementState& state, std::span<const signal::SmoothedSignal> signals,
                double t, const FsmConfig& config);

/// Dim white when idle, otherwise a linear blue -> yellow blend at p with
/// intensity p clamped to [idle_intensity, 1].
LedCommand led_for(const EngagementState& state, double p, const FsmConfig& config);

}  // namespace sonibot::behavior
