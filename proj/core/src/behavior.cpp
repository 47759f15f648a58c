#include "sonibot/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sonibot::behavior {
namespace {

using signal::SmoothedSignal;

const SmoothedSignal* find_signal(std::span<const SmoothedSignal> signals, UserId user) {
  const auto it = std::find_if(signals.begin(), signals.end(),
                               [user](const SmoothedSignal& s) { return s.user == user; });
  return it == signals.end() ? nullptr : &*it;
}

constexpr Rgb kBlue{0.0, 0.0, 1.0};
constexpr Rgb kYellow{1.0, 1.0, 0.0};
constexpr Rgb kWhite{1.0, 1.0, 1.0};

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::NoUsers: return "NoUsers";
    case Phase::Aware: return "Aware";
    case Phase::Engaged: return "Engaged";
  }
  return "?";
}

std::string_view to_string(ActuatorKind kind) {
  switch (kind) {
    case ActuatorKind::OrientToUser: return "OrientToUser";
    case ActuatorKind::ExtendArm: return "ExtendArm";
    case ActuatorKind::RetractArm: return "RetractArm";
    case ActuatorKind::OrientNeutral: return "OrientNeutral";
  }
  return "?";
}

std::string_view to_string(RetractReason reason) {
  switch (reason) {
    case RetractReason::LowProbability: return "low_probability";
    case RetractReason::TreatTaken: return "treat_taken";
    case RetractReason::TrackLost: return "track_lost";
  }
  return "?";
}

std::vector<ConfigIssue> FsmConfig::validate(const std::string& prefix) const {
  std::vector<ConfigIssue> issues;
  if (!(p_off > 0.0)) issues.push_back({prefix + ".p_off", "must be > 0"});
  if (!(p_off < p_on)) issues.push_back({prefix + ".p_off", "must be < p_on (0 < p_off < p_on <= 1)"});
  if (!(p_on <= 1.0)) issues.push_back({prefix + ".p_on", "must be <= 1"});
  if (!(release_hold_s > 0.0)) issues.push_back({prefix + ".release_hold_s", "must be > 0"});
  if (!(idle_intensity >= 0.0 && idle_intensity <= 1.0)) {
    issues.push_back({prefix + ".idle_intensity", "must be in [0, 1]"});
  }
  return issues;
}

std::optional<UserId> select_target(std::span<const SmoothedSignal> signals) {
  const SmoothedSignal* best = nullptr;
  for (const auto& s : signals) {
    if (s.done) continue;
    if (best == nullptr || s.p > best->p ||
        (s.p == best->p && s.created_seq < best->created_seq)) {
      best = &s;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->user;
}

StepResult step(const EngagementState& state, std::span<const SmoothedSignal> signals, double t,
                const FsmConfig& config) {
  if (state.last_step_t && t < *state.last_step_t) {
    throw ClockRegression("fsm step: t=" + std::to_string(t) + " precedes previous step");
  }

  StepResult result;
  EngagementState& next = result.state;
  next = state;
  next.last_step_t = t;
  const Phase presence = signals.empty() ? Phase::NoUsers : Phase::Aware;

  if (state.phase == Phase::Engaged && state.target) {
    const UserId target = *state.target;
    const SmoothedSignal* sig = find_signal(signals, target);
    std::optional<RetractReason> reason;
    if (sig == nullptr) {
      reason = RetractReason::TrackLost;
    } else if (sig->done) {
      reason = RetractReason::TreatTaken;
    } else if (sig->p < config.p_off) {
      const double since = state.below_since.value_or(t);
      next.below_since = since;
      if (t - since >= config.release_hold_s) reason = RetractReason::LowProbability;
    } else {
      next.below_since.reset();
    }

    if (reason) {
      result.events.push_back({ActuatorKind::RetractArm, target, t, reason});
      result.events.push_back({ActuatorKind::OrientNeutral, std::nullopt, t, std::nullopt});
      next.phase = presence;
      next.below_since.reset();
      next.target = select_target(signals);
    }
  } else {
    next.below_since.reset();
    next.target = select_target(signals);
    const SmoothedSignal* sig = next.target ? find_signal(signals, *next.target) : nullptr;
    if (sig != nullptr && sig->p > config.p_on) {
      next.phase = Phase::Engaged;
      result.events.push_back({ActuatorKind::OrientToUser, sig->user, t, std::nullopt});
      result.events.push_back({ActuatorKind::ExtendArm, sig->user, t, std::nullopt});
    } else {
      next.phase = presence;
    }
  }

  const SmoothedSignal* shown = next.target ? find_signal(signals, *next.target) : nullptr;
  result.led = led_for(next, shown != nullptr ? shown->p : 0.0, config);
  return result;
}

LedCommand led_for(const EngagementState& state, double p, const FsmConfig& config) {
  if (state.phase == Phase::NoUsers || !state.target) {
    return {kWhite, config.idle_intensity};
  }
  const double x = std::clamp(p, 0.0, 1.0);
  const auto lerp = [x](double from, double to) { return std::clamp(from + (to - from) * x, 0.0, 1.0); };
  LedCommand led;
  led.rgb = {lerp(kBlue.r, kYellow.r), lerp(kBlue.g, kYellow.g), lerp(kBlue.b, kYellow.b)};
  led.intensity = std::clamp(x, config.idle_intensity, 1.0);
  return led;
}

}  // namespace sonibot::behavior
