#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonibot/signal.hpp"
#include "sonibot/types.hpp"

namespace sonibot::sonify {

/// The triple driving synthesis, plus whether anything should be heard.
struct SoundParams {
  double volume = 0.0;     // linear amplitude
  double frequency = 0.0;  // Hz
  double vibrato = 0.0;    // fractional modulation depth of pitch and amplitude
  bool audible = false;

  friend bool operator==(const SoundParams&, const SoundParams&) = default;
};

struct MapConfig {
  double p_knee = 0.2;
  double f_floor = 220.0;
  double f_max = 880.0;
  double vol_floor = 0.1;
  double vol_max = 0.9;
  double v_base = 0.02;
  double v_max = 0.2;
  double rate_sat = -0.5;  // 1/s; vibrato saturates at v_max at or below this rate

  std::vector<ConfigIssue> validate(const std::string& prefix = "map") const;
};

// Piecewise-linear transfer functions. Flat below p_knee, linear to p = 1.
double map_volume(double p, const MapConfig& config);
double map_frequency(double p, const MapConfig& config);

// v_base for any non-negative rate, v_max at or below rate_sat, linear between.
double map_vibrato(double dp_dt, const MapConfig& config);

/// Silent when no live non-done user exists. Otherwise maps the target's
/// (p, dp_dt); a missing or done target falls back to the best live user.
SoundParams compute_params(std::span<const signal::SmoothedSignal> signals,
                           std::optional<UserId> target, const MapConfig& config);

}  // namespace sonibot::sonify
