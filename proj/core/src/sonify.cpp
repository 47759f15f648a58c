#include "sonibot/sonify.hpp"

#include <algorithm>
#include <cmath>

#include "sonibot/behavior.hpp"

namespace sonibot::sonify {
namespace {

double knee_ramp(double p, double knee, double low, double high) {
  const double x = std::clamp(std::isnan(p) ? 0.0 : p, 0.0, 1.0);
  if (x <= knee) return low;
  return std::clamp(low + (x - knee) / (1.0 - knee) * (high - low), low, high);
}

}  // namespace

std::vector<ConfigIssue> MapConfig::validate(const std::string& prefix) const {
  std::vector<ConfigIssue> issues;
  auto fail = [&](const char* field, const char* message) {
    issues.push_back({prefix + "." + field, message});
  };
  if (!(p_knee > 0.0 && p_knee < 1.0)) fail("p_knee", "must satisfy 0 < p_knee < 1");
  if (!(f_floor > 0.0)) fail("f_floor", "must be > 0");
  if (!(f_floor < f_max)) fail("f_max", "must be > f_floor");
  if (!(vol_floor >= 0.0)) fail("vol_floor", "must be >= 0");
  if (!(vol_floor < vol_max)) fail("vol_max", "must be > vol_floor");
  if (!(vol_max <= 1.0)) fail("vol_max", "must be <= 1");
  if (!(v_base >= 0.0)) fail("v_base", "must be >= 0");
  if (!(v_base < v_max)) fail("v_max", "must be > v_base");
  if (!(v_max < 1.0)) fail("v_max", "must be < 1");
  if (!(rate_sat < 0.0)) fail("rate_sat", "must be < 0");
  return issues;
}

double map_volume(double p, const MapConfig& config) {
  return knee_ramp(p, config.p_knee, config.vol_floor, config.vol_max);
}

double map_frequency(double p, const MapConfig& config) {
  return knee_ramp(p, config.p_knee, config.f_floor, config.f_max);
}

double map_vibrato(double dp_dt, const MapConfig& config) {
  if (std::isnan(dp_dt) || dp_dt >= 0.0) return config.v_base;
  if (dp_dt <= config.rate_sat) return config.v_max;
  const double x = dp_dt / config.rate_sat;  // in (0, 1)
  return std::clamp(config.v_base + x * (config.v_max - config.v_base), config.v_base, config.v_max);
}

SoundParams compute_params(std::span<const signal::SmoothedSignal> signals,
                           std::optional<UserId> target, const MapConfig& config) {
  const signal::SmoothedSignal* source = nullptr;
  auto usable = [&](UserId id) -> const signal::SmoothedSignal* {
    for (const auto& s : signals) {
      if (s.user == id && !s.done) return &s;
    }
    return nullptr;
  };
  if (target) source = usable(*target);
  if (source == nullptr) {
    if (const auto fallback = behavior::select_target(signals)) source = usable(*fallback);
  }

  SoundParams params;
  if (source == nullptr) {
    params.volume = 0.0;
    params.frequency = config.f_floor;
    params.vibrato = config.v_base;
    params.audible = false;
    return params;
  }
  params.volume = map_volume(source->p, config);
  params.frequency = map_frequency(source->p, config);
  params.vibrato = map_vibrato(source->dp_dt, config);
  params.audible = true;
  return params;
}

}  // namespace sonibot::sonify
