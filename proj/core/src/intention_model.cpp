#include <cmath>
#include <numbers>

#include "sonibot/scenario.hpp"

namespace sonibot::scenario {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

std::vector<ConfigIssue> IntentionModelConfig::validate(const std::string& prefix) const {
  std::vector<ConfigIssue> issues;
  if (!(d_scale > 0.0)) issues.push_back({prefix + ".d_scale", "must be > 0"});
  if (!(facing_weight > 0.0)) issues.push_back({prefix + ".facing_weight", "must be > 0"});
  if (!(fov_deg > 0.0 && fov_deg <= 180.0)) {
    issues.push_back({prefix + ".fov_deg", "must satisfy 0 < fov_deg <= 180"});
  }
  return issues;
}

bool in_field_of_view(const Pose& pose, const IntentionModelConfig& config) {
  if (pose.x == 0.0 && pose.y == 0.0) return true;
  const double bearing_deg = std::atan2(pose.y, pose.x) / kDegToRad;
  return std::abs(bearing_deg) <= config.fov_deg / 2.0;
}

double facing_alignment(const Pose& pose) {
  const double d = std::hypot(pose.x, pose.y);
  if (d == 0.0) return 1.0;
  const double heading = pose.facing_deg * kDegToRad;
  return (std::cos(heading) * -pose.x + std::sin(heading) * -pose.y) / d;
}

double synth_intention(const Pose& pose, const IntentionModelConfig& config) {
  const double d = std::hypot(pose.x, pose.y);
  const double z = kIntentionGain * ((1.0 - d / config.d_scale) +
                                     config.facing_weight * facing_alignment(pose));
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace sonibot::scenario
