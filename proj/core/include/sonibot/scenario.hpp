#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sonibot/types.hpp"

namespace sonibot::scenario {

// ---------------------------------------------------------------------------
// Surrogate intention model
// ---------------------------------------------------------------------------

/// Stand-in for a learned intention classifier. The robot sits at the origin
/// facing +x.
struct IntentionModelConfig {
  double d_scale = 1.5;        // m
  double facing_weight = 0.5;  // relative to the distance term
  double fov_deg = 120.0;      // full sensor field of view

  std::vector<ConfigIssue> validate(const std::string& prefix = "intention_model") const;
};

/// Gain applied to the combined logistic argument.
inline constexpr double kIntentionGain = 4.0;

struct Pose {
  double x = 0.0;  // m
  double y = 0.0;  // m
  double facing_deg = 0.0;  // world-frame heading the actor looks along

  friend bool operator==(const Pose&, const Pose&) = default;
};

bool in_field_of_view(const Pose& pose, const IntentionModelConfig& config);

/// Cosine between the actor's heading and the direction from actor to robot.
double facing_alignment(const Pose& pose);

/// sigmoid(gain * ((1 - d / d_scale) + facing_weight * alignment)).
/// Strictly decreasing in distance, increasing in alignment. Callers check
/// in_field_of_view first; out-of-view actors produce no sample.
double synth_intention(const Pose& pose, const IntentionModelConfig& config);

// ---------------------------------------------------------------------------
// Scenario description
// ---------------------------------------------------------------------------

inline constexpr int kScenarioVersion = 1;

enum class ActorMode { Trajectory, DirectP };
enum class Interpolation { Linear, Hold };

struct Waypoint {
  double t = 0.0;
  Pose pose;       // trajectory mode
  double p = 0.0;  // direct_p mode
};

struct ActorScript {
  std::string id;
  ActorMode mode = ActorMode::Trajectory;
  Interpolation interpolation = Interpolation::Linear;
  std::vector<Waypoint> waypoints;
  double enters_at = 0.0;
  std::optional<double> leaves_at;  // defaults to the scenario end

  bool present_at(double t, double duration_s) const;
  /// Pose or probability at t; endpoints are held outside the waypoint range.
  Waypoint evaluate(double t) const;
};

enum class EventKind { TreatTaken, ConfigOverrides };

struct ScenarioEvent {
  double t = 0.0;
  EventKind kind = EventKind::TreatTaken;
  std::optional<std::string> actor;           // treat_taken
  std::map<std::string, double> overrides;    // config_overrides, by config key
};

struct Scenario {
  std::string name;
  double duration_s = 0.0;
  double frame_rate = 30.0;
  std::vector<ActorScript> actors;
  std::vector<ScenarioEvent> events;

  /// Number of control frames: every k with k / frame_rate < duration_s.
  std::size_t frame_count() const;
  double frame_time(std::size_t k) const { return static_cast<double>(k) / frame_rate; }
};

/// Every offending field path of a malformed scenario.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<ConfigIssue> issues, const std::string& source = {});
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

std::vector<ConfigIssue> validate(const Scenario& scenario);

/// Parses and validates the versioned JSON scenario format (docs/scenario-format.md).
Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& scenario);

/// Bundled scenarios: fig5_approach_leave, shy_user, two_actors, walkthrough.
std::vector<std::string> bundled_scenario_names();
std::optional<Scenario> bundled_scenario(std::string_view name);

/// A readable file path wins; otherwise the bundled scenario of that name.
Scenario resolve_scenario(const std::string& path_or_name);

std::string_view to_string(ActorMode mode);
std::string_view to_string(EventKind kind);

}  // namespace sonibot::scenario
