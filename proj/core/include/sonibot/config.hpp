#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sonibot/behavior.hpp"
#include "sonibot/scenario.hpp"
#include "sonibot/signal.hpp"
#include "sonibot/sonify.hpp"
#include "sonibot/synth.hpp"
#include "sonibot/types.hpp"

namespace sonibot {

struct NoiseConfig {
  double raw_p_stddev = 0.0;  // Gaussian noise on raw_p; off by default
};

struct EngineConfig {
  signal::TrackerConfig tracker;
  behavior::FsmConfig fsm;
  sonify::MapConfig map;
  synth::SynthConfig synth;
  scenario::IntentionModelConfig intention_model;
  NoiseConfig noise;
  double control_rate_hz = 30.0;

  /// Issues are addressed by config-file key (see config_fields()).
  std::vector<ConfigIssue> validate() const;
};

inline constexpr int kConfigVersion = 1;

enum class FieldGroup { Tracker, Fsm, Map, Synth, IntentionModel, Noise, Control };

/// One scalar config entry. `key` is the path used in config files, override
/// messages and error reports; the most frequently tuned constants sit at top level.
struct ConfigField {
  std::string_view key;
  FieldGroup group;
  bool integer;
  double (*get)(const EngineConfig&);
  void (*set)(EngineConfig&, double);
};

std::span<const ConfigField> config_fields();
const ConfigField* find_config_field(std::string_view key);

/// Live-tunable subset: the transfer-function endpoints and FSM thresholds.
bool is_overridable(const ConfigField& field);

/// Applies key -> value overrides. Throws InvalidConfig naming the key when it
/// is unknown, not overridable, or the result breaks an invariant.
EngineConfig apply_overrides(const EngineConfig& base, const std::map<std::string, double>& overrides);

enum class Provenance { Default, File };

struct ResolvedConfig {
  EngineConfig config;
  std::map<std::string, Provenance, std::less<>> provenance;
  std::string source;  // file path or "<defaults>"
};

/// Parse result that keeps going past errors so `check` can report them all.
struct ConfigParse {
  ResolvedConfig resolved;
  std::vector<ConfigIssue> issues;
  bool ok() const noexcept { return issues.empty(); }
};

ConfigParse parse_config(std::string_view text, const std::string& source);
ConfigParse read_config(const std::filesystem::path& path);

/// Thrown by load_config; what() lists "file:field: message" lines.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

ResolvedConfig default_config();
ResolvedConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const EngineConfig& config);
/// Human-readable listing with provenance and the validation verdict.
std::string config_report(const ConfigParse& parse);

}  // namespace sonibot
