#include "sonibot/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sonibot {
namespace {

using nlohmann::json;

#define SONIBOT_FIELD(KEY, GROUP, INTEGER, MEMBER)                                      \
  ConfigField {                                                                          \
    KEY, FieldGroup::GROUP, INTEGER,                                                     \
        [](const EngineConfig& c) { return static_cast<double>(c.MEMBER); },             \
        [](EngineConfig& c, double v) { c.MEMBER = static_cast<decltype(c.MEMBER)>(v); } \
  }

const ConfigField kFields[] = {
    SONIBOT_FIELD("tau_s", Tracker, false, tracker.tau_s),
    SONIBOT_FIELD("p_on", Fsm, false, fsm.p_on),
    SONIBOT_FIELD("p_off", Fsm, false, fsm.p_off),
    SONIBOT_FIELD("p_knee", Map, false, map.p_knee),
    SONIBOT_FIELD("v_base", Map, false, map.v_base),
    SONIBOT_FIELD("vibrato_rate", Synth, false, synth.vibrato_rate),
    SONIBOT_FIELD("control_rate_hz", Control, false, control_rate_hz),
    SONIBOT_FIELD("tracker.rate_window_s", Tracker, false, tracker.rate_window_s),
    SONIBOT_FIELD("tracker.track_loss_timeout_s", Tracker, false, tracker.track_loss_timeout_s),
    SONIBOT_FIELD("fsm.release_hold_s", Fsm, false, fsm.release_hold_s),
    SONIBOT_FIELD("fsm.idle_intensity", Fsm, false, fsm.idle_intensity),
    SONIBOT_FIELD("map.f_floor", Map, false, map.f_floor),
    SONIBOT_FIELD("map.f_max", Map, false, map.f_max),
    SONIBOT_FIELD("map.vol_floor", Map, false, map.vol_floor),
    SONIBOT_FIELD("map.vol_max", Map, false, map.vol_max),
    SONIBOT_FIELD("map.v_max", Map, false, map.v_max),
    SONIBOT_FIELD("map.rate_sat", Map, false, map.rate_sat),
    SONIBOT_FIELD("synth.sample_rate", Synth, true, synth.sample_rate),
    SONIBOT_FIELD("synth.block_size", Synth, true, synth.block_size),
    SONIBOT_FIELD("synth.param_ramp_s", Synth, false, synth.param_ramp_s),
    SONIBOT_FIELD("intention_model.d_scale", IntentionModel, false, intention_model.d_scale),
    SONIBOT_FIELD("intention_model.facing_weight", IntentionModel, false, intention_model.facing_weight),
    SONIBOT_FIELD("intention_model.fov_deg", IntentionModel, false, intention_model.fov_deg),
    SONIBOT_FIELD("noise.raw_p_stddev", Noise, false, noise.raw_p_stddev),
};

#undef SONIBOT_FIELD

// Sub-config validators report "<section>.<member>"; the file exposes a few
// members at top level.
std::string file_key(const std::string& internal) {
  static const std::map<std::string, std::string, std::less<>> kAliases = {
      {"tracker.tau_s", "tau_s"},   {"fsm.p_on", "p_on"},     {"fsm.p_off", "p_off"},
      {"map.p_knee", "p_knee"},     {"map.v_base", "v_base"}, {"synth.vibrato_rate", "vibrato_rate"},
  };
  const auto it = kAliases.find(internal);
  return it == kAliases.end() ? internal : it->second;
}

void append(std::vector<ConfigIssue>& out, std::vector<ConfigIssue> more) {
  for (auto& issue : more) out.push_back({file_key(issue.field), std::move(issue.message)});
}

std::string format_value(const ConfigField& field, double value) {
  if (field.integer) return std::to_string(static_cast<long long>(value));
  return json(value).dump();
}

std::string issues_text(const std::string& source, const std::vector<ConfigIssue>& issues) {
  std::string text;
  for (const auto& issue : issues) {
    if (!text.empty()) text += "\n";
    text += source + ":" + issue.field + ": " + issue.message;
  }
  return text;
}

}  // namespace

std::vector<ConfigIssue> EngineConfig::validate() const {
  std::vector<ConfigIssue> issues;
  append(issues, tracker.validate());
  append(issues, fsm.validate());
  append(issues, map.validate());
  append(issues, synth.validate());
  append(issues, intention_model.validate());
  if (!(noise.raw_p_stddev >= 0.0)) issues.push_back({"noise.raw_p_stddev", "must be >= 0"});
  if (!(control_rate_hz > 0.0 && control_rate_hz <= 1000.0)) {
    issues.push_back({"control_rate_hz", "must satisfy 0 < control_rate_hz <= 1000"});
  }
  return issues;
}

std::span<const ConfigField> config_fields() { return kFields; }

const ConfigField* find_config_field(std::string_view key) {
  const auto it = std::find_if(std::begin(kFields), std::end(kFields),
                               [key](const ConfigField& f) { return f.key == key; });
  return it == std::end(kFields) ? nullptr : &*it;
}

bool is_overridable(const ConfigField& field) {
  return field.group == FieldGroup::Fsm || field.group == FieldGroup::Map;
}

EngineConfig apply_overrides(const EngineConfig& base, const std::map<std::string, double>& overrides) {
  EngineConfig next = base;
  std::vector<ConfigIssue> issues;
  for (const auto& [key, value] : overrides) {
    const ConfigField* field = find_config_field(key);
    if (field == nullptr) {
      issues.push_back({key, "unknown config field"});
    } else if (!is_overridable(*field)) {
      issues.push_back({key, "not adjustable at runtime (only map and fsm fields are)"});
    } else if (!std::isfinite(value)) {
      issues.push_back({key, "must be finite"});
    } else {
      field->set(next, value);
    }
  }
  if (issues.empty()) issues = next.validate();
  throw_if_invalid(std::move(issues));
  return next;
}

ConfigError::ConfigError(std::string source, std::vector<ConfigIssue> issues)
    : std::runtime_error(issues_text(source, issues)), issues_(std::move(issues)) {}

ResolvedConfig default_config() {
  ResolvedConfig out;
  out.source = "<defaults>";
  for (const auto& field : kFields) out.provenance.emplace(std::string(field.key), Provenance::Default);
  return out;
}

ConfigParse parse_config(std::string_view text, const std::string& source) {
  ConfigParse parse;
  parse.resolved = default_config();
  parse.resolved.source = source;
  auto& issues = parse.issues;

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    issues.push_back({"<document>", std::string("malformed JSON: ") + e.what()});
    return parse;
  }
  if (!doc.is_object()) {
    issues.push_back({"<document>", "top level must be an object"});
    return parse;
  }

  if (const auto it = doc.find("version"); it == doc.end()) {
    issues.push_back({"version", "required schema version is missing"});
  } else if (!it->is_number_integer() || it->get<int>() != kConfigVersion) {
    issues.push_back({"version", "unsupported config version " + it->dump() +
                                     " (supported: " + std::to_string(kConfigVersion) + ")"});
    return parse;
  }
  if (const auto it = doc.find("format"); it != doc.end() && *it != "sonibot-config") {
    issues.push_back({"format", "expected \"sonibot-config\""});
  }

  // Walk the document, matching leaves to registry keys.
  for (const auto& [key, value] : doc.items()) {
    if (key == "version" || key == "format") continue;
    if (value.is_object()) {
      for (const auto& [member, leaf] : value.items()) {
        const std::string path = key + "." + member;
        const ConfigField* field = find_config_field(path);
        if (field == nullptr || leaf.is_object()) {
          issues.push_back({path, "unknown config field"});
          continue;
        }
        if (!leaf.is_number()) {
          issues.push_back({path, "must be a number"});
          continue;
        }
        if (field->integer && !leaf.is_number_integer()) {
          issues.push_back({path, "must be an integer"});
          continue;
        }
        field->set(parse.resolved.config, leaf.get<double>());
        parse.resolved.provenance[path] = Provenance::File;
      }
      continue;
    }
    const ConfigField* field = find_config_field(key);
    if (field == nullptr || key.find('.') != std::string::npos) {
      issues.push_back({key, "unknown config field"});
      continue;
    }
    if (!value.is_number()) {
      issues.push_back({key, "must be a number"});
      continue;
    }
    field->set(parse.resolved.config, value.get<double>());
    parse.resolved.provenance[key] = Provenance::File;
  }

  if (issues.empty()) issues = parse.resolved.config.validate();
  return parse;
}

ConfigParse read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigParse parse;
    parse.resolved = default_config();
    parse.resolved.source = path.string();
    parse.issues.push_back({"<file>", "cannot read config file " + path.string()});
    return parse;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

ResolvedConfig load_config(const std::filesystem::path& path) {
  ConfigParse parse = read_config(path);
  if (!parse.ok()) throw ConfigError(path.string(), parse.issues);
  return parse.resolved;
}

std::string serialize_config(const EngineConfig& config) {
  json doc;
  doc["format"] = "sonibot-config";
  doc["version"] = kConfigVersion;
  for (const auto& field : kFields) {
    const std::string key(field.key);
    const double value = field.get(config);
    const auto dot = key.find('.');
    json leaf = field.integer ? json(static_cast<long long>(value)) : json(value);
    if (dot == std::string::npos) {
      doc[key] = leaf;
    } else {
      doc[key.substr(0, dot)][key.substr(dot + 1)] = leaf;
    }
  }
  return doc.dump(2) + "\n";
}

std::string config_report(const ConfigParse& parse) {
  std::ostringstream out;
  out << "config: " << parse.resolved.source << "\n";
  for (const auto& field : kFields) {
    const auto it = parse.resolved.provenance.find(field.key);
    const bool from_file = it != parse.resolved.provenance.end() && it->second == Provenance::File;
    out << "  " << field.key << "=" << format_value(field, field.get(parse.resolved.config))
        << "  (" << (from_file ? "file" : "default") << ")\n";
  }
  if (parse.ok()) {
    out << "valid\n";
  } else {
    out << "invalid\n" << issues_text(parse.resolved.source, parse.issues) << "\n";
  }
  return out.str();
}

}  // namespace sonibot
