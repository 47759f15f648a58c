#include "sonibot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sonibot::scenario {
namespace {

using nlohmann::json;

std::string describe(const std::vector<ConfigIssue>& issues, const std::string& source) {
  std::string text = "invalid scenario:";
  const std::string prefix = source.empty() ? std::string() : source + ":";
  for (const auto& issue : issues) text += "\n  " + prefix + issue.field + ": " + issue.message;
  return text;
}

double shortest_arc(double from_deg, double to_deg) {
  double delta = std::fmod(to_deg - from_deg, 360.0);
  if (delta > 180.0) delta -= 360.0;
  if (delta < -180.0) delta += 360.0;
  return delta;
}

// Collects issues while reading one JSON object.
class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void fail(const std::string& path, const std::string& message) { issues_.push_back({path, message}); }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + key, "required number is missing");
      return std::nullopt;
    }
    if (!it->is_number()) {
      fail(path + key, "must be a number");
      return std::nullopt;
    }
    const double value = it->get<double>();
    if (!std::isfinite(value)) {
      fail(path + key, "must be finite");
      return std::nullopt;
    }
    return value;
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path,
                                    bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + key, "required string is missing");
      return std::nullopt;
    }
    if (!it->is_string()) {
      fail(path + key, "must be a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  void only_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(path + key, "unknown field");
      }
    }
  }

 private:
  std::vector<ConfigIssue>& issues_;
};

Waypoint parse_waypoint(Reader& r, const json& j, ActorMode mode, const std::string& path) {
  Waypoint wp;
  if (!j.is_object()) {
    r.fail(path.substr(0, path.size() - 1), "waypoint must be an object");
    return wp;
  }
  wp.t = r.number(j, "t", path, true).value_or(0.0);
  if (mode == ActorMode::DirectP) {
    r.only_keys(j, {"t", "p"}, path);
    wp.p = r.number(j, "p", path, true).value_or(0.0);
  } else {
    r.only_keys(j, {"t", "x", "y", "facing_deg"}, path);
    wp.pose.x = r.number(j, "x", path, true).value_or(0.0);
    wp.pose.y = r.number(j, "y", path, true).value_or(0.0);
    wp.pose.facing_deg = r.number(j, "facing_deg", path, true).value_or(0.0);
  }
  return wp;
}

ActorScript parse_actor(Reader& r, const json& j, const std::string& path) {
  ActorScript actor;
  if (!j.is_object()) {
    r.fail(path.substr(0, path.size() - 1), "actor must be an object");
    return actor;
  }
  r.only_keys(j, {"id", "mode", "interpolation", "waypoints", "enters_at", "leaves_at"}, path);
  actor.id = r.string(j, "id", path, true).value_or("");
  const auto mode = r.string(j, "mode", path, false).value_or("trajectory");
  if (mode == "trajectory") {
    actor.mode = ActorMode::Trajectory;
  } else if (mode == "direct_p") {
    actor.mode = ActorMode::DirectP;
  } else {
    r.fail(path + "mode", "must be \"trajectory\" or \"direct_p\"");
  }
  const auto interp = r.string(j, "interpolation", path, false).value_or("linear");
  if (interp == "linear") {
    actor.interpolation = Interpolation::Linear;
  } else if (interp == "hold") {
    actor.interpolation = Interpolation::Hold;
  } else {
    r.fail(path + "interpolation", "must be \"linear\" or \"hold\"");
  }
  actor.enters_at = r.number(j, "enters_at", path, false).value_or(0.0);
  actor.leaves_at = r.number(j, "leaves_at", path, false);

  const auto wps = j.find("waypoints");
  if (wps == j.end() || !wps->is_array()) {
    r.fail(path + "waypoints", "required array is missing");
  } else {
    for (std::size_t i = 0; i < wps->size(); ++i) {
      actor.waypoints.push_back(
          parse_waypoint(r, (*wps)[i], actor.mode, path + "waypoints[" + std::to_string(i) + "]."));
    }
  }
  return actor;
}

ScenarioEvent parse_event(Reader& r, const json& j, const std::string& path) {
  ScenarioEvent ev;
  if (!j.is_object()) {
    r.fail(path.substr(0, path.size() - 1), "event must be an object");
    return ev;
  }
  r.only_keys(j, {"t", "kind", "actor", "overrides"}, path);
  ev.t = r.number(j, "t", path, true).value_or(0.0);
  const auto kind = r.string(j, "kind", path, true).value_or("");
  if (kind == "treat_taken") {
    ev.kind = EventKind::TreatTaken;
    ev.actor = r.string(j, "actor", path, false);
  } else if (kind == "config_overrides") {
    ev.kind = EventKind::ConfigOverrides;
    const auto it = j.find("overrides");
    if (it == j.end() || !it->is_object()) {
      r.fail(path + "overrides", "required object is missing");
    } else {
      for (const auto& [key, value] : it->items()) {
        if (!value.is_number()) {
          r.fail(path + "overrides." + key, "must be a number");
        } else {
          ev.overrides[key] = value.get<double>();
        }
      }
    }
  } else if (!kind.empty()) {
    r.fail(path + "kind", "unknown event kind \"" + kind + "\"");
  }
  return ev;
}

json waypoint_json(const Waypoint& wp, ActorMode mode) {
  if (mode == ActorMode::DirectP) return {{"t", wp.t}, {"p", wp.p}};
  return {{"t", wp.t}, {"x", wp.pose.x}, {"y", wp.pose.y}, {"facing_deg", wp.pose.facing_deg}};
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ConfigIssue> issues, const std::string& source)
    : std::runtime_error(describe(issues, source)), issues_(std::move(issues)) {}

std::string_view to_string(ActorMode mode) {
  return mode == ActorMode::DirectP ? "direct_p" : "trajectory";
}

std::string_view to_string(EventKind kind) {
  return kind == EventKind::TreatTaken ? "treat_taken" : "config_overrides";
}

bool ActorScript::present_at(double t, double duration_s) const {
  return t >= enters_at && t < leaves_at.value_or(duration_s);
}

Waypoint ActorScript::evaluate(double t) const {
  if (waypoints.empty()) return {};
  if (t <= waypoints.front().t) return waypoints.front();
  if (t >= waypoints.back().t) return waypoints.back();
  const auto next = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                     [](double value, const Waypoint& wp) { return value < wp.t; });
  const Waypoint& b = *next;
  const Waypoint& a = *(next - 1);
  if (interpolation == Interpolation::Hold) return a;

  const double s = (t - a.t) / (b.t - a.t);
  Waypoint out;
  out.t = t;
  out.p = a.p + (b.p - a.p) * s;
  out.pose.x = a.pose.x + (b.pose.x - a.pose.x) * s;
  out.pose.y = a.pose.y + (b.pose.y - a.pose.y) * s;
  out.pose.facing_deg = a.pose.facing_deg + shortest_arc(a.pose.facing_deg, b.pose.facing_deg) * s;
  return out;
}

std::size_t Scenario::frame_count() const {
  if (!(duration_s > 0.0) || !(frame_rate > 0.0)) return 0;
  auto n = static_cast<std::size_t>(std::ceil(duration_s * frame_rate));
  while (n > 0 && frame_time(n - 1) >= duration_s) --n;
  while (frame_time(n) < duration_s) ++n;
  return n;
}

std::vector<ConfigIssue> validate(const Scenario& scenario) {
  std::vector<ConfigIssue> issues;
  auto fail = [&](std::string path, std::string message) {
    issues.push_back({std::move(path), std::move(message)});
  };
  if (!(scenario.duration_s > 0.0)) fail("duration_s", "must be > 0");
  if (!(scenario.frame_rate > 0.0)) fail("frame_rate", "must be > 0");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < scenario.actors.size(); ++i) {
    const auto& actor = scenario.actors[i];
    const std::string path = "actors[" + std::to_string(i) + "].";
    if (actor.id.empty()) fail(path + "id", "must be a non-empty string");
    if (!ids.insert(actor.id).second) fail(path + "id", "duplicate actor id \"" + actor.id + "\"");
    if (actor.waypoints.empty()) fail(path + "waypoints", "must contain at least one waypoint");
    const double leaves = actor.leaves_at.value_or(scenario.duration_s);
    if (!(actor.enters_at >= 0.0)) fail(path + "enters_at", "must be >= 0");
    if (!(actor.enters_at < leaves)) fail(path + "leaves_at", "must be later than enters_at");
    for (std::size_t w = 0; w < actor.waypoints.size(); ++w) {
      const auto& wp = actor.waypoints[w];
      const std::string wpath = path + "waypoints[" + std::to_string(w) + "].";
      if (wp.t < 0.0 || wp.t > scenario.duration_s) fail(wpath + "t", "must lie within [0, duration_s]");
      if (w > 0 && !(wp.t > actor.waypoints[w - 1].t)) fail(wpath + "t", "waypoint times must be strictly increasing");
      if (actor.mode == ActorMode::DirectP && !(wp.p >= 0.0 && wp.p <= 1.0)) {
        fail(wpath + "p", "must lie within [0, 1]");
      }
    }
  }

  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    const auto& ev = scenario.events[i];
    const std::string path = "events[" + std::to_string(i) + "].";
    if (ev.t < 0.0 || ev.t > scenario.duration_s) fail(path + "t", "must lie within [0, duration_s]");
    if (i > 0 && ev.t < scenario.events[i - 1].t) fail(path + "t", "events must be sorted by time");
    if (ev.kind == EventKind::TreatTaken && ev.actor && !ids.contains(*ev.actor)) {
      fail(path + "actor", "unknown actor \"" + *ev.actor + "\"");
    }
    if (ev.kind == EventKind::ConfigOverrides && ev.overrides.empty()) {
      fail(path + "overrides", "must name at least one field");
    }
  }
  return issues;
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError({{"<document>", std::string("malformed JSON: ") + e.what()}}, source);
  }
  std::vector<ConfigIssue> issues;
  Reader r(issues);
  if (!doc.is_object()) throw ScenarioError({{"<document>", "top level must be an object"}}, source);

  r.only_keys(doc, {"format", "version", "name", "duration_s", "frame_rate", "actors", "events"}, "");
  if (const auto fmt = r.string(doc, "format", "", false); fmt && *fmt != "sonibot-scenario") {
    r.fail("format", "expected \"sonibot-scenario\"");
  }
  const auto version = r.number(doc, "version", "", true);
  if (version && *version != kScenarioVersion) {
    // Nothing else can be interpreted under an unknown version.
    throw ScenarioError({{"version", "unsupported scenario version " + doc["version"].dump() +
                                         " (supported: " + std::to_string(kScenarioVersion) + ")"}},
                        source);
  }

  Scenario scenario;
  scenario.name = r.string(doc, "name", "", false).value_or("");
  scenario.duration_s = r.number(doc, "duration_s", "", true).value_or(0.0);
  scenario.frame_rate = r.number(doc, "frame_rate", "", false).value_or(30.0);

  if (const auto it = doc.find("actors"); it != doc.end()) {
    if (!it->is_array()) {
      r.fail("actors", "must be an array");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        scenario.actors.push_back(parse_actor(r, (*it)[i], "actors[" + std::to_string(i) + "]."));
      }
    }
  }
  if (const auto it = doc.find("events"); it != doc.end()) {
    if (!it->is_array()) {
      r.fail("events", "must be an array");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        scenario.events.push_back(parse_event(r, (*it)[i], "events[" + std::to_string(i) + "]."));
      }
    }
  }

  if (issues.empty()) issues = validate(scenario);
  if (!issues.empty()) throw ScenarioError(std::move(issues), source);
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({{"<file>", "cannot read " + path.string()}}, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

std::string serialize_scenario(const Scenario& scenario) {
  json doc;
  doc["format"] = "sonibot-scenario";
  doc["version"] = kScenarioVersion;
  doc["name"] = scenario.name;
  doc["duration_s"] = scenario.duration_s;
  doc["frame_rate"] = scenario.frame_rate;
  doc["actors"] = json::array();
  for (const auto& actor : scenario.actors) {
    json a;
    a["id"] = actor.id;
    a["mode"] = std::string(to_string(actor.mode));
    a["interpolation"] = actor.interpolation == Interpolation::Hold ? "hold" : "linear";
    a["enters_at"] = actor.enters_at;
    if (actor.leaves_at) a["leaves_at"] = *actor.leaves_at;
    a["waypoints"] = json::array();
    for (const auto& wp : actor.waypoints) a["waypoints"].push_back(waypoint_json(wp, actor.mode));
    doc["actors"].push_back(std::move(a));
  }
  doc["events"] = json::array();
  for (const auto& ev : scenario.events) {
    json e{{"t", ev.t}, {"kind", std::string(to_string(ev.kind))}};
    if (ev.actor) e["actor"] = *ev.actor;
    if (ev.kind == EventKind::ConfigOverrides) {
      e["overrides"] = json::object();
      for (const auto& [key, value] : ev.overrides) e["overrides"][key] = value;
    }
    doc["events"].push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

Scenario resolve_scenario(const std::string& path_or_name) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_name, ec)) return load_scenario(path_or_name);
  if (auto bundled = bundled_scenario(path_or_name)) return *bundled;
  throw ScenarioError({{"<file>", "no scenario file or bundled scenario named \"" + path_or_name + "\""}},
                      path_or_name);
}

}  // namespace sonibot::scenario
