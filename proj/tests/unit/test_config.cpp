#include <doctest.h>

#include <fstream>

#include "sonibot/config.hpp"
#include "temp_dir.hpp"

using namespace sonibot;

namespace {

bool mentions(const std::vector<ConfigIssue>& issues, const std::string& field) {
  return std::any_of(issues.begin(), issues.end(), [&](const ConfigIssue& i) { return i.field == field; });
}

}  // namespace

TEST_CASE("default report lists the headline constants") {
  ConfigParse parse;
  parse.resolved = default_config();
  const auto report = config_report(parse);
  for (const char* line : {"  tau_s=1.0  (default)", "  p_on=0.85  (default)", "  p_off=0.75  (default)",
                           "  p_knee=0.2  (default)", "  v_base=0.02  (default)", "  vibrato_rate=20.0  (default)"}) {
    CHECK(report.find(line) != std::string::npos);
  }
  CHECK(report.find("\nvalid\n") != std::string::npos);
  CHECK(report.rfind("config: <defaults>", 0) == 0);
}

TEST_CASE("file values carry file provenance") {
  const auto parse = parse_config(R"({"version": 1, "map": {"f_max": 440}})", "cfg.json");
  REQUIRE(parse.ok());
  CHECK(parse.resolved.config.map.f_max == 440.0);
  CHECK(parse.resolved.provenance.at("map.f_max") == Provenance::File);
  CHECK(parse.resolved.provenance.at("p_on") == Provenance::Default);
  const auto report = config_report(parse);
  CHECK(report.find("  map.f_max=440.0  (file)") != std::string::npos);
  CHECK(report.find("valid") != std::string::npos);
}

TEST_CASE("f_max below f_floor is invalid with a field path") {
  const auto parse = parse_config(R"({"version": 1, "map": {"f_max": 100}})", "cfg.json");
  CHECK_FALSE(parse.ok());
  CHECK(mentions(parse.issues, "map.f_max"));
  const auto report = config_report(parse);
  CHECK(report.find("invalid") != std::string::npos);
  CHECK(report.find("cfg.json:map.f_max:") != std::string::npos);
}

TEST_CASE("p_off >= p_on cites the fsm invariant") {
  const auto parse = parse_config(R"({"version": 1, "p_on": 0.7, "p_off": 0.75})", "cfg.json");
  CHECK_FALSE(parse.ok());
  REQUIRE(mentions(parse.issues, "p_off"));
  CHECK(parse.issues[0].message.find("p_on") != std::string::npos);
}

TEST_CASE("top level keys map onto their sections") {
  const auto parse = parse_config(
      R"({"version": 1, "tau_s": 2.0, "p_on": 0.9, "p_off": 0.6, "p_knee": 0.3, "v_base": 0.01, "vibrato_rate": 12})",
      "x");
  REQUIRE(parse.ok());
  const auto& c = parse.resolved.config;
  CHECK(c.tracker.tau_s == 2.0);
  CHECK(c.fsm.p_on == 0.9);
  CHECK(c.fsm.p_off == 0.6);
  CHECK(c.map.p_knee == 0.3);
  CHECK(c.map.v_base == 0.01);
  CHECK(c.synth.vibrato_rate == 12.0);
}

TEST_CASE("structural config errors") {
  CHECK(mentions(parse_config(R"({"p_on": 0.9})", "x").issues, "version"));
  CHECK(mentions(parse_config(R"({"version": 3})", "x").issues, "version"));
  CHECK(mentions(parse_config(R"({"version": 1, "volume": 3})", "x").issues, "volume"));
  CHECK(mentions(parse_config(R"({"version": 1, "map": {"colour": 3}})", "x").issues, "map.colour"));
  CHECK(mentions(parse_config(R"({"version": 1, "p_on": "high"})", "x").issues, "p_on"));
  CHECK(mentions(parse_config(R"({"version": 1, "synth": {"block_size": 256.5}})", "x").issues,
                 "synth.block_size"));
  CHECK(mentions(parse_config("[1, 2]", "x").issues, "<document>"));
  CHECK(mentions(parse_config("{oops", "x").issues, "<document>"));
}

TEST_CASE("serialised config parses back to the same values") {
  EngineConfig cfg;
  cfg.map.f_max = 990.0;
  cfg.synth.block_size = 256;
  cfg.fsm.release_hold_s = 1.5;
  const auto parse = parse_config(serialize_config(cfg), "round");
  REQUIRE(parse.ok());
  for (const auto& field : config_fields()) {
    CHECK(field.get(parse.resolved.config) == field.get(cfg));
  }
}

TEST_CASE("load_config errors name the file") {
  testing::TempDir dir;
  const auto missing = dir.path() / "absent.json";
  try {
    load_config(missing);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(missing.string()) != std::string::npos);
  }
  const auto bad = dir.path() / "bad.json";
  std::ofstream(bad) << R"({"version": 1, "fsm": {"release_hold_s": 0}})";
  try {
    load_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(bad.string() + ":fsm.release_hold_s:") != std::string::npos);
    CHECK(e.issues().size() == 1);
  }
}

TEST_CASE("runtime overrides") {
  const EngineConfig base;
  const auto next = apply_overrides(base, {{"p_on", 0.6}, {"p_off", 0.5}, {"map.f_max", 660}});
  CHECK(next.fsm.p_on == 0.6);
  CHECK(next.map.f_max == 660.0);

  auto rejected = [&](const std::map<std::string, double>& o, const std::string& field) {
    try {
      apply_overrides(base, o);
    } catch (const InvalidConfig& e) {
      return mentions(e.issues(), field);
    }
    return false;
  };
  CHECK(rejected({{"p_off", 0.9}}, "p_off"));
  CHECK(rejected({{"tau_s", 2.0}}, "tau_s"));               // tracker is not live-tunable
  CHECK(rejected({{"synth.sample_rate", 8000}}, "synth.sample_rate"));
  CHECK(rejected({{"map.nonsense", 1}}, "map.nonsense"));
  CHECK(rejected({{"map.f_max", 100}}, "map.f_max"));
}

TEST_CASE("field registry") {
  CHECK(find_config_field("p_on") != nullptr);
  CHECK(find_config_field("fsm.p_on") == nullptr);
  CHECK(find_config_field("synth.block_size")->integer);
  CHECK(is_overridable(*find_config_field("map.v_max")));
  CHECK_FALSE(is_overridable(*find_config_field("intention_model.d_scale")));
  EngineConfig cfg;
  CHECK(cfg.validate().empty());
  cfg.control_rate_hz = 0;
  CHECK(mentions(cfg.validate(), "control_rate_hz"));
}
