#include <doctest.h>

#include "sonibot/engine.hpp"

using namespace sonibot;
using namespace sonibot::engine;
using scenario::ActorMode;

namespace {

ActorInput direct(std::string name, double p) { return {std::move(name), ActorMode::DirectP, {}, p}; }

ActorInput walker(std::string name, double x, double y, double facing) {
  return {std::move(name), ActorMode::Trajectory, {x, y, facing}, 0.0};
}

bool logged(const FrameOutput& out, const std::string& event) {
  return std::any_of(out.log.begin(), out.log.end(), [&](const LogEvent& e) { return e.event == event; });
}

bool has_event(const FrameOutput& out, behavior::ActuatorKind kind) {
  return std::any_of(out.actuator_events.begin(), out.actuator_events.end(),
                     [&](const behavior::ActuatorEvent& e) { return e.kind == kind; });
}

}  // namespace

TEST_CASE("perception keeps ids across short gaps only") {
  Perception perception;
  const scenario::IntentionModelConfig model;
  const std::vector<ActorInput> seen{walker("a", 1.0, 0.0, 180.0)};
  const std::vector<ActorInput> hidden{walker("a", -1.0, 0.0, 180.0)};

  const auto first = perception.observe(0.0, seen, model, 0.5);
  REQUIRE(first[0].user);
  const UserId id = *first[0].user;
  CHECK(perception.observe(0.3, hidden, model, 0.5)[0].visible == false);
  CHECK(perception.observe(0.5, seen, model, 0.5)[0].user == id);
  perception.observe(0.6, hidden, model, 0.5);
  CHECK(perception.observe(1.2, seen, model, 0.5)[0].user != id);
}

TEST_CASE("perception forgets absent actors") {
  Perception perception;
  const scenario::IntentionModelConfig model;
  const std::vector<ActorInput> one{direct("a", 0.5)};
  const auto id = perception.observe(0.0, one, model, 0.5)[0].user;
  perception.observe(0.1, {}, model, 0.5);
  CHECK_FALSE(perception.user_of("a"));
  CHECK(perception.observe(0.2, one, model, 0.5)[0].user != id);
}

TEST_CASE("direct_p input is clamped and always visible") {
  Perception perception;
  const std::vector<ActorInput> in{direct("a", 1.7), direct("b", -0.2)};
  const auto views = perception.observe(0.0, in, {}, 0.5);
  CHECK(views[0].raw_p == 1.0);
  CHECK(views[1].raw_p == 0.0);
  CHECK(views[1].visible);
}

TEST_CASE("an empty room is silent") {
  Engine engine(EngineConfig{});
  for (int k = 0; k < 90; ++k) {
    const auto out = engine.step({k / 30.0, {}, {}});
    REQUIRE(out.phase == behavior::Phase::NoUsers);
    REQUIRE_FALSE(out.sound.audible);
    REQUIRE(out.sound.volume == 0.0);
  }
}

TEST_CASE("engage then treat retracts and silences") {
  Engine engine(EngineConfig{});
  const std::vector<ActorInput> actors{direct("a", 0.9)};
  bool extended = false;
  int k = 0;
  for (; k < 30 && !extended; ++k) {
    const auto out = engine.step({k / 30.0, actors, {}});
    if (k == 0) CHECK(logged(out, "track_created"));
    extended = has_event(out, behavior::ActuatorKind::ExtendArm);
  }
  REQUIRE(extended);
  CHECK(engine.state().phase == behavior::Phase::Engaged);

  const auto treated = engine.step({k / 30.0, actors, {TreatRequest{"a"}}});
  ++k;
  CHECK(logged(treated, "treat_taken"));
  CHECK(has_event(treated, behavior::ActuatorKind::RetractArm));
  CHECK_FALSE(treated.sound.audible);
  for (int j = 0; j < 60; ++j, ++k) {
    const auto out = engine.step({k / 30.0, actors, {}});
    REQUIRE_FALSE(has_event(out, behavior::ActuatorKind::ExtendArm));
    REQUIRE_FALSE(out.sound.audible);
  }
}

TEST_CASE("treats only reach the engaged target") {
  Engine engine(EngineConfig{});
  const std::vector<ActorInput> actors{direct("a", 0.95), direct("b", 0.3)};
  int k = 0;
  while (engine.state().phase != behavior::Phase::Engaged && k < 60) engine.step({k++ / 30.0, actors, {}});
  REQUIRE(engine.state().phase == behavior::Phase::Engaged);
  CHECK(engine.state().target == engine.step({k++ / 30.0, actors, {}}).actors[0].user);
  const auto ignored = engine.step({k++ / 30.0, actors, {TreatRequest{"b"}}});
  CHECK(logged(ignored, "treat_ignored"));
  CHECK(engine.state().phase == behavior::Phase::Engaged);
  const auto ghost = engine.step({k++ / 30.0, actors, {TreatRequest{"nobody"}}});
  CHECK(logged(ghost, "treat_ignored"));
  const auto taken = engine.step({k++ / 30.0, actors, {TreatRequest{}}});
  CHECK(logged(taken, "treat_taken"));
}

TEST_CASE("treat before engagement is ignored") {
  Engine engine(EngineConfig{});
  const std::vector<ActorInput> actors{direct("a", 0.4)};
  const auto out = engine.step({0.0, actors, {TreatRequest{}}});
  CHECK(logged(out, "treat_ignored"));
  CHECK(out.phase == behavior::Phase::Aware);
}

TEST_CASE("frame time must advance") {
  Engine engine(EngineConfig{});
  engine.step({1.0, {}, {}});
  CHECK_THROWS_AS(engine.step({1.0, {}, {}}), ClockRegression);
  CHECK(engine.frames() == 1);
}

TEST_CASE("override failure leaves the config untouched") {
  Engine engine(EngineConfig{});
  CHECK_THROWS_AS(engine.apply_overrides({{"p_off", 0.99}}), InvalidConfig);
  CHECK(engine.config().fsm.p_off == 0.75);
  engine.apply_overrides({{"map.f_max", 700}});
  CHECK(engine.config().map.f_max == 700.0);
}

TEST_CASE("seeded noise is reproducible") {
  EngineConfig cfg;
  cfg.noise.raw_p_stddev = 0.05;
  auto run = [&](std::uint64_t seed) {
    Engine engine(cfg, seed);
    std::vector<double> raw;
    const std::vector<ActorInput> actors{direct("a", 0.5)};
    for (int k = 0; k < 50; ++k) raw.push_back(engine.step({k / 30.0, actors, {}}).actors[0].raw_p);
    return raw;
  };
  CHECK(run(7) == run(7));
  CHECK(run(7) != run(8));
}

TEST_CASE("invalid config is rejected at construction") {
  EngineConfig cfg;
  cfg.map.vol_max = 2.0;
  CHECK_THROWS_AS(Engine{cfg}, InvalidConfig);
}
