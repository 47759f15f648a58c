#include <doctest.h>

#include "generators.hpp"
#include "reference_fsm.hpp"
#include "sonibot/behavior.hpp"

using namespace sonibot;
using namespace sonibot::behavior;
using signal::SmoothedSignal;

namespace {

SmoothedSignal sig(std::uint32_t id, double p, bool done = false, std::uint64_t seq = 0) {
  SmoothedSignal s;
  s.user = UserId{id};
  s.p = p;
  s.done = done;
  s.created_seq = seq == 0 ? id : seq;
  return s;
}

std::vector<ActuatorKind> kinds(const StepResult& r) {
  std::vector<ActuatorKind> out;
  for (const auto& e : r.events) out.push_back(e.kind);
  return out;
}

// Drives step() over a constant-rate trace of single-user p values.
struct Driver {
  FsmConfig cfg;
  EngagementState state;
  double t = 0.0;
  StepResult feed(std::vector<SmoothedSignal> signals, double dt = 1.0 / 30.0) {
    auto r = step(state, signals, t, cfg);
    state = r.state;
    t += dt;
    return r;
  }
};

}  // namespace

TEST_CASE("select_target picks the highest p") {
  const std::vector<SmoothedSignal> s{sig(1, 0.9), sig(2, 0.4)};
  CHECK(select_target(s) == UserId{1});
}

TEST_CASE("select_target skips done users") {
  const std::vector<SmoothedSignal> s{sig(1, 0.6, true), sig(2, 0.3)};
  CHECK(select_target(s) == UserId{2});
}

TEST_CASE("select_target on no users") {
  CHECK_FALSE(select_target({}).has_value());
  const std::vector<SmoothedSignal> all_done{sig(1, 0.9, true)};
  CHECK_FALSE(select_target(all_done).has_value());
}

TEST_CASE("select_target breaks ties by track age") {
  const std::vector<SmoothedSignal> s{sig(7, 0.5, false, 3), sig(4, 0.5, false, 1)};
  CHECK(select_target(s) == UserId{4});
}

TEST_CASE("presence moves between NoUsers and Aware") {
  Driver d;
  CHECK(d.feed({}).state.phase == Phase::NoUsers);
  CHECK(d.feed({sig(1, 0.1)}).state.phase == Phase::Aware);
  CHECK(d.feed({}).state.phase == Phase::NoUsers);
}

TEST_CASE("activation above p_on emits orient then extend") {
  Driver d;
  d.feed({sig(1, 0.80)});
  const auto r = d.feed({sig(1, 0.86)});
  CHECK(r.state.phase == Phase::Engaged);
  CHECK(r.state.target == UserId{1});
  CHECK(kinds(r) == std::vector{ActuatorKind::OrientToUser, ActuatorKind::ExtendArm});
}

TEST_CASE("activation is strict at p_on") {
  Driver d;
  CHECK(d.feed({sig(1, 0.85)}).state.phase == Phase::Aware);
}

TEST_CASE("dead band keeps Aware") {
  Driver d;
  for (double p : {0.76, 0.8, 0.84, 0.85}) {
    const auto r = d.feed({sig(1, p)});
    CHECK(r.state.phase == Phase::Aware);
    CHECK(r.events.empty());
  }
}

TEST_CASE("short dip below p_off does not retract") {
  Driver d;
  d.feed({sig(1, 0.9)});
  for (int i = 0; i < 15; ++i) CHECK(d.feed({sig(1, 0.74)}).events.empty());  // 0.5 s
  for (int i = 0; i < 30; ++i) {
    const auto r = d.feed({sig(1, 0.9)});
    CHECK(r.events.empty());
    CHECK(r.state.phase == Phase::Engaged);
  }
}

TEST_CASE("sustained dip retracts after the hold") {
  Driver d;
  d.cfg.release_hold_s = 1.0;
  d.feed({sig(1, 0.9)}, 0.25);
  // Below from t = 0.25: still engaged at 1.0, retracts at 1.25.
  for (int i = 0; i < 4; ++i) CHECK(d.feed({sig(1, 0.5)}, 0.25).events.empty());
  CHECK(d.state.below_since == 0.25);
  const auto r = d.feed({sig(1, 0.5)}, 0.25);
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].kind == ActuatorKind::RetractArm);
  CHECK(r.events[0].reason == RetractReason::LowProbability);
  CHECK(r.events[1].kind == ActuatorKind::OrientNeutral);
  CHECK(r.state.phase == Phase::Aware);
  CHECK_FALSE(r.state.below_since.has_value());
}

TEST_CASE("treat taken retracts now") {
  Driver d;
  d.feed({sig(1, 0.9)});
  const auto r = d.feed({sig(1, 0.9, true)});
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].reason == RetractReason::TreatTaken);
  CHECK(r.state.phase == Phase::Aware);
  CHECK_FALSE(r.state.target.has_value());
}

TEST_CASE("track loss retracts now and drops to NoUsers") {
  Driver d;
  d.feed({sig(1, 0.9)});
  const auto r = d.feed({});
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].reason == RetractReason::TrackLost);
  CHECK(r.state.phase == Phase::NoUsers);
}

TEST_CASE("engaged target is frozen") {
  Driver d;
  d.feed({sig(1, 0.9), sig(2, 0.1)});
  const auto r = d.feed({sig(1, 0.8), sig(2, 0.99)});
  CHECK(r.events.empty());
  CHECK(r.state.target == UserId{1});
}

TEST_CASE("step rejects time going backwards") {
  EngagementState s;
  s.last_step_t = 2.0;
  CHECK_THROWS_AS(step(s, {}, 1.0, {}), ClockRegression);
  CHECK_NOTHROW(step(s, {}, 2.0, {}));
}

TEST_CASE("led colors") {
  FsmConfig cfg;
  EngagementState aware{Phase::Aware, UserId{1}, std::nullopt, std::nullopt};
  CHECK(led_for(aware, 0.0, cfg).rgb == Rgb{0, 0, 1});
  const auto top = led_for(aware, 1.0, cfg);
  CHECK(top.rgb == Rgb{1, 1, 0});
  CHECK(top.intensity == 1.0);
  const auto mid = led_for(aware, 0.5, cfg);
  CHECK(mid.rgb.r == doctest::Approx(0.5));
  CHECK(mid.rgb.g == doctest::Approx(0.5));
  CHECK(mid.rgb.b == doctest::Approx(0.5));
  CHECK(led_for(aware, 0.05, cfg).intensity == cfg.idle_intensity);

  const auto idle = led_for(EngagementState{}, 0.7, cfg);
  CHECK(idle.rgb == Rgb{1, 1, 1});
  CHECK(idle.intensity == cfg.idle_intensity);
}

TEST_CASE("property: led hue is monotone in p") {
  FsmConfig cfg;
  EngagementState s{Phase::Engaged, UserId{1}, std::nullopt, std::nullopt};
  LedCommand prev = led_for(s, 0.0, cfg);
  for (int i = 1; i <= 10000; ++i) {
    const auto led = led_for(s, i / 10000.0, cfg);
    REQUIRE(led.rgb.r >= prev.rgb.r);
    REQUIRE(led.rgb.b <= prev.rgb.b);
    REQUIRE(led.intensity >= prev.intensity);
    for (double c : {led.rgb.r, led.rgb.g, led.rgb.b, led.intensity}) {
      REQUIRE(c >= 0.0);
      REQUIRE(c <= 1.0);
    }
    prev = led;
  }
}

TEST_CASE("fsm config invariants") {
  FsmConfig cfg;
  CHECK(cfg.validate().empty());
  cfg.p_off = 0.9;
  const auto issues = cfg.validate();
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].field == "fsm.p_off");
  cfg = {};
  cfg.release_hold_s = 0;
  CHECK(cfg.validate().size() == 1);
  cfg = {};
  cfg.p_on = 1.2;
  CHECK(cfg.validate().size() == 1);
}

TEST_CASE("property: multi-user traces agree with the reference interpreter") {
  testing::Rng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    testing::SignalTraceOptions opt;
    opt.duration_s = 20.0;
    opt.users = 1 + static_cast<int>(rng() % 3);
    opt.gap_rate = 0.004;
    opt.treat_rate = 0.003;
    const auto trace = testing::signal_trace(rng, opt);

    FsmConfig cfg;
    testing::ReferenceFsm ref(cfg);
    EngagementState state;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const double t = static_cast<double>(i) / opt.rate_hz;
      const auto got = step(state, trace[i], t, cfg);
      state = got.state;
      const auto want = ref.step(t, trace[i]);
      REQUIRE(got.events.size() == want.size());
      for (std::size_t k = 0; k < want.size(); ++k) {
        CHECK(got.events[k].kind == want[k].kind);
        CHECK(got.events[k].reason == want[k].reason);
        if (want[k].user) CHECK(to_underlying(*got.events[k].user) == *want[k].user);
      }
      REQUIRE((state.phase == Phase::Engaged) == ref.engaged());
      if (state.phase == Phase::Engaged) REQUIRE(state.target.has_value());
    }
  }
}
