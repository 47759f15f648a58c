#include <initializer_list>

#include "sonibot/scenario.hpp"

namespace sonibot::scenario {
namespace {

ActorScript walker(std::string id, std::initializer_list<Waypoint> waypoints) {
  ActorScript actor;
  actor.id = std::move(id);
  actor.mode = ActorMode::Trajectory;
  actor.waypoints = waypoints;
  return actor;
}

Waypoint at(double t, double x, double y, double facing_deg) { return {t, {x, y, facing_deg}, 0.0}; }
Waypoint prob(double t, double p) { return {t, {}, p}; }

// Approach while looking at the robot (0-4 s), stand and be offered the treat
// (4-10 s), then turn away and leave the field of view (10-12 s).
Scenario fig5_approach_leave() {
  Scenario s;
  s.name = "fig5_approach_leave";
  s.duration_s = 12.0;
  s.actors.push_back(walker("visitor", {
                                           at(0.0, 4.0, 0.0, 180.0),
                                           at(4.0, 0.6, 0.0, 180.0),
                                           at(10.0, 0.6, 0.0, 180.0),
                                           at(10.4, 0.7, 0.35, 45.0),
                                           at(11.2, 0.8, 1.6, 80.0),
                                           at(12.0, 0.9, 2.8, 85.0),
                                       }));
  return s;
}

// Hovers around p = 0.5: audible, never engaging.
Scenario shy_user() {
  Scenario s;
  s.name = "shy_user";
  s.duration_s = 12.0;
  ActorScript actor;
  actor.id = "shy";
  actor.mode = ActorMode::DirectP;
  actor.waypoints = {prob(0.0, 0.45), prob(3.0, 0.55), prob(6.0, 0.45), prob(9.0, 0.55), prob(12.0, 0.5)};
  s.actors.push_back(std::move(actor));
  return s;
}

// A engages first; B's later approach does not steal the engagement. After A
// takes a treat the robot turns to B.
Scenario two_actors() {
  Scenario s;
  s.name = "two_actors";
  s.duration_s = 14.0;
  s.actors.push_back(walker("alice", {
                                         at(0.0, 3.0, -0.5, 170.0),
                                         at(3.0, 0.6, -0.2, 180.0),
                                         at(14.0, 0.6, -0.2, 180.0),
                                     }));
  s.actors.push_back(walker("bob", {
                                       at(0.0, 2.5, 1.0, 200.0),
                                       at(5.0, 2.5, 1.0, 200.0),
                                       at(7.0, 0.7, 0.3, 200.0),
                                       at(14.0, 0.7, 0.3, 200.0),
                                   }));
  ScenarioEvent treat;
  treat.t = 8.0;
  treat.kind = EventKind::TreatTaken;
  treat.actor = "alice";
  s.events.push_back(treat);
  return s;
}

// Crosses the field of view sideways at 2.5 m without looking: the awareness
// tone only.
Scenario walkthrough() {
  Scenario s;
  s.name = "walkthrough";
  s.duration_s = 10.0;
  s.actors.push_back(walker("passerby", {
                                            at(0.0, 2.5, -5.0, 90.0),
                                            at(10.0, 2.5, 5.0, 90.0),
                                        }));
  return s;
}

}  // namespace

std::vector<std::string> bundled_scenario_names() {
  return {"fig5_approach_leave", "shy_user", "two_actors", "walkthrough"};
}

std::optional<Scenario> bundled_scenario(std::string_view name) {
  if (name == "fig5_approach_leave") return fig5_approach_leave();
  if (name == "shy_user") return shy_user();
  if (name == "two_actors") return two_actors();
  if (name == "walkthrough") return walkthrough();
  return std::nullopt;
}

}  // namespace sonibot::scenario
