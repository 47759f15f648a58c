#include "sonibot/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace sonibot::engine {
namespace {

constexpr double kTimeEpsilon = 1e-9;

std::string user_text(UserId id) { return std::to_string(to_underlying(id)); }

}  // namespace

std::string format_time(double t) {
  char text[32];
  std::snprintf(text, sizeof text, "%.6f", t);
  return text;
}

const signal::SmoothedSignal* FrameOutput::target_signal() const {
  if (!target) return nullptr;
  for (const auto& s : users) {
    if (s.user == *target) return &s;
  }
  return nullptr;
}

std::vector<ActorView> Perception::observe(double t, std::span<const ActorInput> actors,
                                           const scenario::IntentionModelConfig& model,
                                           double track_loss_timeout_s) {
  std::vector<ActorView> views;
  views.reserve(actors.size());
  std::set<std::string> present;
  for (const auto& input : actors) {
    present.insert(input.actor);
    ActorView view;
    view.actor = input.actor;
    view.mode = input.mode;
    view.pose = input.pose;
    if (input.mode == scenario::ActorMode::DirectP) {
      view.visible = true;
      view.raw_p = std::clamp(input.p, 0.0, 1.0);
    } else {
      view.visible = scenario::in_field_of_view(input.pose, model);
      view.raw_p = view.visible ? scenario::synth_intention(input.pose, model) : 0.0;
    }

    auto it = memory_.find(input.actor);
    if (view.visible) {
      if (it == memory_.end() || t - it->second.last_visible_t > track_loss_timeout_s + kTimeEpsilon) {
        const Memory fresh{UserId{next_user_++}, t};
        it = memory_.insert_or_assign(input.actor, fresh).first;
      }
      it->second.last_visible_t = t;
      view.user = it->second.user;
    }
    views.push_back(std::move(view));
  }
  std::erase_if(memory_, [&](const auto& entry) { return !present.contains(entry.first); });
  return views;
}

std::optional<UserId> Perception::user_of(const std::string& actor) const {
  const auto it = memory_.find(actor);
  if (it == memory_.end()) return std::nullopt;
  return it->second.user;
}

Engine::Engine(EngineConfig config, std::uint64_t seed)
    : config_(std::move(config)), tracker_(config_.tracker), rng_(seed) {
  throw_if_invalid(config_.validate());
}

void Engine::apply_overrides(const std::map<std::string, double>& overrides) {
  config_ = sonibot::apply_overrides(config_, overrides);
}

FrameOutput Engine::step(const FrameInput& input) {
  if (last_t_ && input.t <= *last_t_) {
    throw ClockRegression("engine step: frame time " + format_time(input.t) + " does not advance");
  }
  last_t_ = input.t;

  FrameOutput out;
  out.frame = frame_++;
  out.t = input.t;
  const double t = input.t;

  out.actors = perception_.observe(t, input.actors, config_.intention_model,
                                   config_.tracker.track_loss_timeout_s);
  std::normal_distribution<double> noise(0.0, config_.noise.raw_p_stddev);
  for (auto& view : out.actors) {
    if (!view.visible || !view.user) continue;
    if (config_.noise.raw_p_stddev > 0.0) view.raw_p = std::clamp(view.raw_p + noise(rng_), 0.0, 1.0);
    const bool known = tracker_.find(*view.user) != nullptr;
    tracker_.ingest({*view.user, view.raw_p, t});
    if (!known) {
      out.log.push_back({t, "track_created", "user=" + user_text(*view.user) + " actor=" + view.actor});
    }
  }
  for (const UserId lost : tracker_.advance(t)) {
    out.log.push_back({t, "track_lost", "user=" + user_text(lost)});
  }

  for (const auto& treat : input.treats) {
    const std::string who = treat.actor ? " actor=" + *treat.actor : std::string();
    if (state_.phase != behavior::Phase::Engaged || !state_.target) {
      out.log.push_back({t, "treat_ignored", "reason=not_engaged" + who});
      continue;
    }
    const UserId target = *state_.target;
    if (treat.actor && perception_.user_of(*treat.actor) != target) {
      out.log.push_back({t, "treat_ignored", "reason=not_engaged_target" + who});
      continue;
    }
    if (tracker_.mark_done(target)) {
      out.log.push_back({t, "treat_taken", "user=" + user_text(target) + who});
    } else {
      out.log.push_back({t, "warning", "mark_done for untracked user=" + user_text(target)});
    }
  }

  out.users = tracker_.signals();
  const behavior::Phase before = state_.phase;
  auto result = behavior::step(state_, out.users, t, config_.fsm);
  state_ = result.state;
  out.phase = state_.phase;
  out.target = state_.target;
  out.led = result.led;
  out.actuator_events = std::move(result.events);
  for (const auto& ev : out.actuator_events) {
    std::string payload;
    if (ev.user) payload = "user=" + user_text(*ev.user);
    if (ev.reason) payload += std::string(payload.empty() ? "" : " ") + "reason=" + std::string(to_string(*ev.reason));
    out.log.push_back({t, std::string(to_string(ev.kind)), payload});
  }
  if (before != state_.phase) {
    out.log.push_back({t, "phase", std::string(to_string(before)) + "->" + std::string(to_string(state_.phase))});
  }

  out.sound = sonify::compute_params(out.users, state_.target, config_.map);
  return out;
}

}  // namespace sonibot::engine
