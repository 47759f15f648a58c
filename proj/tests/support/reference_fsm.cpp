#include "reference_fsm.hpp"

namespace sonibot::testing {

using behavior::ActuatorKind;
using behavior::RetractReason;

std::string describe(const RefEvent& event) {
  std::string text = "tick " + std::to_string(event.tick) + " " + std::string(behavior::to_string(event.kind));
  if (event.user) text += " user=" + std::to_string(*event.user);
  if (event.reason) text += " reason=" + std::string(behavior::to_string(*event.reason));
  return text;
}

const ReferenceFsm::Seen* ReferenceFsm::lookup(const Tick& tick, std::uint32_t user) const {
  for (const auto& s : tick.seen) {
    if (s.user == user) return &s;
  }
  return nullptr;
}

std::vector<RefEvent> ReferenceFsm::step(double t, std::span<const signal::SmoothedSignal> signals) {
  Tick tick{t, {}};
  for (const auto& s : signals) tick.seen.push_back({to_underlying(s.user), s.p, s.done});
  history_.push_back(tick);
  const std::size_t now = history_.size() - 1;

  std::vector<RefEvent> events;
  if (engaged_) {
    const Seen* mine = lookup(history_[now], target_);
    std::optional<RetractReason> why;
    if (mine == nullptr) {
      why = RetractReason::TrackLost;
    } else if (mine->done) {
      why = RetractReason::TreatTaken;
    } else {
      // Walk back over the unbroken run of sub-threshold ticks ending now.
      std::optional<double> run_start;
      for (std::size_t k = now; k > engaged_at_; --k) {
        const Seen* s = lookup(history_[k], target_);
        if (s == nullptr || !(s->p < config_.p_off)) break;
        run_start = history_[k].t;
      }
      if (run_start && t - *run_start >= config_.release_hold_s) why = RetractReason::LowProbability;
    }
    if (why) {
      events.push_back({now, ActuatorKind::RetractArm, target_, why});
      events.push_back({now, ActuatorKind::OrientNeutral, std::nullopt, std::nullopt});
      engaged_ = false;
    }
    return events;
  }

  // Highest p among users not yet served; the earliest listed wins a tie.
  const signal::SmoothedSignal* best = nullptr;
  for (const auto& s : signals) {
    if (s.done) continue;
    if (best == nullptr || s.p > best->p || (s.p == best->p && s.created_seq < best->created_seq)) best = &s;
  }
  if (best != nullptr && best->p > config_.p_on) {
    engaged_ = true;
    target_ = to_underlying(best->user);
    engaged_at_ = now;
    events.push_back({now, ActuatorKind::OrientToUser, target_, std::nullopt});
    events.push_back({now, ActuatorKind::ExtendArm, target_, std::nullopt});
  }
  return events;
}

}  // namespace sonibot::testing
