#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonibot/behavior.hpp"
#include "sonibot/signal.hpp"

namespace sonibot::testing {

struct RefEvent {
  std::size_t tick = 0;
  behavior::ActuatorKind kind = behavior::ActuatorKind::OrientNeutral;
  std::optional<std::uint32_t> user;
  std::optional<behavior::RetractReason> reason;

  friend bool operator==(const RefEvent&, const RefEvent&) = default;
};

std::string describe(const RefEvent& event);

/// Deliberately naive engagement interpreter: keeps every tick it has seen and
/// re-scans that history instead of holding a below-threshold timestamp.
class ReferenceFsm {
 public:
  explicit ReferenceFsm(behavior::FsmConfig config) : config_(config) {}

  std::vector<RefEvent> step(double t, std::span<const signal::SmoothedSignal> signals);
  bool engaged() const { return engaged_; }

 private:
  struct Seen {
    std::uint32_t user;
    double p;
    bool done;
  };
  struct Tick {
    double t;
    std::vector<Seen> seen;
  };

  const Seen* lookup(const Tick& tick, std::uint32_t user) const;

  behavior::FsmConfig config_;
  std::vector<Tick> history_;
  bool engaged_ = false;
  std::uint32_t target_ = 0;
  std::size_t engaged_at_ = 0;
};

}  // namespace sonibot::testing
