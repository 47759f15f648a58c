#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "sonibot/types.hpp"

namespace sonibot::signal {

/// Raw classifier output for one user at one instant.
struct IntentionSample {
  UserId user{};
  double raw_p = 0.0;
  double t = 0.0;  // seconds, monotonic
};

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

/// Per-user smoothed intention state.
struct SmoothedSignal {
  UserId user{};
  double p = 0.0;      // EMA-smoothed probability
  double dp_dt = 0.0;  // least-squares slope of p over the rate window, 1/s
  double raw_p = 0.0;  // last raw sample, for reporting
  double t_last = 0.0;
  bool done = false;  // treat taken; never re-activates under this id
  std::uint64_t created_seq = 0;
};

struct TrackerConfig {
  double tau_s = 1.0;
  double rate_window_s = 0.5;
  double track_loss_timeout_s = 0.5;

  std::vector<ConfigIssue> validate(const std::string& prefix = "tracker") const;
};

/// Variable-step exponential moving average:
///   prev + (raw - prev) * (1 - exp(-dt / tau))
/// Throws ClockRegression for dt < 0.
double ema_update(double prev_p, double raw_p, double dt, double tau_s);

/// Least-squares slope of the points in history whose timestamp lies within
/// rate_window_s of the newest one. Returns 0 for fewer than two points.
double estimate_rate(std::span<const TimedValue> history, double rate_window_s);

/// Owns the live tracks. Time only enters through sample timestamps and
/// explicit advance() calls.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {});

  /// Creates the track on first sighting, else applies the EMA and the rate
  /// estimate. Throws ClockRegression if t does not increase for this user and
  /// std::domain_error if raw_p is outside [0, 1].
  const SmoothedSignal& ingest(const IntentionSample& sample);

  /// Moves the tracker clock to now (never backwards) and drops tracks with
  /// no sample in the last track_loss_timeout_s. Returns every track dropped
  /// since the previous call, including drops triggered inside ingest().
  std::vector<UserId> advance(double now);

  /// nullopt when the user is not tracked (the caller should warn).
  std::optional<SmoothedSignal> mark_done(UserId user);

  /// Live tracks ordered by creation.
  std::vector<SmoothedSignal> signals() const;
  const SmoothedSignal* find(UserId user) const;
  std::size_t size() const noexcept { return tracks_.size(); }
  double now() const noexcept { return now_; }

  const TrackerConfig& config() const noexcept { return config_; }
  void set_config(const TrackerConfig& config);

 private:
  struct Track {
    SmoothedSignal signal;
    std::vector<TimedValue> history;
  };

  void expire();

  TrackerConfig config_;
  std::map<UserId, Track> tracks_;
  std::set<UserId> retired_done_;
  std::vector<UserId> pending_lost_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
  bool clock_started_ = false;
};

}  // namespace sonibot::signal
