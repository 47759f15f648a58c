#include "sonibot/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sonibot::signal {
namespace {

// Absorbs rounding in frame timestamps such as k / 30.0 when deciding window
// membership.
constexpr double kTimeEpsilon = 1e-9;

bool valid_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::vector<ConfigIssue> TrackerConfig::validate(const std::string& prefix) const {
  std::vector<ConfigIssue> issues;
  auto positive = [&](const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      issues.push_back({prefix + "." + name, "must be strictly positive"});
    }
  };
  positive("tau_s", tau_s);
  positive("rate_window_s", rate_window_s);
  positive("track_loss_timeout_s", track_loss_timeout_s);
  return issues;
}

double ema_update(double prev_p, double raw_p, double dt, double tau_s) {
  if (dt < 0.0) {
    throw ClockRegression("ema_update: negative dt " + std::to_string(dt));
  }
  if (!(tau_s > 0.0)) throw std::domain_error("ema_update: tau_s must be positive");
  const double alpha = -std::expm1(-dt / tau_s);
  const double next = prev_p + (raw_p - prev_p) * alpha;
  // Convex combination; the clamp only absorbs the last ulp.
  return std::clamp(next, std::min(prev_p, raw_p), std::max(prev_p, raw_p));
}

double estimate_rate(std::span<const TimedValue> history, double rate_window_s) {
  if (history.size() < 2) return 0.0;
  const double newest = history.back().t;
  const double cutoff = newest - rate_window_s - kTimeEpsilon;

  auto first = std::find_if(history.begin(), history.end(),
                            [cutoff](const TimedValue& v) { return v.t >= cutoff; });
  const auto window = std::span<const TimedValue>(first, history.end());
  if (window.size() < 2) return 0.0;

  // Centered sums keep the fit well conditioned at large absolute times.
  double mean_t = 0.0;
  double mean_v = 0.0;
  for (const auto& point : window) {
    mean_t += point.t;
    mean_v += point.value;
  }
  mean_t /= static_cast<double>(window.size());
  mean_v /= static_cast<double>(window.size());

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& point : window) {
    const double dt = point.t - mean_t;
    sxx += dt * dt;
    sxy += dt * (point.value - mean_v);
  }
  if (sxx <= 0.0) return 0.0;
  return sxy / sxx;
}

Tracker::Tracker(TrackerConfig config) : config_(config) {
  throw_if_invalid(config_.validate());
}

void Tracker::set_config(const TrackerConfig& config) {
  throw_if_invalid(config.validate());
  config_ = config;
}

const SmoothedSignal& Tracker::ingest(const IntentionSample& sample) {
  if (!valid_probability(sample.raw_p)) {
    throw std::domain_error("ingest: raw_p outside [0, 1] for user " +
                            std::to_string(to_underlying(sample.user)));
  }

  auto it = tracks_.find(sample.user);
  if (it == tracks_.end()) {
    Track track;
    track.signal.user = sample.user;
    track.signal.p = sample.raw_p;
    track.signal.raw_p = sample.raw_p;
    track.signal.dp_dt = 0.0;
    track.signal.t_last = sample.t;
    track.signal.done = retired_done_.contains(sample.user);
    track.signal.created_seq = next_seq_++;
    track.history.push_back({sample.t, sample.raw_p});
    it = tracks_.emplace(sample.user, std::move(track)).first;
  } else {
    auto& track = it->second;
    const double dt = sample.t - track.signal.t_last;
    if (dt <= 0.0) {
      throw ClockRegression("ingest: non-increasing timestamp for user " +
                            std::to_string(to_underlying(sample.user)));
    }
    track.signal.p = ema_update(track.signal.p, sample.raw_p, dt, config_.tau_s);
    track.signal.raw_p = sample.raw_p;
    track.signal.t_last = sample.t;
    track.history.push_back({sample.t, track.signal.p});
    const double cutoff = sample.t - config_.rate_window_s - kTimeEpsilon;
    std::erase_if(track.history, [cutoff](const TimedValue& v) { return v.t < cutoff; });
    track.signal.dp_dt = estimate_rate(track.history, config_.rate_window_s);
  }

  const UserId user = sample.user;
  if (!clock_started_ || sample.t > now_) {
    now_ = sample.t;
    clock_started_ = true;
  }
  expire();
  // A sample older than the current clock can expire its own track.
  static const SmoothedSignal kExpired{};
  const auto found = tracks_.find(user);
  return found != tracks_.end() ? found->second.signal : kExpired;
}

std::vector<UserId> Tracker::advance(double now) {
  if (!clock_started_ || now > now_) {
    now_ = now;
    clock_started_ = true;
  }
  expire();
  std::vector<UserId> lost;
  lost.swap(pending_lost_);
  return lost;
}

void Tracker::expire() {
  for (auto it = tracks_.begin(); it != tracks_.end();) {
    if (now_ - it->second.signal.t_last > config_.track_loss_timeout_s + kTimeEpsilon) {
      if (it->second.signal.done) retired_done_.insert(it->first);
      pending_lost_.push_back(it->first);
      it = tracks_.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<SmoothedSignal> Tracker::mark_done(UserId user) {
  const auto it = tracks_.find(user);
  if (it == tracks_.end()) return std::nullopt;
  it->second.signal.done = true;
  return it->second.signal;
}

std::vector<SmoothedSignal> Tracker::signals() const {
  std::vector<SmoothedSignal> out;
  out.reserve(tracks_.size());
  for (const auto& [id, track] : tracks_) out.push_back(track.signal);
  std::sort(out.begin(), out.end(), [](const SmoothedSignal& a, const SmoothedSignal& b) {
    return a.created_seq < b.created_seq;
  });
  return out;
}

const SmoothedSignal* Tracker::find(UserId user) const {
  const auto it = tracks_.find(user);
  return it == tracks_.end() ? nullptr : &it->second.signal;
}

}  // namespace sonibot::signal
