#include "sonibot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sonibot::synth {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phase) {
  if (phase >= kTwoPi) {
    phase -= kTwoPi;
    if (phase >= kTwoPi) phase = std::fmod(phase, kTwoPi);
  }
  return phase;
}

}  // namespace

std::vector<ConfigIssue> SynthConfig::validate(const std::string& prefix) const {
  std::vector<ConfigIssue> issues;
  if (sample_rate < 8000) issues.push_back({prefix + ".sample_rate", "must be >= 8000"});
  if (block_size <= 0 || block_size > sample_rate) {
    issues.push_back({prefix + ".block_size", "must satisfy 0 < block_size <= sample_rate"});
  }
  if (!(vibrato_rate > 0.0)) issues.push_back({prefix + ".vibrato_rate", "must be > 0"});
  if (!(param_ramp_s >= 0.0)) issues.push_back({prefix + ".param_ramp_s", "must be >= 0"});
  return issues;
}

void RampedValue::retarget(double value, std::int64_t ramp_samples) {
  target = value;
  if (ramp_samples <= 0 || current == value) {
    current = value;
    step = 0.0;
    remaining = 0;
    return;
  }
  step = (value - current) / static_cast<double>(ramp_samples);
  remaining = ramp_samples;
}

void RampedValue::advance() {
  if (remaining <= 0) return;
  --remaining;
  current = remaining == 0 ? target : current + step;
}

Synthesizer::Synthesizer(SynthConfig config) : config_(config) {
  throw_if_invalid(config_.validate());
  ramp_samples_ = std::llround(config_.param_ramp_s * config_.sample_rate);
}

void Synthesizer::set_params(const sonify::SoundParams& params) {
  if (state_.target && *state_.target == params) return;
  state_.target = params;

  const bool silent_now = state_.volume.current == 0.0 && state_.volume.remaining == 0;
  state_.volume.retarget(params.audible ? params.volume : 0.0, ramp_samples_);
  if (!params.audible) return;
  // Nothing is sounding, so pitch and depth can jump without a click.
  const std::int64_t ramp = silent_now ? 0 : ramp_samples_;
  state_.frequency.retarget(params.frequency, ramp);
  state_.vibrato.retarget(params.vibrato, ramp);
}

void Synthesizer::render(std::span<float> samples) {
  const double sr = static_cast<double>(config_.sample_rate);
  const double lfo_increment = kTwoPi * config_.vibrato_rate / sr;
  for (float& out : samples) {
    const double lfo = std::sin(state_.lfo_phase);
    const double depth = state_.vibrato.current;
    const double mod = 1.0 + depth * lfo;
    const double freq = state_.frequency.current * mod;
    const double amp = std::min(state_.volume.current * mod, 1.0);

    out = amp == 0.0 ? 0.0f
                     : static_cast<float>(std::clamp(amp * std::sin(state_.carrier_phase), -1.0, 1.0));

    state_.carrier_phase = wrap_phase(state_.carrier_phase + kTwoPi * freq / sr);
    state_.lfo_phase = wrap_phase(state_.lfo_phase + lfo_increment);
    state_.volume.advance();
    state_.frequency.advance();
    state_.vibrato.advance();
  }
  state_.samples_rendered += samples.size();
}

AudioBlock Synthesizer::render_block() {
  AudioBlock block;
  block.t_start = static_cast<double>(state_.samples_rendered) / config_.sample_rate;
  block.samples.resize(static_cast<std::size_t>(config_.block_size));
  render(block.samples);
  return block;
}

void ParamMailbox::publish(const sonify::SoundParams& params) {
  std::lock_guard lock(mutex_);
  pending_ = params;
}

std::optional<sonify::SoundParams> ParamMailbox::take() {
  std::lock_guard lock(mutex_);
  std::optional<sonify::SoundParams> out;
  out.swap(pending_);
  return out;
}

}  // namespace sonibot::synth
