#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonibot/sonify.hpp"
#include "sonibot/types.hpp"

namespace sonibot::synth {

struct SynthConfig {
  int sample_rate = 44100;
  int block_size = 512;
  double vibrato_rate = 20.0;  // Hz, shared LFO for pitch and amplitude
  double param_ramp_s = 0.05;

  std::vector<ConfigIssue> validate(const std::string& prefix = "synth") const;
};

struct AudioBlock {
  std::vector<float> samples;  // mono, each in [-1, 1]
  double t_start = 0.0;
};

/// Linear glide toward a target over a fixed number of samples.
struct RampedValue {
  double current = 0.0;
  double target = 0.0;
  double step = 0.0;
  std::int64_t remaining = 0;

  void retarget(double value, std::int64_t ramp_samples);
  void advance();
};

struct SynthState {
  double carrier_phase = 0.0;  // radians, [0, 2pi)
  double lfo_phase = 0.0;      // radians, [0, 2pi)
  RampedValue volume;
  RampedValue frequency;
  RampedValue vibrato;
  std::optional<sonify::SoundParams> target;
  std::uint64_t samples_rendered = 0;
};

/// Sine carrier with one LFO modulating pitch and amplitude by the same
/// fractional depth. Phase accumulators run continuously across blocks.
class Synthesizer {
 public:
  explicit Synthesizer(SynthConfig config = {});

  /// Installs params as the ramp target. Re-sending the current target is a
  /// no-op. A silent target only fades the volume; pitch is left in place.
  void set_params(const sonify::SoundParams& params);

  AudioBlock render_block();
  // Renders samples.size() samples in place; used by render_block.
  void render(std::span<float> samples);

  const SynthState& state() const noexcept { return state_; }
  const SynthConfig& config() const noexcept { return config_; }
  std::int64_t ramp_samples() const noexcept { return ramp_samples_; }

 private:
  SynthConfig config_;
  SynthState state_;
  std::int64_t ramp_samples_ = 0;
};

/// Single-slot handoff between the control loop and the audio renderer. The
/// renderer always sees a complete parameter set.
class ParamMailbox {
 public:
  void publish(const sonify::SoundParams& params);
  // Latest params published since the previous take(), if any.
  std::optional<sonify::SoundParams> take();

 private:
  std::mutex mutex_;
  std::optional<sonify::SoundParams> pending_;
};

}  // namespace sonibot::synth
