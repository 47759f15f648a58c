#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "sonibot/synth.hpp"

namespace sonibot::wav {

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WavData {
  int sample_rate = 0;
  std::vector<float> samples;  // mono, decoded from 16-bit PCM
};

constexpr std::size_t kHeaderBytes = 44;

/// Float sample to signed 16-bit PCM: round(clamp(x, -1, 1) * 32767).
std::int16_t quantize(float sample) noexcept;
float dequantize(std::int16_t value) noexcept;

/// Mono 16-bit little-endian PCM RIFF/WAVE. Throws WavError on an empty
/// sequence or when the file cannot be written.
void write_wav(std::span<const synth::AudioBlock> blocks, int sample_rate,
               const std::filesystem::path& path);
void write_wav(std::span<const float> samples, int sample_rate, const std::filesystem::path& path);

/// Reads files produced by write_wav (mono, 16-bit PCM). Unknown chunks are skipped.
WavData read_wav(const std::filesystem::path& path);

}  // namespace sonibot::wav
