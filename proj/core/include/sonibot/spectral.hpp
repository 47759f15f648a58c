#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace sonibot::spectral {

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
void fft(std::span<std::complex<double>> data);

/// Magnitude spectrum of a real signal zero-padded to a power of two >= fft_size.
/// Returns fft_size / 2 + 1 bins.
std::vector<double> magnitude_spectrum(std::span<const double> signal, std::size_t fft_size);

/// Hann-windowed magnitude spectrogram, frame-major.
class Spectrogram {
 public:
  Spectrogram(std::size_t window_size, std::size_t hop, double sample_rate, std::size_t frames);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t bins() const noexcept { return bins_; }
  std::size_t window_size() const noexcept { return window_size_; }
  std::size_t hop() const noexcept { return hop_; }

  double& at(std::size_t frame, std::size_t bin) { return data_[frame * bins_ + bin]; }
  double at(std::size_t frame, std::size_t bin) const { return data_[frame * bins_ + bin]; }
  std::span<const double> frame(std::size_t index) const {
    return {data_.data() + index * bins_, bins_};
  }

  // Center of the frame, seconds.
  double frame_time(std::size_t frame) const;
  double bin_frequency(std::size_t bin) const;
  std::size_t peak_bin(std::size_t frame) const;

  /// CSV with header frame_time,bin_freq,magnitude; bins above max_freq_hz are skipped.
  void write_csv(const std::filesystem::path& path, double max_freq_hz) const;

 private:
  std::size_t window_size_;
  std::size_t hop_;
  double sample_rate_;
  std::size_t frames_;
  std::size_t bins_;
  std::vector<double> data_;
};

/// Throws std::invalid_argument unless window_size is a power of two,
/// 0 < hop <= window_size and samples.size() >= window_size.
Spectrogram stft(std::span<const float> samples, std::size_t window_size, std::size_t hop,
                 double sample_rate);

/// Amplitude envelope: rectified signal smoothed by a moving average of
/// smoothing_samples. Output has the same length as the input.
std::vector<double> amplitude_envelope(std::span<const float> samples, std::size_t smoothing_samples);

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace sonibot::spectral
