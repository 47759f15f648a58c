#include "sonibot/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sonibot::spectral {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

void fft(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly rather than by recurrence to keep error flat.
      const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
      for (std::size_t start = 0; start < n; start += len) {
        const std::complex<double> u = data[start + k];
        const std::complex<double> v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<double> magnitude_spectrum(std::span<const double> signal, std::size_t fft_size) {
  std::size_t n = 1;
  while (n < std::max(fft_size, signal.size())) n <<= 1;
  std::vector<std::complex<double>> buffer(n);
  std::copy(signal.begin(), signal.end(), buffer.begin());
  fft(buffer);
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(buffer[k]);
  return mags;
}

Spectrogram::Spectrogram(std::size_t window_size, std::size_t hop, double sample_rate,
                         std::size_t frames)
    : window_size_(window_size),
      hop_(hop),
      sample_rate_(sample_rate),
      frames_(frames),
      bins_(window_size / 2 + 1),
      data_(frames * bins_, 0.0) {}

double Spectrogram::frame_time(std::size_t frame) const {
  return (static_cast<double>(frame * hop_) + static_cast<double>(window_size_) / 2.0) / sample_rate_;
}

double Spectrogram::bin_frequency(std::size_t bin) const {
  return static_cast<double>(bin) * sample_rate_ / static_cast<double>(window_size_);
}

std::size_t Spectrogram::peak_bin(std::size_t index) const {
  const auto row = frame(index);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

void Spectrogram::write_csv(const std::filesystem::path& path, double max_freq_hz) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write spectrogram to " + path.string());
  out << "frame_time,bin_freq,magnitude\n";
  char line[96];
  for (std::size_t f = 0; f < frames_; ++f) {
    const double t = frame_time(f);
    for (std::size_t b = 0; b < bins_; ++b) {
      const double hz = bin_frequency(b);
      if (hz > max_freq_hz) break;
      std::snprintf(line, sizeof line, "%.6f,%.4f,%.6e\n", t, hz, at(f, b));
      out << line;
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Spectrogram stft(std::span<const float> samples, std::size_t window_size, std::size_t hop,
                 double sample_rate) {
  if (!is_power_of_two(window_size)) {
    throw std::invalid_argument("stft: window_size must be a power of two");
  }
  if (hop == 0 || hop > window_size) throw std::invalid_argument("stft: need 0 < hop <= window_size");
  if (samples.size() < window_size) {
    throw std::invalid_argument("stft: " + std::to_string(samples.size()) +
                                " samples is shorter than the window");
  }

  const std::size_t frames = 1 + (samples.size() - window_size) / hop;
  Spectrogram spec(window_size, hop, sample_rate, frames);

  std::vector<double> window(window_size);
  for (std::size_t i = 0; i < window_size; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(window_size)));
  }

  std::vector<std::complex<double>> buffer(window_size);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t offset = f * hop;
    for (std::size_t i = 0; i < window_size; ++i) {
      buffer[i] = {static_cast<double>(samples[offset + i]) * window[i], 0.0};
    }
    fft(buffer);
    for (std::size_t b = 0; b < spec.bins(); ++b) spec.at(f, b) = std::abs(buffer[b]);
  }
  return spec;
}

std::vector<double> amplitude_envelope(std::span<const float> samples, std::size_t smoothing_samples) {
  const std::size_t width = std::max<std::size_t>(1, smoothing_samples);
  std::vector<double> out(samples.size());
  double running = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    running += std::abs(static_cast<double>(samples[i]));
    if (i >= width) running -= std::abs(static_cast<double>(samples[i - width]));
    out[i] = running / static_cast<double>(std::min(i + 1, width));
  }
  return out;
}

}  // namespace sonibot::spectral
