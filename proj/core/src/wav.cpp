#include "sonibot/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace sonibot::wav {
namespace {

void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_tag(std::vector<char>& out, const char (&tag)[5]) { out.insert(out.end(), tag, tag + 4); }

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::int16_t quantize(float sample) noexcept {
  const double x = std::clamp(static_cast<double>(sample), -1.0, 1.0);
  return static_cast<std::int16_t>(std::lround(x * 32767.0));
}

float dequantize(std::int16_t value) noexcept { return static_cast<float>(value / 32767.0); }

void write_wav(std::span<const float> samples, int sample_rate, const std::filesystem::path& path) {
  if (samples.empty()) throw WavError("write_wav: no samples to write");
  if (sample_rate <= 0) throw WavError("write_wav: invalid sample rate");
  const std::uint64_t data_bytes = samples.size() * 2;
  if (data_bytes + kHeaderBytes - 8 > std::numeric_limits<std::uint32_t>::max()) {
    throw WavError("write_wav: too many samples for a RIFF file");
  }

  std::vector<char> bytes;
  bytes.reserve(kHeaderBytes + data_bytes);
  put_tag(bytes, "RIFF");
  put_u32(bytes, static_cast<std::uint32_t>(36 + data_bytes));
  put_tag(bytes, "WAVE");
  put_tag(bytes, "fmt ");
  put_u32(bytes, 16);
  put_u16(bytes, 1);  // PCM
  put_u16(bytes, 1);  // mono
  put_u32(bytes, static_cast<std::uint32_t>(sample_rate));
  put_u32(bytes, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(bytes, 2);   // block align
  put_u16(bytes, 16);  // bits per sample
  put_tag(bytes, "data");
  put_u32(bytes, static_cast<std::uint32_t>(data_bytes));
  for (float s : samples) put_u16(bytes, static_cast<std::uint16_t>(quantize(s)));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw WavError("write_wav: cannot open " + path.string() + " for writing");
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw WavError("write_wav: failed writing " + path.string());
}

void write_wav(std::span<const synth::AudioBlock> blocks, int sample_rate,
               const std::filesystem::path& path) {
  if (blocks.empty()) throw WavError("write_wav: empty block sequence");
  std::vector<float> samples;
  for (const auto& block : blocks) samples.insert(samples.end(), block.samples.begin(), block.samples.end());
  write_wav(samples, sample_rate, path);
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw WavError("read_wav: cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError("read_wav: " + path.string() + " is not a RIFF/WAVE file");
  }

  WavData out;
  bool have_format = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw WavError("read_wav: truncated chunk in " + path.string());
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw WavError("read_wav: short fmt chunk");
      const std::uint16_t format = get_u16(bytes.data() + body);
      const std::uint16_t channels = get_u16(bytes.data() + body + 2);
      const std::uint16_t bits = get_u16(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw WavError("read_wav: only mono 16-bit PCM is supported");
      }
      out.sample_rate = static_cast<int>(get_u32(bytes.data() + body + 4));
      have_format = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_format) throw WavError("read_wav: data chunk before fmt chunk");
      out.samples.reserve(size / 2);
      for (std::size_t i = 0; i + 1 < size; i += 2) {
        out.samples.push_back(dequantize(static_cast<std::int16_t>(get_u16(bytes.data() + body + i))));
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw WavError("read_wav: no data chunk in " + path.string());
}

}  // namespace sonibot::wav
