#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "sonibot/config.hpp"

namespace sonibot::service {

enum class AudioSink {
  None,       // render and discard
  WavFile,    // accumulate and write on shutdown
  PcmStdout,  // raw 16-bit little-endian mono to stdout
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks an ephemeral port
  double speed = 1.0;         // wall-clock multiplier for both clocks
  std::optional<double> duration_s;  // logical seconds; runs until stop() otherwise
  std::optional<std::filesystem::path> record_dir;
  AudioSink audio = AudioSink::None;
  std::filesystem::path audio_path = "live.wav";
  std::uint64_t seed = 0;
  bool handle_signals = false;  // SIGINT/SIGTERM end wait()
};

/// WebSocket front end over a LiveSession.
///
/// Three threads: the io thread owns every socket, the control thread is the
/// single writer of engine state and ticks at control_rate_hz * speed, and the
/// audio thread renders blocks from parameter snapshots taken from a mailbox.
/// Under overload the control clock stretches: frames keep logical times k/rate
/// and the wall deadline is resynchronised instead of skipping frames.
class LiveService {
 public:
  LiveService(EngineConfig config, ServiceOptions options);
  ~LiveService();

  LiveService(const LiveService&) = delete;
  LiveService& operator=(const LiveService&) = delete;

  /// Binds and starts all threads; returns the bound port.
  std::uint16_t start();
  /// Blocks until duration_s elapses or stop() is called.
  void wait();
  /// Stops all threads and writes recordings. Idempotent.
  void stop();

  std::uint64_t frames_sent() const noexcept;
  std::size_t client_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sonibot::service
