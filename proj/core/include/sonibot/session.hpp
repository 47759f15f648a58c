#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonibot/config.hpp"
#include "sonibot/engine.hpp"
#include "sonibot/scenario.hpp"

namespace sonibot {

/// One control frame as seen through the selected target.
struct TraceRow {
  std::uint64_t frame = 0;
  double t = 0.0;
  std::optional<UserId> user;
  double raw_p = 0.0;
  double p = 0.0;
  double dp_dt = 0.0;
  behavior::Phase phase = behavior::Phase::NoUsers;
  sonify::SoundParams sound;
  behavior::LedCommand led;
  std::size_t tracked = 0;

  static TraceRow from_frame(const engine::FrameOutput& frame);
};

struct SessionTrace {
  std::vector<TraceRow> rows;
  std::vector<engine::LogEvent> events;
  std::vector<float> audio;
  int sample_rate = 0;
  int block_size = 0;
};

inline constexpr std::string_view kTraceHeader =
    "frame,t,user_id,raw_p,p,dp_dt,phase,volume,frequency,vibrato,audible,led_r,led_g,led_b,"
    "led_intensity,tracked";

std::string format_trace_row(const TraceRow& row);
std::string format_trace_csv(std::span<const TraceRow> rows);
std::string format_event_log(std::span<const engine::LogEvent> events);
// "key=value" pairs as written to the event log.
std::string format_overrides(const std::map<std::string, double>& overrides);

struct RunOptions {
  std::uint64_t seed = 0;
  bool render_audio = true;
};

/// Steps the whole pipeline at the scenario frame rate while rendering audio
/// continuously. Control frames are applied at the first audio block boundary
/// at or after their timestamp. Deterministic in (scenario, config, seed).
/// Throws ScenarioError for a malformed scenario or invalid override events.
SessionTrace run_scenario(const scenario::Scenario& scenario, const EngineConfig& config,
                          const RunOptions& options = {});

/// Offline render artifacts: out.wav, trace.csv, events.log, spectrogram.csv.
struct RenderArtifacts {
  std::filesystem::path wav;
  std::filesystem::path trace;
  std::filesystem::path events;
  std::filesystem::path spectrogram;
};

RenderArtifacts write_artifacts(const SessionTrace& trace, const std::filesystem::path& out_dir);

}  // namespace sonibot
