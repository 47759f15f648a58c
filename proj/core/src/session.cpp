#include "sonibot/session.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sonibot/spectral.hpp"
#include "sonibot/synth.hpp"
#include "sonibot/wav.hpp"

namespace sonibot {
namespace {

constexpr double kEventEpsilon = 1e-9;
constexpr std::size_t kSpectrogramWindow = 2048;
constexpr std::size_t kSpectrogramHop = 1024;
constexpr double kSpectrogramMaxHz = 4000.0;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

TraceRow TraceRow::from_frame(const engine::FrameOutput& frame) {
  TraceRow row;
  row.frame = frame.frame;
  row.t = frame.t;
  row.phase = frame.phase;
  row.sound = frame.sound;
  row.led = frame.led;
  row.tracked = frame.users.size();
  if (const auto* s = frame.target_signal()) {
    row.user = s->user;
    row.raw_p = s->raw_p;
    row.p = s->p;
    row.dp_dt = s->dp_dt;
  }
  return row;
}

std::string format_trace_row(const TraceRow& row) {
  const std::string user = row.user ? std::to_string(to_underlying(*row.user)) : std::string();
  char text[320];
  std::snprintf(text, sizeof text,
                "%llu,%.6f,%s,%.6f,%.6f,%.6f,%s,%.6f,%.4f,%.6f,%d,%.4f,%.4f,%.4f,%.4f,%zu",
                static_cast<unsigned long long>(row.frame), row.t, user.c_str(), row.raw_p, row.p,
                row.dp_dt, std::string(to_string(row.phase)).c_str(), row.sound.volume,
                row.sound.frequency, row.sound.vibrato, row.sound.audible ? 1 : 0, row.led.rgb.r,
                row.led.rgb.g, row.led.rgb.b, row.led.intensity, row.tracked);
  return text;
}

std::string format_trace_csv(std::span<const TraceRow> rows) {
  std::string out(kTraceHeader);
  out += "\n";
  for (const auto& row : rows) {
    out += format_trace_row(row);
    out += "\n";
  }
  return out;
}

std::string format_overrides(const std::map<std::string, double>& overrides) {
  std::string payload;
  for (const auto& [key, value] : overrides) {
    char text[64];
    std::snprintf(text, sizeof text, "%.6g", value);
    if (!payload.empty()) payload += " ";
    payload += key + "=" + text;
  }
  return payload;
}

std::string format_event_log(std::span<const engine::LogEvent> events) {
  std::string out;
  for (const auto& ev : events) {
    out += engine::format_time(ev.t) + "," + ev.event + "," + ev.payload + "\n";
  }
  return out;
}

SessionTrace run_scenario(const scenario::Scenario& scenario, const EngineConfig& config,
                          const RunOptions& options) {
  auto issues = scenario::validate(scenario);
  EngineConfig probe = config;
  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    const auto& ev = scenario.events[i];
    if (ev.kind != scenario::EventKind::ConfigOverrides) continue;
    try {
      probe = apply_overrides(probe, ev.overrides);
    } catch (const InvalidConfig& e) {
      for (const auto& issue : e.issues()) {
        issues.push_back({"events[" + std::to_string(i) + "].overrides." + issue.field, issue.message});
      }
    }
  }
  if (!issues.empty()) throw scenario::ScenarioError(std::move(issues), scenario.name);

  engine::Engine engine(config, options.seed);
  synth::Synthesizer synth(config.synth);

  SessionTrace trace;
  trace.sample_rate = config.synth.sample_rate;
  trace.block_size = config.synth.block_size;

  const std::size_t frames = scenario.frame_count();
  std::size_t next_frame = 0;
  std::size_t next_event = 0;

  auto process_frame = [&](std::size_t k) {
    engine::FrameInput input;
    input.t = scenario.frame_time(k);
    for (const auto& actor : scenario.actors) {
      if (!actor.present_at(input.t, scenario.duration_s)) continue;
      const auto wp = actor.evaluate(input.t);
      input.actors.push_back({actor.id, actor.mode, wp.pose, wp.p});
    }
    while (next_event < scenario.events.size() &&
           scenario.events[next_event].t <= input.t + kEventEpsilon) {
      const auto& ev = scenario.events[next_event++];
      if (ev.kind == scenario::EventKind::TreatTaken) {
        input.treats.push_back({ev.actor});
      } else {
        engine.apply_overrides(ev.overrides);
        trace.events.push_back({input.t, "config_overrides", format_overrides(ev.overrides)});
      }
    }
    auto out = engine.step(input);
    trace.rows.push_back(TraceRow::from_frame(out));
    trace.events.insert(trace.events.end(), out.log.begin(), out.log.end());
    synth.set_params(out.sound);
  };

  if (options.render_audio) {
    const double sr = static_cast<double>(config.synth.sample_rate);
    const auto block = static_cast<std::size_t>(config.synth.block_size);
    const auto total = static_cast<std::size_t>(std::ceil(scenario.duration_s * sr - kEventEpsilon));
    const std::size_t blocks = (total + block - 1) / block;
    trace.audio.resize(blocks * block);
    for (std::size_t b = 0; b < blocks; ++b) {
      const double block_t = static_cast<double>(b * block) / sr;
      while (next_frame < frames && scenario.frame_time(next_frame) <= block_t) process_frame(next_frame++);
      synth.render(std::span<float>(trace.audio).subspan(b * block, block));
    }
  }
  while (next_frame < frames) process_frame(next_frame++);
  return trace;
}

RenderArtifacts write_artifacts(const SessionTrace& trace, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RenderArtifacts paths{out_dir / "out.wav", out_dir / "trace.csv", out_dir / "events.log",
                        out_dir / "spectrogram.csv"};
  wav::write_wav(trace.audio, trace.sample_rate, paths.wav);
  write_text(paths.trace, format_trace_csv(trace.rows));
  write_text(paths.events, format_event_log(trace.events));
  if (trace.audio.size() >= kSpectrogramWindow) {
    spectral::stft(trace.audio, kSpectrogramWindow, kSpectrogramHop, trace.sample_rate)
        .write_csv(paths.spectrogram, kSpectrogramMaxHz);
  } else {
    write_text(paths.spectrogram, "frame_time,bin_freq,magnitude\n");
  }
  return paths;
}

}  // namespace sonibot
