// sonibot command line: offline render, config check, live service.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sonibot/config.hpp"
#include "sonibot/scenario.hpp"
#include "sonibot/session.hpp"
#include "sonibot_tools/live_service.hpp"

namespace {

using namespace sonibot;

constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 3;

ResolvedConfig config_or_defaults(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

int cmd_render(const std::string& scenario_arg, const std::string& config_path, const std::string& out_dir,
               std::uint64_t seed) {
  const auto config = config_or_defaults(config_path);
  const auto scenario = scenario::resolve_scenario(scenario_arg);
  const auto trace = run_scenario(scenario, config.config, {seed, true});
  const auto paths = write_artifacts(trace, out_dir);
  std::cout << "rendered " << scenario.name << " (" << scenario.duration_s << " s, " << trace.rows.size()
            << " frames)\n"
            << "  " << paths.wav.string() << "\n"
            << "  " << paths.trace.string() << "\n"
            << "  " << paths.events.string() << "\n"
            << "  " << paths.spectrogram.string() << "\n";
  return 0;
}

int cmd_check(const std::string& config_path, bool print_json) {
  ConfigParse parse;
  if (config_path.empty()) {
    parse.resolved = default_config();
    parse.issues = parse.resolved.config.validate();
  } else {
    parse = read_config(config_path);
  }
  if (print_json && parse.ok()) {
    std::cout << serialize_config(parse.resolved.config);
    return 0;
  }
  std::cout << config_report(parse);
  return parse.ok() ? 0 : kExitInvalid;
}

int cmd_scenarios(const std::string& export_dir) {
  for (const auto& name : scenario::bundled_scenario_names()) {
    const auto s = scenario::bundled_scenario(name);
    std::cout << name << "  " << s->duration_s << " s, " << s->actors.size() << " actor(s)\n";
    if (export_dir.empty()) continue;
    std::filesystem::create_directories(export_dir);
    const auto path = std::filesystem::path(export_dir) / (name + ".json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << scenario::serialize_scenario(*s);
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  return 0;
}

int cmd_serve(const std::string& config_path, service::ServiceOptions options) {
  const auto config = config_or_defaults(config_path);
  service::LiveService live(config.config, options);
  const auto port = live.start();
  // stdout may carry PCM; status goes to stderr.
  std::cerr << "sonibot: serving ws://" << options.host << ":" << port << " at "
            << config.config.control_rate_hz * options.speed << " frames/s\n";
  live.wait();
  live.stop();
  std::cerr << "sonibot: stopped after " << live.frames_sent() << " frames\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intention-driven sonification engine for a treat-offering robot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sonibot 0.3.0");

  std::string scenario_arg, config_path, out_dir = "out", export_dir;
  std::uint64_t seed = 0;

  auto* render = app.add_subcommand("render", "Run a scenario offline; write WAV, trace, events, spectrogram");
  render->add_option("scenario", scenario_arg, "Scenario file or bundled scenario name")->required();
  render->add_option("--config", config_path, "Engine config file (defaults if omitted)");
  render->add_option("--out", out_dir, "Output directory")->capture_default_str();
  render->add_option("--seed", seed, "Seed for optional raw_p noise");

  service::ServiceOptions serve_options;
  double duration = 0.0;
  std::string record_dir, audio_out;
  bool pcm_stdout = false;
  auto* serve = app.add_subcommand("serve", "Run live and stream frames over WebSocket");
  serve->add_option("--config", config_path, "Engine config file (defaults if omitted)");
  serve->add_option("--host", serve_options.host, "Listen address")->capture_default_str();
  serve->add_option("--port", serve_options.port, "Listen port, 0 for ephemeral")->capture_default_str();
  serve->add_option("--speed", serve_options.speed, "Wall-clock speed multiplier")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--duration", duration, "Stop after this many session seconds")->check(CLI::PositiveNumber);
  serve->add_option("--record", record_dir, "Write steer log, replay scenario, trace and events here on exit");
  auto* wav_opt = serve->add_option("--audio-out", audio_out, "Write the rendered audio to this WAV file");
  serve->add_flag("--pcm-stdout", pcm_stdout, "Stream 16-bit mono PCM to stdout")->excludes(wav_opt);
  serve->add_option("--seed", serve_options.seed, "Seed for optional raw_p noise");

  auto* check = app.add_subcommand("check", "Validate a config file and print it with provenance");
  bool print_json = false;
  check->add_option("config", config_path, "Config file (defaults if omitted)");
  check->add_flag("--print", print_json, "Print the resolved config as a complete config file instead");

  auto* list = app.add_subcommand("scenarios", "List bundled scenarios");
  list->add_option("--export", export_dir, "Write each bundled scenario as JSON into this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*render) return cmd_render(scenario_arg, config_path, out_dir, seed);
    if (*check) return cmd_check(config_path, print_json);
    if (*list) return cmd_scenarios(export_dir);
    if (*serve) {
      if (duration > 0.0) serve_options.duration_s = duration;
      if (!record_dir.empty()) serve_options.record_dir = record_dir;
      if (pcm_stdout) serve_options.audio = service::AudioSink::PcmStdout;
      if (!audio_out.empty()) {
        serve_options.audio = service::AudioSink::WavFile;
        serve_options.audio_path = audio_out;
      }
      serve_options.handle_signals = true;
      return cmd_serve(config_path, serve_options);
    }
  } catch (const ConfigError& e) {
    std::cerr << "sonibot: invalid config\n" << e.what() << "\n";
    return kExitInvalid;
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "sonibot: invalid scenario\n" << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "sonibot: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
