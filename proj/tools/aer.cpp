// aer: fit, detect, evaluate, bench and synth from the command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
// arguments, 3 file I/O, 4 malformed input, 5 shape mismatch.

#include <aer/aer.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

int exit_code(aer::ErrorKind kind) {
  switch (kind) {
    case aer::ErrorKind::Config: return 2;
    case aer::ErrorKind::Io: return 3;
    case aer::ErrorKind::Parse: return 4;
    case aer::ErrorKind::Dimension: return 5;
    default: return 1;
  }
}

void configure_logging() {
  auto logger = spdlog::stderr_color_st("aer");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("AER_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

aer::LogSink spdlog_sink() {
  return [](aer::LogLevel level, const std::string& msg) {
    switch (level) {
      case aer::LogLevel::Debug: spdlog::debug(msg); break;
      case aer::LogLevel::Info: spdlog::info(msg); break;
      case aer::LogLevel::Warn: spdlog::warn(msg); break;
    }
  };
}

std::vector<aer::Combination> parse_modes(const std::string& list) {
  if (list == "all") return {std::begin(aer::kAllCombinations), std::end(aer::kAllCombinations)};
  std::vector<aer::Combination> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(aer::parse_combination(item));
  if (out.empty()) throw aer::Error(aer::ErrorKind::Config, "--combine needs at least one mode");
  return out;
}

struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string combine;
  std::optional<bool> mask;
  std::optional<bool> bidirectional;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, Common& c, bool scoring_flags) {
  cmd->add_option("--config", c.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the model seed");
  cmd->add_option("--out-dir", c.out_dir, "Directory for written artifacts")->capture_default_str();
  if (!scoring_flags) return;
  cmd->add_flag_callback("--mask", [&c] { c.mask = true; }, "Mask the first m scores (default)");
  cmd->add_flag_callback("--no-mask", [&c] { c.mask = false; }, "Disable start-of-sequence masking");
  cmd->add_flag_callback("--bidirectional", [&c] { c.bidirectional = true; },
                         "Fuse forward and reverse prediction scores (default)");
  cmd->add_flag_callback("--forward-only", [&c] { c.bidirectional = false; }, "Use forward prediction scores only");
}

aer::PipelineConfig resolve(const Common& c, bool single_combination) {
  aer::Overrides o;
  o.seed = c.seed;
  o.mask = c.mask;
  o.bidirectional = c.bidirectional;
  if (single_combination && !c.combine.empty()) o.combination = aer::parse_combination(c.combine);
  return aer::resolve_config(c.config, o);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"AER time-series anomaly detection"};
  app.require_subcommand(1);

  Common common;
  std::string signal_path, checkpoint_path, report_path, labels_path, manifest_path, kind, synth_out;
  std::optional<std::string> eval_json;
  bool plot = false;
  long length = 2000;
  double noise = 0.01;

  auto* fit = app.add_subcommand("fit", "Train a model on a signal CSV and write a checkpoint");
  add_common(fit, common, false);
  fit->add_option("signal", signal_path, "Signal CSV")->required();

  auto* detect = app.add_subcommand("detect", "Score a signal with a checkpoint and report anomalies");
  add_common(detect, common, true);
  detect->add_option("--combine", common.combine, "pred|rec|sum|mult (default from config: mult)");
  detect->add_flag("--plot", plot, "Also write an SVG plot of the scores");
  detect->add_option("signal", signal_path, "Signal CSV")->required();
  detect->add_option("checkpoint", checkpoint_path, "Checkpoint written by fit")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Contextual F1 of a report against labels");
  evaluate->add_option("report", report_path, "Report JSON written by detect")->required();
  evaluate->add_option("labels", labels_path, "Labels JSON")->required();
  evaluate->add_option("--json", eval_json, "Also write the counts as JSON here");

  auto* bench = app.add_subcommand("bench", "Run the pipeline over a manifest of signals");
  add_common(bench, common, true);
  bench->add_option("--combine", common.combine, "Mode, comma-separated modes, or 'all' (default from config)");
  bench->add_option("manifest", manifest_path, "Manifest JSON")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic signal with labels");
  synth->add_option("kind", kind, "point-spike|flat-middle-contextual|collective-level-shift|sine-clean")->required();
  synth->add_option("--length", length, "Number of samples (>= 500)")->capture_default_str();
  synth->add_option("--seed", common.seed, "Random seed (default 0)");
  synth->add_option("--noise", noise, "Gaussian noise standard deviation")->capture_default_str();
  synth->add_option("--out", synth_out, "Output CSV path (default <out-dir>/<kind>.csv)");
  synth->add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) {
      aer::cmd_fit(resolve(common, true), signal_path, common.out_dir, std::cout, spdlog_sink());
    } else if (detect->parsed()) {
      aer::PipelineConfig config = resolve(common, true);
      if (plot) config.plot = true;
      aer::cmd_detect(config, signal_path, checkpoint_path, common.out_dir, std::cout, spdlog_sink());
    } else if (evaluate->parsed()) {
      aer::cmd_evaluate(report_path, labels_path, eval_json, std::cout);
    } else if (bench->parsed()) {
      const aer::PipelineConfig config = resolve(common, false);
      const auto modes = common.combine.empty() ? std::vector<aer::Combination>{config.scoring.combination}
                                                : parse_modes(common.combine);
      aer::cmd_bench(config, manifest_path, modes, common.out_dir, std::cout, spdlog_sink());
    } else if (synth->parsed()) {
      aer::SyntheticOptions opt;
      opt.noise_sigma = noise;
      const auto k = aer::parse_synthetic_kind(kind);
      const std::string out = synth_out.empty() ? common.out_dir + "/" + kind + ".csv" : synth_out;
      aer::cmd_synth(k, length, common.seed.value_or(0), opt, out, std::cout);
    }
  } catch (const aer::Error& e) {
    spdlog::error(e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error(e.what());
    return 1;
  }
  return 0;
}
