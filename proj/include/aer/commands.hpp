#pragma once

// Command implementations behind the `aer` executable. Each command reads
// its inputs, writes its artifacts and reports through the given stream and
// log sink; failures surface as aer::Error.

#include <aer/bench.hpp>
#include <aer/config.hpp>
#include <aer/io.hpp>
#include <aer/pipeline.hpp>

#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace aer {

enum class LogLevel { Debug, Info, Warn };

using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<Combination> combination;
  std::optional<bool> mask;
  std::optional<bool> bidirectional;
  std::optional<bool> plot;

  void apply(PipelineConfig& c) const {
    if (seed) c.model.seed = *seed;
    if (combination) c.scoring.combination = *combination;
    if (mask) c.scoring.mask = *mask;
    if (bidirectional) c.scoring.bidirectional = *bidirectional;
    if (plot) c.plot = *plot;
    c.validate();
  }
};

inline PipelineConfig resolve_config(const std::optional<std::string>& path, const Overrides& overrides) {
  PipelineConfig c = path ? load_pipeline_config(*path) : PipelineConfig{};
  overrides.apply(c);
  return c;
}

namespace detail {

inline void log(const LogSink& sink, LogLevel level, const std::string& msg) {
  if (sink) sink(level, msg);
}

inline std::string out_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

/// Provenance sidecar: the resolved config plus the inputs of a command.
inline void write_run_file(const std::string& path, const std::string& command, const PipelineConfig& config,
                           const json& inputs) {
  json j;
  j["command"] = command;
  j["inputs"] = inputs;
  j["config"] = to_json(config);
  write_file(path, j.dump(2) + "\n");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// fit

struct FitOutcome {
  std::string checkpoint_path;
  double final_loss = 0.0;
};

inline FitOutcome cmd_fit(const PipelineConfig& config, const std::string& signal_path, const std::string& out_dir,
                          std::ostream& out, const LogSink& log = {}) {
  const Signal signal = read_signal_csv(signal_path);
  detail::log(log, LogLevel::Info, "fitting '" + signal.name + "' (" + std::to_string(signal.length()) + " samples, " +
                                       std::to_string(signal.channels()) + " channels)");
  const FitResult fitted = fit(signal, config, [&](int epoch, double loss) {
    detail::log(log, LogLevel::Debug, "epoch " + std::to_string(epoch) + " loss " + format_double(loss));
  });
  FitOutcome res{detail::out_path(out_dir, signal.name + ".ckpt.json"), fitted.loss_history.back()};
  save_checkpoint(res.checkpoint_path, fitted.model, fitted.preprocessor, fitted.loss_history, config);
  detail::write_run_file(detail::out_path(out_dir, signal.name + ".fit.run.json"), "fit", config,
                         {{"signal", signal_path}});
  detail::log(log, LogLevel::Info, "trained in " + format_double(fitted.train_seconds) + " s");
  out << "final loss " << format_double(res.final_loss) << "\n" << "checkpoint " << res.checkpoint_path << "\n";
  return res;
}

// ---------------------------------------------------------------------------
// detect

struct DetectOutcome {
  std::string report_path;
  std::string scores_path;
  std::optional<std::string> plot_path;
  std::vector<ReportEntry> entries;
};

inline DetectOutcome cmd_detect(const PipelineConfig& config, const std::string& signal_path,
                                const std::string& checkpoint_path, const std::string& out_dir, std::ostream& out,
                                const LogSink& log = {}) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  Signal signal = read_signal_csv(signal_path, cp.model.target_channel());
  const ScoreBundle b = score(cp.model, cp.preprocessor, signal, config);
  detail::log(log, LogLevel::Info, "scored '" + signal.name + "' in " + format_double(b.latency_seconds) + " s");

  DetectOutcome res;
  res.entries = report_entries(b.report, signal, b.offset);
  res.report_path = detail::out_path(out_dir, signal.name + ".report.json");
  res.scores_path = detail::out_path(out_dir, signal.name + ".scores.csv");
  detail::write_file(res.report_path, report_to_json(res.entries).dump(2) + "\n");
  detail::write_file(res.scores_path, scores_to_csv({&b.pred, &b.rec, &b.combined}));
  if (config.plot) {
    res.plot_path = detail::out_path(out_dir, signal.name + ".svg");
    detail::write_file(*res.plot_path, scores_to_svg(b.combined, b.report, signal.name));
  }
  detail::write_run_file(detail::out_path(out_dir, signal.name + ".detect.run.json"), "detect", config,
                         {{"signal", signal_path}, {"checkpoint", checkpoint_path}});

  std::size_t kept = 0;
  for (const auto& e : res.entries) kept += e.pruned ? 0 : 1;
  out << kept << " anomalous interval(s), " << (res.entries.size() - kept) << " pruned\n";
  for (const auto& e : res.entries) {
    out << "  [" << e.range.start << ", " << e.range.end << "] peak " << format_double(e.peak)
        << (e.pruned ? " (pruned)" : "") << "\n";
  }
  out << "report " << res.report_path << "\n";
  return res;
}

// ---------------------------------------------------------------------------
// evaluate

inline json eval_to_json(const EvalCounts& e) {
  return {{"tp", e.tp},         {"fp", e.fp}, {"fn", e.fn}, {"precision", e.precision}, {"recall", e.recall},
          {"f1", e.f1},         {"degenerate", e.degenerate}};
}

inline EvalCounts cmd_evaluate(const std::string& report_path, const std::string& labels_path,
                               const std::optional<std::string>& json_out, std::ostream& out) {
  const auto entries = read_report_json(report_path);
  const auto labels = read_labels_json(labels_path);
  std::vector<LabeledInterval> detected;
  for (const auto& e : entries) {
    if (!e.pruned) detected.push_back(e.range);
  }
  const EvalCounts e = contextual_f1(labels, detected);
  out << "tp " << e.tp << " fp " << e.fp << " fn " << e.fn << " precision " << format_double(e.precision)
      << " recall " << format_double(e.recall) << " f1 " << format_double(e.f1)
      << (e.degenerate ? " (no labels and no detections)" : "") << "\n";
  if (json_out) detail::write_file(*json_out, eval_to_json(e).dump(2) + "\n");
  return e;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOutcome {
  std::string signal_path;
  std::string labels_path;
};

/// Writes `<out>` and the labels next to it as `<stem>.labels.json`.
inline SynthOutcome cmd_synth(SyntheticKind kind, Eigen::Index T, std::uint64_t seed, const SyntheticOptions& opt,
                              const std::string& out_path, std::ostream& out) {
  const SyntheticSignal syn = generate_synthetic(kind, T, seed, opt);
  const std::filesystem::path p(out_path);
  SynthOutcome res{out_path, (p.parent_path() / (p.stem().string() + ".labels.json")).string()};
  write_signal_csv(syn.signal, res.signal_path);
  write_labels_json(syn.labels, res.labels_path);
  out << "wrote " << res.signal_path << " (" << T << " samples) and " << res.labels_path << " (" << syn.labels.size()
      << " label(s))\n";
  return res;
}

// ---------------------------------------------------------------------------
// bench

/// Manifest entries are either files ({"signal", "labels"}) or generated
/// signals ({"synthetic", "length", "seed", "noise_sigma"}); both take an
/// optional "dataset" and "name". Relative paths resolve against the
/// manifest's directory.
inline std::vector<BenchSignal> load_manifest(const std::string& path, const LogSink& log = {}) {
  const json j = detail::parse_json_file(path);
  const json* entries = &j;
  if (j.is_object()) {
    detail::reject_unknown(j, "manifest", {"signals"});
    if (!j.contains("signals")) throw Error(ErrorKind::Parse, path + ": manifest object needs a 'signals' array");
    entries = &j["signals"];
  }
  if (!entries->is_array()) throw Error(ErrorKind::Parse, path + ": manifest must list signals in an array");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).string();
  };

  std::vector<BenchSignal> out;
  for (std::size_t k = 0; k < entries->size(); ++k) {
    const json& e = (*entries)[k];
    const std::string where = path + ": entry " + std::to_string(k);
    try {
      if (!e.is_object()) throw Error(ErrorKind::Parse, "not an object");
      detail::reject_unknown(e, "entry",
                             {"dataset", "name", "signal", "labels", "target_channel", "synthetic", "length", "seed",
                              "noise_sigma"});
      BenchSignal item;
      item.dataset = e.value("dataset", std::string("default"));
      if (e.contains("synthetic")) {
        const SyntheticKind kind = parse_synthetic_kind(e["synthetic"].get<std::string>());
        SyntheticOptions opt;
        opt.noise_sigma = e.value("noise_sigma", opt.noise_sigma);
        SyntheticSignal syn = generate_synthetic(kind, e.value("length", Eigen::Index{2000}),
                                                 e.value("seed", std::uint64_t{0}), opt);
        item.signal = std::move(syn.signal);
        item.labels = std::move(syn.labels);
      } else if (e.contains("signal")) {
        const auto target = e.value("target_channel", Eigen::Index{1}) - 1;
        item.signal = read_signal_csv(resolve(e["signal"].get<std::string>()), target);
        if (e.contains("labels")) item.labels = read_labels_json(resolve(e["labels"].get<std::string>()));
      } else {
        throw Error(ErrorKind::Parse, "needs either 'signal' or 'synthetic'");
      }
      if (e.contains("name")) item.signal.name = e["name"].get<std::string>();
      out.push_back(std::move(item));
    } catch (const std::exception& ex) {
      detail::log(log, LogLevel::Warn, where + " skipped: " + ex.what());
    }
  }
  return out;
}

inline std::string results_to_csv(const std::vector<BenchRun>& runs) {
  std::string out = "dataset,signal,combination,f1,precision,recall,tp,fp,fn,train_s,latency_s\n";
  for (const auto& r : runs) {
    std::ostringstream row;
    row << r.dataset << ',' << r.signal << ',' << to_string(r.combination) << ',' << format_double(r.counts.f1) << ','
        << format_double(r.counts.precision) << ',' << format_double(r.counts.recall) << ',' << r.counts.tp << ','
        << r.counts.fp << ',' << r.counts.fn << ',' << std::fixed << std::setprecision(3) << r.train_seconds << ','
        << r.latency_seconds << '\n';
    out += row.str();
  }
  return out;
}

/// Aligned plain-text summary, one row per (dataset, combination).
inline std::string summary_table(const std::vector<AggregateRow>& rows) {
  std::vector<std::vector<std::string>> cells = {
      {"dataset", "combination", "signals", "mean_f1", "pooled_f1", "tp", "fp", "fn", "train_s", "latency_s"}};
  auto fixed = [](double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  for (const auto& r : rows) {
    cells.push_back({r.dataset, std::string(to_string(r.combination)), std::to_string(r.signals), fixed(r.mean_f1, 3),
                     fixed(r.pooled.f1, 3), std::to_string(r.pooled.tp), std::to_string(r.pooled.fp),
                     std::to_string(r.pooled.fn), fixed(r.train_seconds, 2), fixed(r.latency_seconds, 2)});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      if (c < 2) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

struct BenchOutcome {
  std::string results_path;
  BenchResult result;
};

inline BenchOutcome cmd_bench(const PipelineConfig& config, const std::string& manifest_path,
                              const std::vector<Combination>& modes, const std::string& out_dir, std::ostream& out,
                              const LogSink& log = {}) {
  const std::vector<BenchSignal> signals = load_manifest(manifest_path, log);
  detail::log(log, LogLevel::Info, std::to_string(signals.size()) + " signal(s) in manifest");
  BenchOutcome res{detail::out_path(out_dir, "results.csv"),
                   run_benchmark(signals, config, modes, [&](const std::string& m) {
                     detail::log(log, LogLevel::Info, m);
                   })};
  for (const auto& f : res.result.failures) {
    detail::log(log, LogLevel::Warn, f.dataset + "/" + f.signal + " excluded: " + f.message);
  }
  detail::write_file(res.results_path, results_to_csv(res.result.runs));
  json modes_json = json::array();
  for (auto m : modes) modes_json.push_back(std::string(to_string(m)));
  detail::write_run_file(detail::out_path(out_dir, "bench.run.json"), "bench", config,
                         {{"manifest", manifest_path}, {"combinations", modes_json}});
  out << summary_table(aggregate(res.result.runs));
  out << "results " << res.results_path << "\n";
  return res;
}

}  // namespace aer
