#pragma once

// Evaluation and benchmarking: overlap-based contextual F1, synthetic signals
// with injected anomalies, and a runner that trains once per signal and
// scores every requested combination mode.

#include <aer/detector.hpp>
#include <aer/error.hpp>
#include <aer/pipeline.hpp>
#include <aer/signal.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace aer {

struct EvalCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // neither labels nor detections

  static EvalCounts from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    EvalCounts e{tp, fp, fn};
    e.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    e.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    e.f1 = e.precision + e.recall > 0 ? 2.0 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
    e.degenerate = tp + fp + fn == 0;
    return e;
  }
};

/// A truth interval counts once as TP if any detection overlaps it, else as
/// FN; a detection overlapping no truth interval is an FP.
inline EvalCounts contextual_f1(const std::vector<LabeledInterval>& truth,
                                const std::vector<LabeledInterval>& detected) {
  std::int64_t tp = 0, fn = 0, fp = 0;
  for (const auto& t : truth) {
    bool hit = false;
    for (const auto& d : detected) hit = hit || t.overlaps(d);
    hit ? ++tp : ++fn;
  }
  for (const auto& d : detected) {
    bool hit = false;
    for (const auto& t : truth) hit = hit || d.overlaps(t);
    if (!hit) ++fp;
  }
  return EvalCounts::from_counts(tp, fp, fn);
}

/// Kept (unpruned) detections only.
inline EvalCounts contextual_f1(const std::vector<LabeledInterval>& truth, const AnomalyReport& report) {
  std::vector<LabeledInterval> detected;
  for (const auto& iv : report.kept()) detected.push_back(iv.range());
  return contextual_f1(truth, detected);
}

// ---------------------------------------------------------------------------
// Synthetic signals

enum class SyntheticKind { PointSpike, FlatMiddle, LevelShift, SineClean };

constexpr std::string_view to_string(SyntheticKind k) noexcept {
  switch (k) {
    case SyntheticKind::PointSpike: return "point-spike";
    case SyntheticKind::FlatMiddle: return "flat-middle-contextual";
    case SyntheticKind::LevelShift: return "collective-level-shift";
    case SyntheticKind::SineClean: return "sine-clean";
  }
  return "unknown";
}

inline constexpr SyntheticKind kAllSyntheticKinds[] = {SyntheticKind::PointSpike, SyntheticKind::FlatMiddle,
                                                       SyntheticKind::LevelShift, SyntheticKind::SineClean};

inline SyntheticKind parse_synthetic_kind(std::string_view s) {
  for (auto k : kAllSyntheticKinds) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::Config, "unknown synthetic kind '" + std::string(s) +
                                     "' (expected point-spike|flat-middle-contextual|collective-level-shift|sine-clean)");
}

struct SyntheticSignal {
  Signal signal;
  std::vector<LabeledInterval> labels;
};

struct SyntheticOptions {
  double noise_sigma = 0.01;
  int spikes = 3;
  double spike_sigmas = 8.0;  // spike magnitude in units of noise_sigma
  double level_shift = 0.5;
};

/// Unit-amplitude sine with period T/20 plus Gaussian noise, with one family
/// of anomalies injected. Labels are 1-based inclusive index ranges, which
/// coincide with the generated timestamps 1..T.
inline SyntheticSignal generate_synthetic(SyntheticKind kind, Eigen::Index T, std::uint64_t seed,
                                          const SyntheticOptions& opt = {}) {
  if (T < 500) throw Error(ErrorKind::Config, "synthetic signals need T >= 500, got " + std::to_string(T));
  if (!(opt.noise_sigma >= 0.0)) throw Error(ErrorKind::Config, "noise_sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double period = static_cast<double>(T) / 20.0;
  std::vector<double> v(static_cast<std::size_t>(T));
  for (Eigen::Index i = 0; i < T; ++i) {
    v[static_cast<std::size_t>(i)] =
        std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period) + opt.noise_sigma * noise(rng);
  }

  SyntheticSignal out;
  switch (kind) {
    case SyntheticKind::PointSpike: {
      const auto lo = static_cast<Eigen::Index>(std::ceil(0.05 * static_cast<double>(T)));
      const auto hi = static_cast<Eigen::Index>(std::floor(0.95 * static_cast<double>(T)));
      const Eigen::Index min_gap = T / 10;
      std::uniform_int_distribution<Eigen::Index> pos(lo, hi);
      std::bernoulli_distribution sign(0.5);
      std::vector<Eigen::Index> chosen;
      while (static_cast<int>(chosen.size()) < opt.spikes) {
        const Eigen::Index p = pos(rng);
        bool ok = true;
        for (auto c : chosen) ok = ok && std::abs(c - p) >= min_gap;
        if (ok) chosen.push_back(p);
      }
      std::sort(chosen.begin(), chosen.end());
      for (auto p : chosen) {
        const double mag = opt.spike_sigmas * opt.noise_sigma;
        v[static_cast<std::size_t>(p - 1)] += sign(rng) ? mag : -mag;
        out.labels.push_back({p, p});
      }
      break;
    }
    case SyntheticKind::FlatMiddle: {
      const Eigen::Index len = T / 10;
      const Eigen::Index start = T / 2 - T / 20 + 1;  // 1-based
      double mean = 0.0;
      for (Eigen::Index i = start; i < start + len; ++i) mean += v[static_cast<std::size_t>(i - 1)];
      mean /= static_cast<double>(len);
      for (Eigen::Index i = start; i < start + len; ++i) v[static_cast<std::size_t>(i - 1)] = mean;
      out.labels.push_back({start, start + len - 1});
      break;
    }
    case SyntheticKind::LevelShift: {
      const Eigen::Index len = T / 20;
      std::uniform_int_distribution<Eigen::Index> pos(T / 5, 4 * T / 5 - len + 1);
      const Eigen::Index start = pos(rng);
      for (Eigen::Index i = start; i < start + len; ++i) v[static_cast<std::size_t>(i - 1)] += opt.level_shift;
      out.labels.push_back({start, start + len - 1});
      break;
    }
    case SyntheticKind::SineClean: break;
  }
  out.signal = Signal::univariate(std::move(v), std::string(to_string(kind)));
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark runner

struct BenchSignal {
  std::string dataset;
  Signal signal;
  std::vector<LabeledInterval> labels;  // in timestamp units
};

struct BenchRun {
  std::string dataset;
  std::string signal;
  Combination combination = Combination::Mult;
  EvalCounts counts;
  double train_seconds = 0.0;
  double latency_seconds = 0.0;
};

struct BenchFailure {
  std::string dataset;
  std::string signal;
  std::string message;
};

struct BenchResult {
  std::vector<BenchRun> runs;
  std::vector<BenchFailure> failures;
};

using BenchProgress = std::function<void(const std::string& message)>;

/// Trains once per signal and evaluates each requested combination on the
/// same scores. A failing signal is recorded and skipped.
inline BenchResult run_benchmark(const std::vector<BenchSignal>& signals, const PipelineConfig& config,
                                 const std::vector<Combination>& modes, const BenchProgress& progress = {}) {
  BenchResult result;
  for (const auto& item : signals) {
    try {
      const FitResult fitted = fit(item.signal, config);
      ScoreBundle bundle = score(fitted.model, fitted.preprocessor, item.signal, config);
      const double base_latency = bundle.latency_seconds;
      for (Combination mode : modes) {
        const auto t0 = std::chrono::steady_clock::now();
        FusionConfig fusion = config.scoring;
        fusion.combination = mode;
        recombine(bundle, fusion, config.detector);
        std::vector<LabeledInterval> detected;
        for (const auto& iv : bundle.report.kept()) detected.push_back(to_timestamps(iv, item.signal, bundle.offset));
        BenchRun run{item.dataset, item.signal.name, mode, contextual_f1(item.labels, detected),
                     fitted.train_seconds, base_latency + seconds_since(t0)};
        if (progress) {
          progress(item.dataset + "/" + item.signal.name + " " + std::string(to_string(mode)) +
                   " f1=" + std::to_string(run.counts.f1));
        }
        result.runs.push_back(std::move(run));
      }
    } catch (const std::exception& e) {
      result.failures.push_back({item.dataset, item.signal.name, e.what()});
      if (progress) progress("failed " + item.dataset + "/" + item.signal.name + ": " + e.what());
    }
  }
  return result;
}

struct AggregateRow {
  std::string dataset;
  Combination combination = Combination::Mult;
  std::size_t signals = 0;
  double mean_f1 = 0.0;    // unweighted mean of per-signal F1
  EvalCounts pooled;       // F1 from summed TP/FP/FN
  double train_seconds = 0.0;
  double latency_seconds = 0.0;
};

/// Groups runs by (dataset, combination) in first-seen order.
inline std::vector<AggregateRow> aggregate(const std::vector<BenchRun>& runs) {
  std::vector<AggregateRow> rows;
  std::map<std::pair<std::string, Combination>, std::size_t> index;
  std::vector<EvalCounts> sums;
  for (const auto& r : runs) {
    auto [it, inserted] = index.try_emplace({r.dataset, r.combination}, rows.size());
    if (inserted) {
      AggregateRow fresh;
      fresh.dataset = r.dataset;
      fresh.combination = r.combination;
      rows.push_back(std::move(fresh));
      sums.emplace_back();
    }
    AggregateRow& row = rows[it->second];
    EvalCounts& s = sums[it->second];
    ++row.signals;
    row.mean_f1 += r.counts.f1;
    row.train_seconds += r.train_seconds;
    row.latency_seconds += r.latency_seconds;
    s.tp += r.counts.tp;
    s.fp += r.counts.fp;
    s.fn += r.counts.fn;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto count = static_cast<double>(rows[k].signals);
    rows[k].mean_f1 /= count;
    rows[k].train_seconds /= count;
    rows[k].latency_seconds /= count;
    rows[k].pooled = EvalCounts::from_counts(sums[k].tp, sums[k].fp, sums[k].fn);
  }
  return rows;
}

}  // namespace aer
