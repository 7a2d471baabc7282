#pragma once

// End-to-end composition: preprocess -> train -> score -> detect.

#include <aer/config.hpp>
#include <aer/detector.hpp>
#include <aer/model.hpp>
#include <aer/scoring.hpp>
#include <aer/signal.hpp>

#include <chrono>
#include <optional>
#include <span>
#include <vector>

namespace aer {

/// Preprocessing parameters fitted on the training prefix.
struct Preprocessor {
  std::optional<TrendParams> trend;
  ScaleParams scale;
  Eigen::Index train_length = 0;  // rows used for fitting and training

  /// Detrend (positions continue past the training prefix), scale, impute.
  Signal apply(const Signal& s, Eigen::Index offset = 0) const {
    Signal out = trend ? trend->remove(s, offset) : s;
    return impute_mean(scale.apply(out));
  }
};

inline Eigen::Index train_length(Eigen::Index T, const PreprocessConfig& config) {
  if (config.split_fraction <= 0.0) return T;
  return static_cast<Eigen::Index>(std::floor((1.0 - config.split_fraction) * static_cast<double>(T)));
}

inline Preprocessor fit_preprocessor(const Signal& s, const PreprocessConfig& config) {
  config.validate();
  Preprocessor p;
  p.train_length = train_length(s.length(), config);
  const Signal prefix = s.slice(0, p.train_length);
  Signal work = prefix;
  if (config.detrend) {
    p.trend = fit_trend(prefix);
    work = p.trend->remove(prefix);
  }
  p.scale = fit_scale(work, config.scale_lo, config.scale_hi);
  return p;
}

struct FitResult {
  AerModel model;
  Preprocessor preprocessor;
  std::vector<double> loss_history;
  double train_seconds = 0.0;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline FitResult fit(const Signal& signal, const PipelineConfig& config, const EpochCallback& on_epoch = {}) {
  config.validate();
  signal.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Preprocessor pre = fit_preprocessor(signal, config.preprocess);
  const Signal prepared = pre.apply(signal.slice(0, pre.train_length));
  const WindowSet windows = make_windows(prepared, config.model.window_size);
  TrainResult tr = train(windows, config.model, signal.target, on_epoch);
  return {std::move(tr.model), std::move(pre), std::move(tr.loss_history), seconds_since(t0)};
}

/// Every intermediate score series of one scoring pass, in the 1-based index
/// frame of the scored segment.
struct ScoreBundle {
  Eigen::Index offset = 0;  // rows of the input signal preceding the scored segment
  std::vector<double> truth;
  std::vector<double> reconstruction;
  ScoreSeries forward;    // smoothed, masked
  ScoreSeries reverse;    // smoothed, masked
  ScoreSeries pred;       // fused (or forward-only) prediction scores
  ScoreSeries rec;        // smoothed, masked reconstruction scores
  ScoreSeries combined;
  AnomalyReport report;
  double latency_seconds = 0.0;
};

/// Prediction and reconstruction scores from raw model outputs; also used
/// directly by tests to score synthetic outputs.
inline ScoreBundle score_outputs(std::vector<double> truth, const std::vector<ModelOutput>& outputs, Eigen::Index n,
                                 const FusionConfig& fusion) {
  fusion.validate();
  const auto T = static_cast<Eigen::Index>(truth.size());
  const Eigen::Index W = fusion.resolved_smoothing(T);
  const Eigen::Index m = fusion.resolved_mask(T);
  const std::span<const double> t(truth);

  ScoreBundle b;
  b.forward = ewma_smooth(forecast_scores(t, collect_forecasts(outputs, T, Direction::Forward), n, Direction::Forward), W);
  if (fusion.bidirectional) {
    b.reverse =
        ewma_smooth(forecast_scores(t, collect_forecasts(outputs, T, Direction::Reverse), n, Direction::Reverse), W);
    if (m > 0) {
      b.forward = mask_scores(b.forward, m, 0.0);
      b.reverse = mask_scores(b.reverse, m);
    }
    b.pred = fill_invalid(bidirectional_fuse(b.forward, b.reverse, n, m));
  } else {
    b.reverse = ScoreSeries(truth.size(), ScoreKind::PredReverse);
    if (m > 0) b.forward = mask_scores(b.forward, m);
    b.pred = fill_invalid(b.forward);
  }

  b.reconstruction = aggregate_reconstructions(outputs, T);
  const std::span<const double> y(b.reconstruction);
  ScoreSeries rec_raw;
  switch (fusion.rec_method) {
    case RecMethod::Pd: rec_raw = rec_scores_pd(t, y); break;
    case RecMethod::Ad: rec_raw = rec_scores_ad(t, y, fusion.dtw_half_window); break;
    case RecMethod::Dtw: rec_raw = rec_scores_dtw(t, y, fusion.dtw_half_window); break;
  }
  b.rec = mask_scores(ewma_smooth(rec_raw, W), m);
  b.combined = combine_scores(b.pred, b.rec, fusion);
  b.truth = std::move(truth);
  return b;
}

/// Re-runs only the combination and detection stages for another mode.
inline void recombine(ScoreBundle& b, const FusionConfig& fusion, const DetectorConfig& detector) {
  b.combined = combine_scores(b.pred, b.rec, fusion);
  b.report = detect(b.combined, detector);
}

/// Scores the held-out suffix when a split is configured, the whole signal
/// otherwise.
inline ScoreBundle score(const AerModel& model, const Preprocessor& pre, const Signal& signal,
                         const PipelineConfig& config) {
  config.validate();
  signal.validate();
  if (signal.channels() != model.channels()) {
    throw Error(ErrorKind::Dimension, "signal has " + std::to_string(signal.channels()) +
                                          " channels, model expects " + std::to_string(model.channels()));
  }
  if (model.window_size() != config.model.window_size) {
    throw Error(ErrorKind::Dimension, "checkpoint window size " + std::to_string(model.window_size()) +
                                          " differs from configured " + std::to_string(config.model.window_size));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index offset = pre.train_length < signal.length() ? pre.train_length : 0;
  const Signal segment = pre.apply(signal.slice(offset, signal.length() - offset), offset);
  const WindowSet windows = make_windows(segment, model.window_size(), true);
  const std::vector<ModelOutput> outputs = predict_all(model, windows);
  const Eigen::VectorXd target = segment.target_values();
  ScoreBundle b = score_outputs(std::vector<double>(target.data(), target.data() + target.size()), outputs,
                                model.window_size(), config.scoring);
  b.offset = offset;
  b.report = detect(b.combined, config.detector);
  b.latency_seconds = seconds_since(t0);
  return b;
}

/// Maps an interval in the scored frame back to signal timestamps.
inline LabeledInterval to_timestamps(const DetectedInterval& iv, const Signal& signal, Eigen::Index offset) {
  return {signal.timestamps[static_cast<std::size_t>(offset + iv.start - 1)],
          signal.timestamps[static_cast<std::size_t>(offset + iv.end - 1)]};
}

}  // namespace aer
