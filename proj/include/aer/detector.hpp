#pragma once

// Locally adaptive thresholding over sliding windows, interval merging and
// peak-based pruning.

#include <aer/error.hpp>
#include <aer/scoring.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

namespace aer {

/// Unset sizes resolve against T: window ceil(T/3), step ceil(T/30).
struct DetectorConfig {
  std::optional<Eigen::Index> window_size;
  std::optional<Eigen::Index> step_size;
  double z = 4.0;
  double theta = 0.13;

  Eigen::Index resolved_window(Eigen::Index T) const {
    return window_size ? *window_size : std::max<Eigen::Index>(2, (T + 2) / 3);
  }
  Eigen::Index resolved_step(Eigen::Index T) const {
    const Eigen::Index s = step_size ? *step_size : std::max<Eigen::Index>(1, (T + 29) / 30);
    return std::min(s, resolved_window(T));
  }

  void validate() const {
    if (window_size && *window_size < 2) throw Error(ErrorKind::Config, "detector window_size must be >= 2");
    if (step_size && *step_size < 1) throw Error(ErrorKind::Config, "detector step_size must be >= 1");
    if (window_size && step_size && *step_size > *window_size) {
      throw Error(ErrorKind::Config, "detector step_size must not exceed window_size");
    }
    if (!(z > 0.0)) throw Error(ErrorKind::Config, "detector z must be positive");
    if (!(theta >= 0.0 && theta < 1.0)) throw Error(ErrorKind::Config, "detector theta must lie in [0, 1)");
  }
};

struct DetectedInterval {
  Eigen::Index start = 0;  // 1-based, inclusive
  Eigen::Index end = 0;
  double peak_score = 0.0;
  bool pruned = false;

  LabeledInterval range() const { return {start, end}; }
  friend bool operator==(const DetectedInterval&, const DetectedInterval&) = default;
};

struct AnomalyReport {
  std::vector<DetectedInterval> intervals;  // sorted by start, pruned ones included

  std::vector<DetectedInterval> kept() const {
    std::vector<DetectedInterval> out;
    for (const auto& iv : intervals) {
      if (!iv.pruned) out.push_back(iv);
    }
    return out;
  }
};

/// Merges runs of flagged indices into intervals carrying their peak score.
inline std::vector<DetectedInterval> merge_flags(const std::vector<bool>& flags, const std::vector<double>& scores) {
  std::vector<DetectedInterval> out;
  const auto T = static_cast<Eigen::Index>(flags.size());
  for (Eigen::Index i = 0; i < T;) {
    if (!flags[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    DetectedInterval iv{i + 1, i + 1, scores[static_cast<std::size_t>(i)], false};
    while (i + 1 < T && flags[static_cast<std::size_t>(i + 1)]) {
      ++i;
      iv.end = i + 1;
      iv.peak_score = std::max(iv.peak_score, scores[static_cast<std::size_t>(i)]);
    }
    out.push_back(iv);
    ++i;
  }
  return out;
}

/// Windows [start, start + w - 1] for start = 1, 1 + s, ..., truncated at T;
/// the sweep stops after the first window reaching T.
inline std::vector<LabeledInterval> threshold_windows(Eigen::Index T, Eigen::Index w, Eigen::Index s) {
  std::vector<LabeledInterval> out;
  if (T < 1) return out;
  for (Eigen::Index start = 1;; start += s) {
    const Eigen::Index end = std::min(start + w - 1, T);
    out.push_back({start, end});
    if (end == T) break;
  }
  return out;
}

/// Flags every index whose score strictly exceeds mean + z * std (population)
/// of some window containing it, then merges consecutive flags.
inline std::vector<DetectedInterval> adaptive_threshold(const ScoreSeries& scores, const DetectorConfig& config) {
  config.validate();
  if (!scores.fully_valid()) throw Error(ErrorKind::Coverage, "thresholding needs a fully valid score series");
  const auto T = static_cast<Eigen::Index>(scores.size());
  std::vector<bool> flags(scores.size(), false);
  for (const auto& win : threshold_windows(T, config.resolved_window(T), config.resolved_step(T))) {
    const auto first = scores.scores.begin() + (win.start - 1);
    const auto last = scores.scores.begin() + win.end;
    const auto count = static_cast<double>(win.end - win.start + 1);
    const double mean = std::accumulate(first, last, 0.0) / count;
    double var = 0.0;
    for (auto it = first; it != last; ++it) var += (*it - mean) * (*it - mean);
    const double threshold = mean + config.z * std::sqrt(var / count);
    for (auto i = win.start; i <= win.end; ++i) {
      if (scores.scores[static_cast<std::size_t>(i - 1)] > threshold) flags[static_cast<std::size_t>(i - 1)] = true;
    }
  }
  return merge_flags(flags, scores.scores);
}

/// Sorts peaks in descending order (stable by start). The interval whose drop
/// to its successor does not exceed theta is pruned together with everything
/// ranked below it; the top-ranked interval is always kept.
inline std::vector<DetectedInterval> prune_intervals(std::vector<DetectedInterval> intervals, double theta) {
  if (intervals.size() < 2) return intervals;
  std::vector<std::size_t> order(intervals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (intervals[a].peak_score != intervals[b].peak_score) return intervals[a].peak_score > intervals[b].peak_score;
    return intervals[a].start < intervals[b].start;
  });
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    const double hi = intervals[order[j]].peak_score;
    const double lo = intervals[order[j + 1]].peak_score;
    const double drop = hi != 0.0 ? (hi - lo) / hi : 0.0;
    if (drop <= theta) {
      for (std::size_t k = std::max<std::size_t>(j, 1); k < order.size(); ++k) intervals[order[k]].pruned = true;
      break;
    }
  }
  return intervals;
}

inline AnomalyReport detect(const ScoreSeries& scores, const DetectorConfig& config) {
  return {prune_intervals(adaptive_threshold(scores, config), config.theta)};
}

}  // namespace aer
