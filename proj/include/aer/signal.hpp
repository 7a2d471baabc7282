#pragma once

// Time-series container, preprocessing transforms and rolling windows.
//
// Indices exposed to callers (window starts, interval bounds) are 1-based to
// match the usual t_1 ... t_T convention; storage is 0-based.

#include <aer/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aer {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// A T x d multichannel series. Missing samples are NaN until imputed.
struct Signal {
  std::string name;
  std::vector<std::int64_t> timestamps;
  Eigen::MatrixXd values;  // rows = time, cols = channels
  Eigen::Index target = 0;  // 0-based target channel

  Eigen::Index length() const noexcept { return values.rows(); }
  Eigen::Index channels() const noexcept { return values.cols(); }

  Eigen::VectorXd target_values() const { return values.col(target); }

  bool has_missing() const { return values.hasNaN(); }

  void validate() const {
    if (static_cast<Eigen::Index>(timestamps.size()) != values.rows()) {
      throw Error(ErrorKind::Dimension, "signal '" + name + "': " +
                                            std::to_string(timestamps.size()) + " timestamps for " +
                                            std::to_string(values.rows()) + " rows");
    }
    for (std::size_t k = 1; k < timestamps.size(); ++k) {
      if (timestamps[k] <= timestamps[k - 1]) {
        throw Error(ErrorKind::Parse, "signal '" + name + "': timestamps not strictly increasing at row " +
                                          std::to_string(k + 1));
      }
    }
    if (values.cols() > 0 && (target < 0 || target >= values.cols())) {
      throw Error(ErrorKind::Dimension, "signal '" + name + "': target channel out of range");
    }
  }

  /// Rows [begin, begin + count) as a new signal.
  Signal slice(Eigen::Index begin, Eigen::Index count) const {
    Signal out;
    out.name = name;
    out.target = target;
    out.values = values.middleRows(begin, count);
    out.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + begin + count);
    return out;
  }

  /// Univariate signal with timestamps 1..T.
  static Signal univariate(std::vector<double> v, std::string name = "signal") {
    Signal s;
    s.name = std::move(name);
    s.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    s.timestamps.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) s.timestamps[k] = static_cast<std::int64_t>(k + 1);
    return s;
  }
};

/// Inclusive integer range [start, end]. Units are whatever the producer used
/// (1-based indices inside the pipeline, timestamps in label files).
struct LabeledInterval {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool overlaps(const LabeledInterval& o) const noexcept { return start <= o.end && o.start <= end; }
  friend bool operator==(const LabeledInterval&, const LabeledInterval&) = default;
};

// ---------------------------------------------------------------------------
// Detrending

/// Per-channel least-squares line over the 0-based sample position.
struct TrendParams {
  std::vector<double> slope;
  std::vector<double> intercept;

  /// Subtract the line. `offset` shifts positions, used when the fit came from
  /// a prefix and is applied to the full series.
  Signal remove(const Signal& s, Eigen::Index offset = 0) const { return apply(s, offset, -1.0); }
  Signal restore(const Signal& s, Eigen::Index offset = 0) const { return apply(s, offset, 1.0); }

 private:
  Signal apply(const Signal& s, Eigen::Index offset, double sign) const {
    if (static_cast<Eigen::Index>(slope.size()) != s.channels()) {
      throw Error(ErrorKind::Dimension, "trend parameters do not match channel count");
    }
    Signal out = s;
    for (Eigen::Index c = 0; c < s.channels(); ++c) {
      for (Eigen::Index r = 0; r < s.length(); ++r) {
        const double line = slope[c] * static_cast<double>(r + offset) + intercept[c];
        out.values(r, c) = s.values(r, c) + sign * line;
      }
    }
    return out;
  }
};

inline TrendParams fit_trend(const Signal& s) {
  if (s.length() < 2) throw Error(ErrorKind::DegenerateInput, "detrend needs at least 2 samples");
  TrendParams p;
  for (Eigen::Index c = 0; c < s.channels(); ++c) {
    double sx = 0, sy = 0;
    Eigen::Index count = 0;
    for (Eigen::Index r = 0; r < s.length(); ++r) {
      if (is_missing(s.values(r, c))) continue;
      sx += static_cast<double>(r);
      sy += s.values(r, c);
      ++count;
    }
    if (count < 2) {
      throw Error(ErrorKind::DegenerateInput,
                  "detrend needs at least 2 present samples in channel " + std::to_string(c + 1));
    }
    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    double sxy = 0, sxx = 0;
    for (Eigen::Index r = 0; r < s.length(); ++r) {
      if (is_missing(s.values(r, c))) continue;
      const double dx = static_cast<double>(r) - mx;
      sxy += dx * (s.values(r, c) - my);
      sxx += dx * dx;
    }
    const double slope = sxy / sxx;
    p.slope.push_back(slope);
    p.intercept.push_back(my - slope * mx);
  }
  return p;
}

inline std::pair<Signal, TrendParams> detrend(const Signal& s) {
  TrendParams p = fit_trend(s);
  return {p.remove(s), std::move(p)};
}

// ---------------------------------------------------------------------------
// Min-max scaling

struct ScaleParams {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<double> min;
  std::vector<double> max;

  Signal apply(const Signal& s) const {
    check(s);
    Signal out = s;
    for (Eigen::Index c = 0; c < s.channels(); ++c) {
      const double span = max[c] - min[c];
      for (Eigen::Index r = 0; r < s.length(); ++r) {
        const double v = s.values(r, c);
        if (is_missing(v)) continue;
        out.values(r, c) = span > 0 ? lo + (v - min[c]) / span * (hi - lo) : 0.5 * (lo + hi);
      }
    }
    return out;
  }

  /// Constant channels invert to their single observed value.
  Signal invert(const Signal& s) const {
    check(s);
    Signal out = s;
    for (Eigen::Index c = 0; c < s.channels(); ++c) {
      const double span = max[c] - min[c];
      for (Eigen::Index r = 0; r < s.length(); ++r) {
        const double v = s.values(r, c);
        if (is_missing(v)) continue;
        out.values(r, c) = span > 0 ? min[c] + (v - lo) / (hi - lo) * span : min[c];
      }
    }
    return out;
  }

 private:
  void check(const Signal& s) const {
    if (static_cast<Eigen::Index>(min.size()) != s.channels()) {
      throw Error(ErrorKind::Dimension, "scale parameters do not match channel count");
    }
  }
};

inline ScaleParams fit_scale(const Signal& s, double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorKind::Config, "scale range requires lo < hi");
  ScaleParams p{lo, hi, {}, {}};
  for (Eigen::Index c = 0; c < s.channels(); ++c) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (Eigen::Index r = 0; r < s.length(); ++r) {
      const double v = s.values(r, c);
      if (is_missing(v)) continue;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mn > mx) mn = mx = 0.0;  // all missing: leave to imputation
    p.min.push_back(mn);
    p.max.push_back(mx);
  }
  return p;
}

inline std::pair<Signal, ScaleParams> scale_minmax(const Signal& s, double lo, double hi) {
  ScaleParams p = fit_scale(s, lo, hi);
  return {p.apply(s), std::move(p)};
}

// ---------------------------------------------------------------------------
// Imputation

inline Signal impute_mean(const Signal& s) {
  Signal out = s;
  for (Eigen::Index c = 0; c < s.channels(); ++c) {
    double sum = 0;
    Eigen::Index count = 0;
    for (Eigen::Index r = 0; r < s.length(); ++r) {
      if (!is_missing(s.values(r, c))) {
        sum += s.values(r, c);
        ++count;
      }
    }
    if (count == 0 && s.length() > 0) {
      throw Error(ErrorKind::UnimputableChannel, "channel " + std::to_string(c + 1) + " of '" + s.name +
                                                     "' has no observed samples");
    }
    const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
    for (Eigen::Index r = 0; r < s.length(); ++r) {
      if (is_missing(out.values(r, c))) out.values(r, c) = mean;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Windows

/// Overlapping length-n windows with step 1, plus the target values that
/// immediately precede and follow each window.
struct WindowSet {
  Eigen::Index window_size = 0;
  std::vector<Eigen::MatrixXd> windows;        // n x d each
  std::vector<Eigen::Index> start_indices;     // 1-based
  std::vector<std::optional<double>> prev_targets;
  std::vector<std::optional<double>> next_targets;
  // Target-channel truth per window (n values), cached for loss evaluation.
  std::vector<Eigen::VectorXd> targets;

  std::size_t size() const noexcept { return windows.size(); }
  bool empty() const noexcept { return windows.empty(); }

  bool trainable(std::size_t k) const { return prev_targets[k].has_value() && next_targets[k].has_value(); }

  std::vector<std::size_t> trainable_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < size(); ++k) {
      if (trainable(k)) out.push_back(k);
    }
    return out;
  }
};

/// Builds T - n windows starting at i = 1 ... T - n. With `include_tail` the
/// final window i = T - n + 1 (no next target) is appended so every index in
/// [1, T] is covered by at least one window.
inline WindowSet make_windows(const Signal& s, Eigen::Index n, bool include_tail = false) {
  if (n < 1) throw Error(ErrorKind::Config, "window size must be positive");
  const Eigen::Index T = s.length();
  if (T <= n) {
    throw Error(ErrorKind::InsufficientData, "need more than " + std::to_string(n) + " samples, got " +
                                                 std::to_string(T));
  }
  const Eigen::Index count = T - n + (include_tail ? 1 : 0);
  WindowSet ws;
  ws.window_size = n;
  ws.windows.reserve(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    ws.windows.emplace_back(s.values.middleRows(k, n));
    ws.targets.emplace_back(s.values.col(s.target).segment(k, n));
    ws.start_indices.push_back(k + 1);
    ws.prev_targets.push_back(k > 0 ? std::optional<double>(s.values(k - 1, s.target)) : std::nullopt);
    ws.next_targets.push_back(k + n < T ? std::optional<double>(s.values(k + n, s.target)) : std::nullopt);
  }
  return ws;
}

}  // namespace aer
