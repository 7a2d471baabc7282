#pragma once

// Anomaly scores from model outputs: one-step prediction errors, median
// reconstruction with point-wise / area / DTW discrepancies, EWMA smoothing,
// start-of-sequence masking, bi-directional fusion and score combination.

#include <aer/error.hpp>
#include <aer/model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aer {

enum class ScoreKind { PredForward, PredReverse, RecPd, RecAd, RecDtw, Bidirectional, Combined };

constexpr std::string_view to_string(ScoreKind k) noexcept {
  switch (k) {
    case ScoreKind::PredForward: return "pred_forward";
    case ScoreKind::PredReverse: return "pred_reverse";
    case ScoreKind::RecPd: return "rec_pd";
    case ScoreKind::RecAd: return "rec_ad";
    case ScoreKind::RecDtw: return "rec_dtw";
    case ScoreKind::Bidirectional: return "bidirectional";
    case ScoreKind::Combined: return "combined";
  }
  return "unknown";
}

/// Per-index scores over [1, T]. Invalid positions hold 0.
struct ScoreSeries {
  std::vector<double> scores;
  std::vector<bool> valid;
  ScoreKind kind = ScoreKind::Combined;

  ScoreSeries() = default;
  ScoreSeries(std::size_t length, ScoreKind k) : scores(length, 0.0), valid(length, false), kind(k) {}

  /// Fully valid series from raw values.
  static ScoreSeries dense(std::vector<double> values, ScoreKind k = ScoreKind::Combined) {
    ScoreSeries s;
    s.valid.assign(values.size(), true);
    s.scores = std::move(values);
    s.kind = k;
    return s;
  }

  std::size_t size() const noexcept { return scores.size(); }

  bool fully_valid() const { return std::all_of(valid.begin(), valid.end(), [](bool v) { return v; }); }

  std::size_t valid_count() const { return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true)); }

  std::optional<double> min_valid() const {
    std::optional<double> m;
    for (std::size_t i = 0; i < size(); ++i) {
      if (valid[i] && (!m || scores[i] < *m)) m = scores[i];
    }
    return m;
  }

  std::optional<double> max_valid() const {
    std::optional<double> m;
    for (std::size_t i = 0; i < size(); ++i) {
      if (valid[i] && (!m || scores[i] > *m)) m = scores[i];
    }
    return m;
  }
};

/// Marks every position valid, writing `value` where no score was defined.
inline ScoreSeries fill_invalid(ScoreSeries s, double value = 0.0) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.valid[i]) {
      s.scores[i] = value;
      s.valid[i] = true;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Prediction-based scores

enum class Direction { Forward, Reverse };

/// One-step forecasts for the contiguous 1-based index range
/// [first, first + values.size() - 1].
struct AlignedForecasts {
  Eigen::Index first = 1;
  std::vector<double> values;
};

/// Forward forecasts land on i + n, reverse forecasts on i - 1; forecasts
/// falling outside [1, T] are dropped.
inline AlignedForecasts collect_forecasts(const std::vector<ModelOutput>& outputs, Eigen::Index T, Direction dir) {
  AlignedForecasts af;
  bool started = false;
  Eigen::Index expect = 0;
  for (const auto& o : outputs) {
    const Eigen::Index n = o.reconstruction.size();
    const Eigen::Index at = dir == Direction::Forward ? o.start + n : o.start - 1;
    if (at < 1 || at > T) continue;
    if (!started) {
      af.first = at;
      expect = at;
      started = true;
    }
    if (at != expect) throw Error(ErrorKind::Alignment, "model outputs are not contiguous in window start");
    af.values.push_back(dir == Direction::Forward ? o.forward : o.reverse);
    ++expect;
  }
  return af;
}

/// |t_i - f_i| on the forecast range; forward forecasts must lie in
/// [n + 1, T], reverse forecasts in [1, T - n].
inline ScoreSeries forecast_scores(std::span<const double> truth, const AlignedForecasts& forecasts, Eigen::Index n,
                                   Direction dir) {
  const auto T = static_cast<Eigen::Index>(truth.size());
  const Eigen::Index lo = dir == Direction::Forward ? n + 1 : 1;
  const Eigen::Index hi = dir == Direction::Forward ? T : T - n;
  const Eigen::Index first = forecasts.first;
  const Eigen::Index last = first + static_cast<Eigen::Index>(forecasts.values.size()) - 1;
  ScoreSeries s(truth.size(), dir == Direction::Forward ? ScoreKind::PredForward : ScoreKind::PredReverse);
  if (forecasts.values.empty()) return s;
  if (first < lo || last > hi) {
    throw Error(ErrorKind::Alignment, "forecasts cover [" + std::to_string(first) + ", " + std::to_string(last) +
                                          "], allowed range is [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                          "]");
  }
  for (Eigen::Index i = first; i <= last; ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    s.scores[k] = std::abs(truth[k] - forecasts.values[static_cast<std::size_t>(i - first)]);
    s.valid[k] = true;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reconstruction-based scores

/// Median over all windows covering each index; even counts average the two
/// central values.
inline std::vector<double> aggregate_reconstructions(const std::vector<ModelOutput>& outputs, Eigen::Index T) {
  std::vector<std::vector<double>> candidates(static_cast<std::size_t>(T));
  for (const auto& o : outputs) {
    for (Eigen::Index j = 0; j < o.reconstruction.size(); ++j) {
      const Eigen::Index at = o.start + j;
      if (at >= 1 && at <= T) candidates[static_cast<std::size_t>(at - 1)].push_back(o.reconstruction(j));
    }
  }
  std::vector<double> out(static_cast<std::size_t>(T));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    if (c.empty()) throw Error(ErrorKind::Coverage, "index " + std::to_string(i + 1) + " has no reconstruction");
    const std::size_t mid = c.size() / 2;
    std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(mid), c.end());
    if (c.size() % 2 == 1) {
      out[i] = c[mid];
    } else {
      const double upper = c[mid];
      const double lower = *std::max_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(mid));
      out[i] = 0.5 * (lower + upper);
    }
  }
  return out;
}

inline void check_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Dimension, "truth and reconstruction lengths differ");
}

inline ScoreSeries rec_scores_pd(std::span<const double> truth, std::span<const double> recon) {
  check_same_length(truth, recon);
  ScoreSeries s(truth.size(), ScoreKind::RecPd);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    s.scores[i] = std::abs(truth[i] - recon[i]);
    s.valid[i] = true;
  }
  return s;
}

/// Area between the two curves over [i - l, i + l] by the trapezoidal rule,
/// divided by the width actually integrated (2l away from the edges).
inline ScoreSeries rec_scores_ad(std::span<const double> truth, std::span<const double> recon, Eigen::Index l) {
  check_same_length(truth, recon);
  if (l < 1) throw Error(ErrorKind::Config, "area half-window must be >= 1");
  const auto T = static_cast<Eigen::Index>(truth.size());
  auto trapezoid = [](std::span<const double> v, Eigen::Index a, Eigen::Index b) {
    double area = 0.0;
    for (Eigen::Index k = a; k < b; ++k) area += 0.5 * (v[static_cast<std::size_t>(k)] + v[static_cast<std::size_t>(k + 1)]);
    return area;
  };
  ScoreSeries s(truth.size(), ScoreKind::RecAd);
  for (Eigen::Index i = 0; i < T; ++i) {
    const Eigen::Index a = std::max<Eigen::Index>(0, i - l);
    const Eigen::Index b = std::min<Eigen::Index>(T - 1, i + l);
    const auto width = static_cast<double>(b - a);
    const auto k = static_cast<std::size_t>(i);
    s.scores[k] = width > 0 ? std::abs(trapezoid(truth, a, b) - trapezoid(recon, a, b)) / width : 0.0;
    s.valid[k] = true;
  }
  return s;
}

struct DtwResult {
  double cost = 0.0;          // sum of squared differences along the path
  Eigen::Index path_length = 0;
  double score = 0.0;         // sqrt(cost) / path_length
};

/// Minimum-cost monotone warp path between `a` and `b` (steps: diagonal,
/// right, down; endpoints anchored) under squared-difference cost. The table
/// is indexed by path length as well, so ties in cost resolve to the shortest
/// path exactly rather than by the order predecessors happen to be visited.
inline DtwResult dtw_distance(std::span<const double> a, std::span<const double> b, std::vector<double>& table) {
  const auto p = static_cast<Eigen::Index>(a.size());
  const auto r = static_cast<Eigen::Index>(b.size());
  if (p == 0 || r == 0) return {};
  const Eigen::Index Q = p + r;  // path lengths 1 .. p + r - 1
  constexpr double inf = std::numeric_limits<double>::infinity();
  table.assign(static_cast<std::size_t>(p * r * Q), inf);
  auto at = [&](Eigen::Index i, Eigen::Index j, Eigen::Index q) -> double& {
    return table[static_cast<std::size_t>((i * r + j) * Q + q)];
  };
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      const double diff = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)];
      const double c = diff * diff;
      if (i == 0 && j == 0) {
        at(0, 0, 1) = c;
        continue;
      }
      const Eigen::Index q_lo = std::max(i, j) + 1;
      const Eigen::Index q_hi = i + j + 1;
      for (Eigen::Index q = q_lo; q <= q_hi; ++q) {
        double best = inf;
        if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1, q - 1));
        if (i > 0) best = std::min(best, at(i - 1, j, q - 1));
        if (j > 0) best = std::min(best, at(i, j - 1, q - 1));
        if (best < inf) at(i, j, q) = c + best;
      }
    }
  }
  DtwResult res{inf, 0, 0.0};
  for (Eigen::Index q = std::max(p, r); q <= p + r - 1; ++q) {
    const double v = at(p - 1, r - 1, q);
    if (v < res.cost) {
      res.cost = v;
      res.path_length = q;
    }
  }
  res.score = std::sqrt(res.cost) / static_cast<double>(res.path_length);
  return res;
}

inline DtwResult dtw_distance(std::span<const double> a, std::span<const double> b) {
  std::vector<double> table;
  return dtw_distance(a, b, table);
}

/// DTW score between the 2l-long windows [i - l, i + l - 1] of truth and
/// reconstruction, truncated at the series edges.
inline ScoreSeries rec_scores_dtw(std::span<const double> truth, std::span<const double> recon, Eigen::Index l) {
  check_same_length(truth, recon);
  if (l < 1) throw Error(ErrorKind::Config, "DTW half-window must be >= 1");
  const auto T = static_cast<Eigen::Index>(truth.size());
  ScoreSeries s(truth.size(), ScoreKind::RecDtw);
  std::vector<double> table;
  for (Eigen::Index i = 0; i < T; ++i) {
    const Eigen::Index a = std::max<Eigen::Index>(0, i - l);
    const Eigen::Index b = std::min<Eigen::Index>(T, i + l);
    const auto len = static_cast<std::size_t>(b - a);
    const auto off = static_cast<std::size_t>(a);
    s.scores[static_cast<std::size_t>(i)] = dtw_distance(truth.subspan(off, len), recon.subspan(off, len), table).score;
    s.valid[static_cast<std::size_t>(i)] = true;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Smoothing, masking, fusion

/// Finite-history EWMA with alpha = 2 / (W + 1), run over valid positions
/// only; invalid positions are skipped and stay invalid.
inline ScoreSeries ewma_smooth(const ScoreSeries& in, Eigen::Index window) {
  if (window < 1) throw Error(ErrorKind::Config, "smoothing window must be >= 1");
  const double decay = 1.0 - 2.0 / (static_cast<double>(window) + 1.0);
  ScoreSeries out = in;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!in.valid[i]) continue;
    num = in.scores[i] + decay * num;
    den = 1.0 + decay * den;
    out.scores[i] = num / den;
  }
  return out;
}

/// Replaces the first m valid scores with `value`.
inline ScoreSeries mask_scores(const ScoreSeries& in, Eigen::Index m, double value) {
  if (m < 0) throw Error(ErrorKind::Config, "mask length must be non-negative");
  if (static_cast<std::size_t>(m) > in.valid_count()) {
    throw Error(ErrorKind::Config, "mask length exceeds the number of valid scores");
  }
  ScoreSeries out = in;
  Eigen::Index left = m;
  for (std::size_t i = 0; i < out.size() && left > 0; ++i) {
    if (!out.valid[i]) continue;
    out.scores[i] = value;
    --left;
  }
  return out;
}

/// Replaces the first m valid scores with the series minimum.
inline ScoreSeries mask_scores(const ScoreSeries& in, Eigen::Index m) {
  if (m == 0) return in;
  return mask_scores(in, m, in.min_valid().value_or(0.0));
}

/// Reverse scores alone on [1, n + m], the mean of both on
/// [n + m + 1, T - n], forward scores alone on [T - n + 1, T]. Where only one
/// direction is defined that one is used.
inline ScoreSeries bidirectional_fuse(const ScoreSeries& fwd, const ScoreSeries& rev, Eigen::Index n, Eigen::Index m) {
  if (fwd.size() != rev.size()) throw Error(ErrorKind::Dimension, "forward and reverse scores differ in length");
  const auto T = static_cast<Eigen::Index>(fwd.size());
  ScoreSeries out(fwd.size(), ScoreKind::Bidirectional);
  for (Eigen::Index i = 1; i <= T; ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    const bool f = fwd.valid[k];
    const bool r = rev.valid[k];
    if (f && r) {
      if (i < n + m + 1) {
        out.scores[k] = rev.scores[k];
      } else if (i >= T - n + 1) {
        out.scores[k] = fwd.scores[k];
      } else {
        out.scores[k] = 0.5 * rev.scores[k] + 0.5 * fwd.scores[k];
      }
    } else if (r) {
      out.scores[k] = rev.scores[k];
    } else if (f) {
      out.scores[k] = fwd.scores[k];
    } else {
      continue;
    }
    out.valid[k] = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combination

enum class Combination { Pred, Rec, Sum, Mult };

constexpr std::string_view to_string(Combination c) noexcept {
  switch (c) {
    case Combination::Pred: return "pred";
    case Combination::Rec: return "rec";
    case Combination::Sum: return "sum";
    case Combination::Mult: return "mult";
  }
  return "unknown";
}

inline Combination parse_combination(std::string_view s) {
  for (auto c : {Combination::Pred, Combination::Rec, Combination::Sum, Combination::Mult}) {
    if (s == to_string(c)) return c;
  }
  throw Error(ErrorKind::Config, "unknown combination '" + std::string(s) + "' (expected pred|rec|sum|mult)");
}

inline constexpr Combination kAllCombinations[] = {Combination::Pred, Combination::Rec, Combination::Sum,
                                                   Combination::Mult};

enum class RecMethod { Pd, Ad, Dtw };

constexpr std::string_view to_string(RecMethod m) noexcept {
  switch (m) {
    case RecMethod::Pd: return "pd";
    case RecMethod::Ad: return "ad";
    case RecMethod::Dtw: return "dtw";
  }
  return "unknown";
}

inline RecMethod parse_rec_method(std::string_view s) {
  for (auto m : {RecMethod::Pd, RecMethod::Ad, RecMethod::Dtw}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorKind::Config, "unknown reconstruction score '" + std::string(s) + "' (expected pd|ad|dtw)");
}

/// Unset fields resolve against the series length: smoothing window
/// ceil(fraction * T), mask length = smoothing window, beta 0.5 for SUM and 1
/// for MULT.
struct FusionConfig {
  std::optional<Eigen::Index> smoothing_window;
  double smoothing_fraction = 0.01;
  std::optional<Eigen::Index> mask_length;
  std::optional<double> beta;
  Eigen::Index dtw_half_window = 10;
  Combination combination = Combination::Mult;
  RecMethod rec_method = RecMethod::Dtw;
  bool mask = true;
  bool bidirectional = true;

  Eigen::Index resolved_smoothing(Eigen::Index T) const {
    if (smoothing_window) return *smoothing_window;
    return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(smoothing_fraction * static_cast<double>(T) - 1e-9)));
  }
  Eigen::Index resolved_mask(Eigen::Index T) const {
    if (!mask) return 0;
    return mask_length ? *mask_length : resolved_smoothing(T);
  }
  double resolved_beta(Combination c) const {
    if (beta) return *beta;
    return c == Combination::Mult ? 1.0 : 0.5;
  }

  void validate() const {
    if (smoothing_window && *smoothing_window < 1) throw Error(ErrorKind::Config, "smoothing_window must be >= 1");
    if (!(smoothing_fraction > 0.0)) throw Error(ErrorKind::Config, "smoothing_fraction must be positive");
    if (mask_length && *mask_length < 0) throw Error(ErrorKind::Config, "mask_length must be >= 0");
    if (dtw_half_window < 1) throw Error(ErrorKind::Config, "dtw_half_window must be >= 1");
    if (beta && combination == Combination::Sum && !(*beta >= 0.0 && *beta <= 1.0)) {
      throw Error(ErrorKind::Config, "beta must lie in [0, 1] for sum");
    }
  }
};

/// Affine map of the valid scores onto [lo, hi]; a constant series maps to lo.
inline ScoreSeries rescale(const ScoreSeries& in, double lo, double hi) {
  ScoreSeries out = in;
  const auto mn = in.min_valid();
  const auto mx = in.max_valid();
  if (!mn) return out;
  const double span = *mx - *mn;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!in.valid[i]) continue;
    out.scores[i] = span > 0 ? lo + (in.scores[i] - *mn) / span * (hi - lo) : lo;
  }
  return out;
}

inline ScoreSeries combine_scores(const ScoreSeries& pred, const ScoreSeries& rec, Combination mode, double beta) {
  if (pred.size() != rec.size()) throw Error(ErrorKind::Dimension, "prediction and reconstruction scores differ in length");
  if (!pred.fully_valid() || !rec.fully_valid()) {
    throw Error(ErrorKind::Coverage, "score combination needs fully valid inputs");
  }
  ScoreSeries out;
  switch (mode) {
    case Combination::Pred: out = pred; break;
    case Combination::Rec: out = rec; break;
    case Combination::Sum: {
      const ScoreSeries p = rescale(pred, 0.0, 1.0);
      out = rescale(rec, 0.0, 1.0);
      for (std::size_t i = 0; i < out.size(); ++i) out.scores[i] = (1.0 - beta) * out.scores[i] + beta * p.scores[i];
      break;
    }
    case Combination::Mult: {
      const ScoreSeries p = rescale(pred, 1.0, 2.0);
      out = rescale(rec, 1.0, 2.0);
      for (std::size_t i = 0; i < out.size(); ++i) out.scores[i] = beta * out.scores[i] * p.scores[i];
      break;
    }
  }
  out.kind = ScoreKind::Combined;
  return out;
}

inline ScoreSeries combine_scores(const ScoreSeries& pred, const ScoreSeries& rec, const FusionConfig& config) {
  return combine_scores(pred, rec, config.combination, config.resolved_beta(config.combination));
}

}  // namespace aer
