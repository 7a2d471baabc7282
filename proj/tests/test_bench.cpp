#include <aer/bench.hpp>

#include <gtest/gtest.h>

#include <numeric>

using aer::LabeledInterval;
using aer::SyntheticKind;

TEST(ContextualF1, OverlapCountsOnce) {
  const auto e = aer::contextual_f1({{10, 20}}, {{15, 25}});
  EXPECT_EQ(e.tp, 1);
  EXPECT_EQ(e.fp, 0);
  EXPECT_EQ(e.fn, 0);
  EXPECT_DOUBLE_EQ(e.f1, 1.0);
}

TEST(ContextualF1, MissAndFalseAlarm) {
  const auto e = aer::contextual_f1({{10, 20}}, {{30, 40}});
  EXPECT_EQ(e.tp, 0);
  EXPECT_EQ(e.fp, 1);
  EXPECT_EQ(e.fn, 1);
  EXPECT_EQ(e.f1, 0.0);
}

TEST(ContextualF1, TouchingEndpointsOverlap) {
  EXPECT_EQ(aer::contextual_f1({{10, 20}}, {{20, 20}}).tp, 1);
  EXPECT_EQ(aer::contextual_f1({{10, 20}}, {{21, 22}}).tp, 0);
}

TEST(ContextualF1, OneDetectionCoveringTwoLabels) {
  // Both truth intervals are hit; the single detection is not a false alarm.
  const auto e = aer::contextual_f1({{1, 5}, {10, 15}}, {{3, 12}});
  EXPECT_EQ(e.tp, 2);
  EXPECT_EQ(e.fp, 0);
  EXPECT_EQ(e.fn, 0);
}

TEST(ContextualF1, SeveralDetectionsInsideOneLabel) {
  const auto e = aer::contextual_f1({{1, 100}}, {{5, 6}, {50, 60}, {200, 210}});
  EXPECT_EQ(e.tp, 1);
  EXPECT_EQ(e.fp, 1);
  EXPECT_EQ(e.fn, 0);
  EXPECT_DOUBLE_EQ(e.precision, 0.5);
  EXPECT_DOUBLE_EQ(e.recall, 1.0);
  EXPECT_DOUBLE_EQ(e.f1, 2.0 / 3.0);
}

TEST(ContextualF1, SwappingRolesSwapsFpAndFn) {
  const std::vector<LabeledInterval> a{{1, 5}, {40, 50}, {90, 91}};
  const std::vector<LabeledInterval> b{{4, 8}, {60, 70}};
  const auto ab = aer::contextual_f1(a, b);
  const auto ba = aer::contextual_f1(b, a);
  EXPECT_EQ(ab.fp, ba.fn);
  EXPECT_EQ(ab.fn, ba.fp);
}

TEST(ContextualF1, EmptyBothSidesIsDegenerate) {
  const auto e = aer::contextual_f1({}, std::vector<LabeledInterval>{});
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.f1, 0.0);
  EXPECT_FALSE(aer::contextual_f1({{1, 2}}, std::vector<LabeledInterval>{}).degenerate);
}

TEST(ContextualF1, ReportUsesKeptIntervalsOnly) {
  aer::AnomalyReport r;
  r.intervals = {{10, 12, 5.0, false}, {50, 52, 1.0, true}};
  const auto e = aer::contextual_f1({{11, 11}}, r);
  EXPECT_EQ(e.tp, 1);
  EXPECT_EQ(e.fp, 0);
}

TEST(Synthetic, PointSpikeLabels) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = aer::generate_synthetic(SyntheticKind::PointSpike, 1000, seed);
    ASSERT_EQ(s.labels.size(), 3u);
    for (std::size_t k = 0; k < s.labels.size(); ++k) {
      EXPECT_EQ(s.labels[k].start, s.labels[k].end);
      EXPECT_GE(s.labels[k].start, 50);
      EXPECT_LE(s.labels[k].end, 950);
      if (k > 0) {
        EXPECT_GE(s.labels[k].start - s.labels[k - 1].start, 100);
      }
    }
  }
}

TEST(Synthetic, SpikesStandOutFromCleanSignal) {
  const auto spiked = aer::generate_synthetic(SyntheticKind::PointSpike, 1000, 3);
  for (const auto& l : spiked.labels) {
    const double v = spiked.signal.values(l.start - 1, 0);
    const double base = std::sin(2.0 * std::numbers::pi * static_cast<double>(l.start - 1) / 50.0);
    EXPECT_GT(std::abs(v - base), 0.08 - 4 * 0.01);
  }
}

TEST(Synthetic, FlatMiddleLabelAndPlateau) {
  const auto s = aer::generate_synthetic(SyntheticKind::FlatMiddle, 1000, 1);
  ASSERT_EQ(s.labels.size(), 1u);
  EXPECT_EQ(s.labels[0], (LabeledInterval{451, 550}));
  const double v = s.signal.values(450, 0);
  for (Eigen::Index i = 450; i < 550; ++i) EXPECT_EQ(s.signal.values(i, 0), v);
  EXPECT_NE(s.signal.values(449, 0), v);
}

TEST(Synthetic, LevelShiftLabelBounds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = aer::generate_synthetic(SyntheticKind::LevelShift, 1000, seed);
    ASSERT_EQ(s.labels.size(), 1u);
    EXPECT_EQ(s.labels[0].end - s.labels[0].start + 1, 50);
    EXPECT_GE(s.labels[0].start, 200);
    EXPECT_LE(s.labels[0].end, 800);
  }
}

TEST(Synthetic, SineCleanHasNoLabels) {
  const auto s = aer::generate_synthetic(SyntheticKind::SineClean, 600, 0);
  EXPECT_TRUE(s.labels.empty());
  EXPECT_EQ(s.signal.length(), 600);
}

TEST(Synthetic, SameSeedSameSignal) {
  for (auto kind : aer::kAllSyntheticKinds) {
    const auto a = aer::generate_synthetic(kind, 700, 11);
    const auto b = aer::generate_synthetic(kind, 700, 11);
    EXPECT_EQ(a.signal.values, b.signal.values);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.signal.name, aer::to_string(kind));
  }
}

TEST(Synthetic, ShortLengthRejected) {
  EXPECT_THROW(aer::generate_synthetic(SyntheticKind::SineClean, 499, 0), aer::Error);
}

TEST(Synthetic, KindNamesRoundTrip) {
  for (auto kind : aer::kAllSyntheticKinds) EXPECT_EQ(aer::parse_synthetic_kind(aer::to_string(kind)), kind);
  EXPECT_THROW(aer::parse_synthetic_kind("spike"), aer::Error);
}

TEST(Aggregate, MeanF1IsArithmeticMean) {
  std::vector<aer::BenchRun> runs;
  std::vector<double> f1s;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(0, 6);
  for (int k = 0; k < 25; ++k) {
    aer::BenchRun r;
    r.dataset = "ds";
    r.signal = "s" + std::to_string(k);
    r.counts = aer::EvalCounts::from_counts(d(rng), d(rng), d(rng));
    f1s.push_back(r.counts.f1);
    runs.push_back(r);
  }
  const auto rows = aer::aggregate(runs);
  ASSERT_EQ(rows.size(), 1u);
  const double mean = std::accumulate(f1s.begin(), f1s.end(), 0.0) / 25.0;
  EXPECT_NEAR(rows[0].mean_f1, mean, 1e-12);
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (const auto& r : runs) {
    tp += r.counts.tp;
    fp += r.counts.fp;
    fn += r.counts.fn;
  }
  EXPECT_EQ(rows[0].pooled.tp, tp);
  EXPECT_EQ(rows[0].pooled.fp, fp);
  EXPECT_EQ(rows[0].pooled.fn, fn);
}

TEST(Aggregate, GroupsByDatasetAndMode) {
  std::vector<aer::BenchRun> runs;
  for (auto mode : aer::kAllCombinations) {
    runs.push_back({"a", "x", mode, aer::EvalCounts::from_counts(1, 0, 0)});
    runs.push_back({"b", "x", mode, aer::EvalCounts::from_counts(0, 1, 0)});
  }
  const auto rows = aer::aggregate(runs);
  EXPECT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].dataset, "a");
  EXPECT_EQ(rows[1].dataset, "b");
}

TEST(Aggregate, EmptyInput) {
  EXPECT_TRUE(aer::aggregate({}).empty());
  const auto r = aer::run_benchmark({}, {}, {aer::Combination::Mult});
  EXPECT_TRUE(r.runs.empty());
  EXPECT_TRUE(r.failures.empty());
}

namespace {

aer::PipelineConfig small_config() {
  aer::PipelineConfig c;
  c.model.window_size = 20;
  c.model.hidden_units = 8;
  c.model.epochs = 2;
  return c;
}

}  // namespace

TEST(RunBenchmark, DeterministicAndOneRowPerMode) {
  const auto s = aer::generate_synthetic(SyntheticKind::LevelShift, 500, 2);
  std::vector<aer::BenchSignal> sigs{{"synthetic", s.signal, s.labels}};
  const std::vector<aer::Combination> modes(std::begin(aer::kAllCombinations), std::end(aer::kAllCombinations));
  const auto a = aer::run_benchmark(sigs, small_config(), modes);
  const auto b = aer::run_benchmark(sigs, small_config(), modes);
  ASSERT_EQ(a.runs.size(), 4u);
  ASSERT_EQ(b.runs.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a.runs[k].combination, modes[k]);
    EXPECT_EQ(a.runs[k].counts.tp, b.runs[k].counts.tp);
    EXPECT_EQ(a.runs[k].counts.fp, b.runs[k].counts.fp);
    EXPECT_EQ(a.runs[k].counts.fn, b.runs[k].counts.fn);
    EXPECT_EQ(a.runs[k].counts.tp + a.runs[k].counts.fn, 1);
  }
}

TEST(RunBenchmark, FailingSignalIsRecordedAndSkipped) {
  const auto good = aer::generate_synthetic(SyntheticKind::SineClean, 500, 0);
  aer::Signal tiny = aer::Signal::univariate(std::vector<double>(10, 1.0), "tiny");
  std::vector<aer::BenchSignal> sigs{{"d", tiny, {}}, {"d", good.signal, {}}};
  const auto r = aer::run_benchmark(sigs, small_config(), {aer::Combination::Sum});
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].signal, "tiny");
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_EQ(r.runs[0].signal, "sine-clean");
}
