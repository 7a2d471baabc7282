#include <aer/model.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using aer::AerConfig;
using aer::AerModel;

namespace {

AerConfig small_config(Eigen::Index n = 8, Eigen::Index b = 4) {
  AerConfig c;
  c.window_size = n;
  c.hidden_units = b;
  c.epochs = 5;
  c.batch_size = 16;
  c.seed = 42;
  return c;
}

Eigen::MatrixXd random_window(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd w(n, d);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  return w;
}

aer::WindowTruth random_truth(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  aer::WindowTruth t;
  t.prev = u(rng);
  t.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) t.values(i) = u(rng);
  t.next = u(rng);
  return t;
}

aer::Signal sine(Eigen::Index T, double period, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0, 1);
  std::vector<double> v(static_cast<std::size_t>(T));
  for (Eigen::Index i = 0; i < T; ++i) {
    v[static_cast<std::size_t>(i)] = std::sin(2 * std::numbers::pi * static_cast<double>(i) / period) + noise * d(rng);
  }
  return aer::Signal::univariate(v);
}

// Direct transcription of the joint loss, independent of aer_loss.
double loss_oracle(const aer::WindowTruth& t, const aer::ModelOutput& o, double gamma) {
  const double er = t.prev - o.reverse;
  const double ef = t.next - o.forward;
  double mse = 0;
  for (Eigen::Index j = 0; j < t.values.size(); ++j) mse += std::pow(t.values(j) - o.reconstruction(j), 2);
  mse /= static_cast<double>(t.values.size());
  return gamma / 2 * er * er + gamma / 2 * ef * ef + (1 - gamma) * mse;
}

}  // namespace

TEST(Forward, EmitsNPlusTwoFiniteValues) {
  for (Eigen::Index n : {2, 4, 9}) {
    for (Eigen::Index d : {1, 3}) {
      AerConfig c = small_config(n, 3);
      const AerModel m(c, d);
      const auto out = aer::aer_forward(m, random_window(n, d, 1));
      EXPECT_EQ(out.length(), n + 2);
      EXPECT_EQ(out.reconstruction.size(), n);
      EXPECT_TRUE(out.raw().allFinite());
    }
  }
}

TEST(Forward, AlignmentOfRawOutput) {
  const AerModel m(small_config(4), 1);
  const auto out = aer::aer_forward(m, random_window(4, 1, 2), 7);
  const Eigen::VectorXd raw = out.raw();
  EXPECT_EQ(out.start, 7);
  EXPECT_EQ(raw(0), out.reverse);
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_EQ(raw(1 + j), out.reconstruction(j));
  EXPECT_EQ(raw(5), out.forward);
}

TEST(Forward, IdenticalWindowsGiveBitIdenticalOutputs) {
  const AerModel m(small_config(), 2);
  const Eigen::MatrixXd w = random_window(8, 2, 3);
  const Eigen::MatrixXd copy = w;
  EXPECT_EQ(aer::aer_forward(m, w).raw(), aer::aer_forward(m, copy).raw());
}

TEST(Forward, ShapeMismatchIsDimensionError) {
  const AerModel m(small_config(), 1);
  try {
    aer::aer_forward(m, random_window(7, 1, 1));
    FAIL() << "expected an error";
  } catch (const aer::Error& e) {
    EXPECT_EQ(e.kind(), aer::ErrorKind::Dimension);
  }
}

TEST(Loss, ZeroWhenOutputEqualsTruth) {
  aer::ModelOutput o{1, 0.3, Eigen::VectorXd::LinSpaced(5, -1, 1), -0.2};
  aer::WindowTruth t{0.3, o.reconstruction, -0.2};
  EXPECT_EQ(aer::aer_loss(t, o, 0.5), 0.0);
}

TEST(Loss, GammaZeroIsReconstructionMse) {
  aer::ModelOutput o{1, 5.0, Eigen::VectorXd::Zero(4), -9.0};
  aer::WindowTruth t{0.0, Eigen::VectorXd::Constant(4, 2.0), 0.0};
  EXPECT_DOUBLE_EQ(aer::aer_loss(t, o, 0.0), 4.0);
}

TEST(Loss, GammaOneUsesOnlyPredictionErrors) {
  aer::ModelOutput o{1, 0.0, Eigen::VectorXd::Constant(6, 10.0), 0.0};
  aer::WindowTruth t{1.0, Eigen::VectorXd::Zero(6), 3.0};
  EXPECT_DOUBLE_EQ(aer::aer_loss(t, o, 1.0), 5.0);
}

TEST(Loss, LinearInterpolationInGamma) {
  const AerModel m(small_config(), 1);
  const auto out = aer::aer_forward(m, random_window(8, 1, 9));
  const auto truth = random_truth(8, 10);
  const double P = loss_oracle(truth, out, 1.0);
  const double R = loss_oracle(truth, out, 0.0);
  for (double g : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_NEAR(aer::aer_loss(truth, out, g), g * P + (1 - g) * R, 1e-14);
    EXPECT_NEAR(aer::aer_loss(truth, out, g), loss_oracle(truth, out, g), 1e-14);
  }
}

TEST(Loss, BatchedLossIsMeanOfPerWindowLosses) {
  const AerModel m(small_config(), 2);
  aer::Signal s;
  s.values = random_window(40, 2, 4);
  for (int i = 0; i < 40; ++i) s.timestamps.push_back(i + 1);
  const auto ws = aer::make_windows(s, 8);
  const auto idx = ws.trainable_indices();
  double expected = 0;
  for (std::size_t k : idx) {
    aer::WindowTruth t{*ws.prev_targets[k], ws.targets[k], *ws.next_targets[k]};
    expected += loss_oracle(t, aer::aer_forward(m, ws.windows[k]), 0.3);
  }
  expected /= static_cast<double>(idx.size());
  EXPECT_NEAR(m.loss_and_gradient(aer::Batch::from(ws, idx), 0.3, nullptr), expected, 1e-13);
}

TEST(Gradient, SmallModelMatchesFiniteDifferences) {
  const AerModel m(small_config(8, 4), 1);
  const auto res = aer::gradient_check(m, random_window(8, 1, 21), random_truth(8, 22), 0.5, 1e-5);
  EXPECT_GE(res.coordinates, 50u);
  EXPECT_LT(res.max_relative_error, 1e-4);
}

TEST(Gradient, MultichannelAndExtremeGammas) {
  for (double gamma : {0.0, 1.0}) {
    const AerModel m(small_config(6, 3), 3);
    const auto res = aer::gradient_check(m, random_window(6, 3, 31), random_truth(6, 32), gamma, 1e-5, 200);
    EXPECT_LT(res.max_relative_error, 1e-4) << "gamma " << gamma;
  }
}

TEST(Gradient, StableAcrossEpsilon) {
  const AerModel m(small_config(8, 4), 1);
  const auto w = random_window(8, 1, 41);
  const auto t = random_truth(8, 42);
  const auto a = aer::gradient_check(m, w, t, 0.5, 1e-4);
  const auto b = aer::gradient_check(m, w, t, 0.5, 1e-5);
  EXPECT_LT(a.max_relative_error, 1e-4);
  EXPECT_LT(b.max_relative_error, 1e-4);
}

TEST(Gradient, ZeroLearningSignalPassesVacuously) {
  const AerModel m(small_config(8, 4), 1);
  const auto w = random_window(8, 1, 51);
  const auto out = aer::aer_forward(m, w);
  const aer::WindowTruth t{out.reverse, out.reconstruction, out.forward};
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m.parameters().size());
  m.loss_and_gradient(aer::Batch::single(w, &t), 0.5, &g);
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(aer::gradient_check(m, w, t, 0.5, 1e-5).max_relative_error, 1e-4);
}

TEST(Gradient, EpsilonOutsideRangeRejected) {
  const AerModel m(small_config(), 1);
  EXPECT_THROW(aer::gradient_check(m, random_window(8, 1, 1), random_truth(8, 1), 0.5, 1e-2), aer::Error);
}

TEST(Gradient, BatchGradientIsMeanOfSingleWindowGradients) {
  const AerModel m(small_config(), 1);
  const auto ws = aer::make_windows(sine(30, 9, 0.1, 3), 8);
  const auto idx = ws.trainable_indices();
  Eigen::VectorXd batch = Eigen::VectorXd::Zero(m.parameters().size());
  m.loss_and_gradient(aer::Batch::from(ws, idx), 0.5, &batch);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m.parameters().size());
  for (std::size_t k : idx) {
    aer::WindowTruth t{*ws.prev_targets[k], ws.targets[k], *ws.next_targets[k]};
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m.parameters().size());
    m.loss_and_gradient(aer::Batch::single(ws.windows[k], &t), 0.5, &g);
    sum += g;
  }
  sum /= static_cast<double>(idx.size());
  EXPECT_LT((batch - sum).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Train, ConstantSignalLossDecreases) {
  AerConfig c = small_config(10, 4);
  c.epochs = 20;
  const auto ws = aer::make_windows(aer::Signal::univariate(std::vector<double>(80, 0.5)), 10);
  const auto res = aer::train(ws, c);
  ASSERT_EQ(res.loss_history.size(), 20u);
  EXPECT_LT(res.loss_history.back(), res.loss_history.front());
}

TEST(Train, FixedSeedIsBitIdentical) {
  const auto ws = aer::make_windows(sine(120, 15, 0.05, 7), 8);
  const auto a = aer::train(ws, small_config());
  const auto b = aer::train(ws, small_config());
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_TRUE(a.model == b.model);
  AerConfig other = small_config();
  other.seed = 43;
  EXPECT_NE(aer::train(ws, other).loss_history, a.loss_history);
}

TEST(Train, SineLossTrendsDownwardWithDefaults) {
  // Default hyperparameters on a shorter series; five-epoch means must not
  // rise by more than a small slack.
  const auto ws = aer::make_windows(sine(600, 30, 0.01, 1), 100);
  const auto res = aer::train(ws, AerConfig{});
  const auto& h = res.loss_history;
  ASSERT_EQ(h.size(), 35u);
  std::vector<double> spans;
  for (std::size_t k = 0; k + 5 <= h.size(); k += 5) {
    double s = 0;
    for (std::size_t j = k; j < k + 5; ++j) s += h[j];
    spans.push_back(s / 5);
  }
  for (std::size_t k = 1; k < spans.size(); ++k) EXPECT_LE(spans[k], spans[k - 1] * 1.05) << "span " << k;
  EXPECT_LT(h.back(), 0.1 * h.front());
}

TEST(Train, NoTrainableWindowIsInsufficientData) {
  const auto ws = aer::make_windows(aer::Signal::univariate({1, 2, 3}), 2);
  try {
    aer::train(ws, small_config(2, 2));
    FAIL() << "expected an error";
  } catch (const aer::Error& e) {
    EXPECT_EQ(e.kind(), aer::ErrorKind::InsufficientData);
  }
}

TEST(Train, NonFiniteInputReportsDivergenceWithEpoch) {
  std::vector<double> v(40, 0.1);
  v[20] = std::numeric_limits<double>::infinity();
  const auto ws = aer::make_windows(aer::Signal::univariate(v), 8);
  try {
    aer::train(ws, small_config());
    FAIL() << "expected an error";
  } catch (const aer::Error& e) {
    EXPECT_EQ(e.kind(), aer::ErrorKind::Divergence);
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
}

TEST(PredictAll, EmptyWindowSetGivesNoOutputs) {
  const AerModel m(small_config(), 1);
  EXPECT_TRUE(aer::predict_all(m, aer::WindowSet{}).empty());
}

TEST(PredictAll, MatchesPerWindowForward) {
  const AerModel m(small_config(), 1);
  const auto ws = aer::make_windows(sine(50, 11, 0.1, 2), 8, true);
  const auto outs = aer::predict_all(m, ws);
  ASSERT_EQ(outs.size(), ws.size());
  for (std::size_t k = 0; k < ws.size(); ++k) {
    EXPECT_EQ(outs[k].start, ws.start_indices[k]);
    EXPECT_EQ(outs[k].raw(), aer::aer_forward(m, ws.windows[k]).raw());
  }
}

TEST(Config, InvariantsEnforced) {
  AerConfig c;
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), aer::Error);
  c = AerConfig{};
  c.window_size = 1;
  EXPECT_THROW(c.validate(), aer::Error);
  c = AerConfig{};
  c.hidden_units = 0;
  EXPECT_THROW(c.validate(), aer::Error);
}
