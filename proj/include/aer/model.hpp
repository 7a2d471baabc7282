#pragma once

// Auto-encoder with regression: a bidirectional LSTM encoder compresses an
// n x d window into a 2b latent vector; a bidirectional LSTM decoder unrolls
// that vector over n + 2 steps and a shared affine head emits one scalar per
// step. Step 0 is the reverse prediction of t_{i-1}, steps 1..n reconstruct
// t_i..t_{i+n-1}, step n + 1 is the forward prediction of t_{i+n}.

#include <aer/error.hpp>
#include <aer/lstm.hpp>
#include <aer/signal.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace aer {

struct AerConfig {
  Eigen::Index window_size = 100;
  double gamma = 0.5;
  Eigen::Index hidden_units = 30;
  int epochs = 35;
  Eigen::Index batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (window_size < 2) throw Error(ErrorKind::Config, "window_size must be >= 2");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorKind::Config, "gamma must lie in [0, 1]");
    if (hidden_units < 1) throw Error(ErrorKind::Config, "hidden_units must be >= 1");
    if (epochs < 1) throw Error(ErrorKind::Config, "epochs must be positive");
    if (batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be positive");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "learning_rate must be positive");
  }
};

/// Decoded output of one window.
struct ModelOutput {
  Eigen::Index start = 1;  // 1-based index of the window's first sample
  double reverse = 0.0;    // aligned to start - 1
  Eigen::VectorXd reconstruction;  // aligned to [start, start + n - 1]
  double forward = 0.0;    // aligned to start + n

  Eigen::Index length() const noexcept { return reconstruction.size() + 2; }

  /// The n + 2 values in emission order.
  Eigen::VectorXd raw() const {
    Eigen::VectorXd v(length());
    v(0) = reverse;
    v.segment(1, reconstruction.size()) = reconstruction;
    v(length() - 1) = forward;
    return v;
  }
};

/// Ground truth around one window: t_{i-1}, t_{i..i+n-1}, t_{i+n}.
struct WindowTruth {
  double prev = 0.0;
  Eigen::VectorXd values;
  double next = 0.0;
};

// ---------------------------------------------------------------------------
// Loss

struct LossParts {
  double prediction = 0.0;      // mean of the two squared one-step errors
  double reconstruction = 0.0;  // mean squared reconstruction error

  double combine(double gamma) const { return gamma * prediction + (1.0 - gamma) * reconstruction; }
};

inline LossParts loss_parts(const WindowTruth& truth, const ModelOutput& out) {
  if (truth.values.size() != out.reconstruction.size()) {
    throw Error(ErrorKind::Dimension, "truth and reconstruction lengths differ");
  }
  const double er = truth.prev - out.reverse;
  const double ef = truth.next - out.forward;
  LossParts p;
  p.prediction = 0.5 * (er * er + ef * ef);
  p.reconstruction = (truth.values - out.reconstruction).squaredNorm() / static_cast<double>(truth.values.size());
  return p;
}

/// (g/2)(t_{i-1} - r)^2 + (g/2)(t_{i+n} - f)^2 + (1 - g) * MSE(t_{i..i+n-1}, y).
inline double aer_loss(const WindowTruth& truth, const ModelOutput& out, double gamma) {
  return loss_parts(truth, out).combine(gamma);
}

// ---------------------------------------------------------------------------
// Parameter layout

struct LstmSlot {
  Eigen::Index in = 0;
  Eigen::Index hidden = 0;
  Eigen::Index input_weights = 0;  // offset of 4h x in
  Eigen::Index recurrent_weights = 0;  // offset of 4h x h
  Eigen::Index bias = 0;  // offset of 4h
};

struct TensorInfo {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

struct ModelLayout {
  LstmSlot enc_fwd, enc_bwd, dec_fwd, dec_bwd;
  Eigen::Index head_weights = 0;  // 1 x 2h
  Eigen::Index head_bias = 0;
  Eigen::Index total = 0;
  std::vector<TensorInfo> tensors;

  ModelLayout(Eigen::Index channels, Eigen::Index hidden) {
    auto lstm = [&](const std::string& name, Eigen::Index in) {
      LstmSlot s{in, hidden, 0, 0, 0};
      s.input_weights = add(name + ".input_weights", 4 * hidden, in);
      s.recurrent_weights = add(name + ".recurrent_weights", 4 * hidden, hidden);
      s.bias = add(name + ".bias", 4 * hidden, 1);
      return s;
    };
    enc_fwd = lstm("encoder.forward", channels);
    enc_bwd = lstm("encoder.backward", channels);
    dec_fwd = lstm("decoder.forward", 2 * hidden);
    dec_bwd = lstm("decoder.backward", 2 * hidden);
    head_weights = add("head.weights", 1, 2 * hidden);
    head_bias = add("head.bias", 1, 1);
  }

 private:
  Eigen::Index add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    tensors.push_back({std::move(name), total, rows, cols});
    const Eigen::Index off = total;
    total += rows * cols;
    return off;
  }
};

// ---------------------------------------------------------------------------
// Batches

/// B windows packed for the batched kernels.
struct Batch {
  Eigen::Index size = 0;
  Eigen::Index steps = 0;
  Eigen::MatrixXd inputs;   // d x B*n, step-major
  Eigen::MatrixXd targets;  // n x B
  Eigen::RowVectorXd prev;
  Eigen::RowVectorXd next;

  static Batch from(const WindowSet& ws, const std::vector<std::size_t>& idx) {
    Batch b;
    b.size = static_cast<Eigen::Index>(idx.size());
    b.steps = ws.window_size;
    const Eigen::Index d = ws.windows.front().cols();
    b.inputs.resize(d, b.size * b.steps);
    b.targets.resize(b.steps, b.size);
    b.prev = Eigen::RowVectorXd::Zero(b.size);
    b.next = Eigen::RowVectorXd::Zero(b.size);
    for (Eigen::Index k = 0; k < b.size; ++k) {
      const std::size_t w = idx[static_cast<std::size_t>(k)];
      for (Eigen::Index t = 0; t < b.steps; ++t) b.inputs.col(t * b.size + k) = ws.windows[w].row(t).transpose();
      b.targets.col(k) = ws.targets[w];
      b.prev(k) = ws.prev_targets[w].value_or(0.0);
      b.next(k) = ws.next_targets[w].value_or(0.0);
    }
    return b;
  }

  static Batch single(const Eigen::MatrixXd& window, const WindowTruth* truth = nullptr, Eigen::Index target = 0) {
    Batch b;
    b.size = 1;
    b.steps = window.rows();
    b.inputs = window.transpose();
    if (truth != nullptr) {
      b.targets = truth->values;
      b.prev = Eigen::RowVectorXd::Constant(1, truth->prev);
      b.next = Eigen::RowVectorXd::Constant(1, truth->next);
    } else {
      b.targets = window.col(target);
      b.prev = b.next = Eigen::RowVectorXd::Zero(1);
    }
    return b;
  }
};

// ---------------------------------------------------------------------------
// Model

class AerModel {
 public:
  using Vector = Eigen::VectorXd;

  /// Scratch buffers for one batched pass. Reusing one across calls avoids
  /// reallocating the activation traces for every batch.
  struct Workspace {
    detail::LstmTrace enc_f, enc_b, dec_f, dec_b;
    Eigen::MatrixXd inputs_rev;  // encoder inputs in reverse step order
    Eigen::MatrixXd latent;      // 2h x B
    Eigen::MatrixXd pre;
    Eigen::MatrixXd dh_f, dh_b, dh_enc, d_act;
  };

  AerModel(const AerConfig& config, Eigen::Index channels)
      : config_(config), channels_(channels), layout_(channels, config.hidden_units) {
    config_.validate();
    if (channels < 1) throw Error(ErrorKind::Config, "model needs at least one input channel");
    params_ = Vector::Zero(layout_.total);
    initialize(config_.seed);
  }

  const AerConfig& config() const noexcept { return config_; }
  Eigen::Index channels() const noexcept { return channels_; }
  Eigen::Index window_size() const noexcept { return config_.window_size; }
  Eigen::Index target_channel() const noexcept { return target_; }
  void set_target_channel(Eigen::Index t) {
    if (t < 0 || t >= channels_) throw Error(ErrorKind::Dimension, "target channel out of range");
    target_ = t;
  }
  const ModelLayout& layout() const noexcept { return layout_; }
  const Vector& parameters() const noexcept { return params_; }
  Vector& parameters() noexcept { return params_; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases except the
  /// forget gate which starts at 1.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (const auto& t : layout_.tensors) {
      const bool is_bias = t.cols == 1 && t.name.ends_with(".bias");
      if (is_bias) continue;
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index k = 0; k < t.rows * t.cols; ++k) params_(t.offset + k) = dist(rng);
    }
    for (const LstmSlot* s : {&layout_.enc_fwd, &layout_.enc_bwd, &layout_.dec_fwd, &layout_.dec_bwd}) {
      params_.segment(s->bias, 4 * s->hidden).setZero();
      params_.segment(s->bias + s->hidden, s->hidden).setOnes();
    }
    params_(layout_.head_bias) = 0.0;
  }

  /// Decodes one n x d window.
  ModelOutput forward(const Eigen::MatrixXd& window, Eigen::Index start = 1) const {
    check_window(window);
    Workspace ws;
    Eigen::MatrixXd out = run(Batch::single(window), ws);
    ModelOutput o;
    o.start = start;
    const Eigen::Index n = window_size();
    o.reverse = out(0, 0);
    o.reconstruction = out.col(0).segment(1, n);
    o.forward = out(n + 1, 0);
    return o;
  }

  /// Mean batch loss; accumulates the gradient of that mean into `grad` when
  /// given. `sample_losses` receives each window's loss.
  double loss_and_gradient(const Batch& batch, double gamma, Vector* grad,
                           std::vector<double>* sample_losses = nullptr) const {
    Workspace ws;
    return loss_and_gradient(batch, gamma, grad, sample_losses, ws);
  }

  double loss_and_gradient(const Batch& batch, double gamma, Vector* grad, std::vector<double>* sample_losses,
                           Workspace& ws) const {
    const Eigen::MatrixXd out = run(batch, ws);
    const Eigen::Index n = window_size();
    const Eigen::Index B = batch.size;
    const double inv_b = 1.0 / static_cast<double>(B);

    const Eigen::RowVectorXd er = batch.prev - out.row(0);
    const Eigen::RowVectorXd ef = batch.next - out.row(n + 1);
    const Eigen::MatrixXd ey = batch.targets - out.middleRows(1, n);

    const Eigen::RowVectorXd per_sample = 0.5 * gamma * (er.array().square() + ef.array().square()).matrix() +
                                          (1.0 - gamma) / static_cast<double>(n) * ey.colwise().squaredNorm();
    if (sample_losses != nullptr) {
      sample_losses->assign(per_sample.data(), per_sample.data() + B);
    }
    const double loss = per_sample.sum() * inv_b;
    if (grad == nullptr) return loss;

    Eigen::MatrixXd d_out(n + 2, B);
    d_out.row(0) = -gamma * inv_b * er;
    d_out.middleRows(1, n) = (-2.0 * (1.0 - gamma) * inv_b / static_cast<double>(n)) * ey;
    d_out.row(n + 1) = -gamma * inv_b * ef;
    backward(batch, ws, d_out, *grad);
    return loss;
  }

  friend bool operator==(const AerModel& a, const AerModel& b) {
    return a.channels_ == b.channels_ && a.target_ == b.target_ && a.params_.size() == b.params_.size() &&
           a.params_ == b.params_;
  }

 private:
  using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
  using Map = Eigen::Map<Eigen::MatrixXd>;

  ConstMap W(const LstmSlot& s) const { return {params_.data() + s.input_weights, 4 * s.hidden, s.in}; }
  ConstMap U(const LstmSlot& s) const { return {params_.data() + s.recurrent_weights, 4 * s.hidden, s.hidden}; }
  auto bias(const LstmSlot& s) const { return params_.segment(s.bias, 4 * s.hidden); }

  void check_window(const Eigen::MatrixXd& window) const {
    if (window.rows() != window_size() || window.cols() != channels_) {
      throw Error(ErrorKind::Dimension, "window is " + std::to_string(window.rows()) + "x" +
                                            std::to_string(window.cols()) + ", model expects " +
                                            std::to_string(window_size()) + "x" + std::to_string(channels_));
    }
  }

  Eigen::MatrixXd run(const Batch& batch, Workspace& ws) const {
    const Eigen::Index B = batch.size;
    const Eigen::Index n = batch.steps;
    const Eigen::Index h = config_.hidden_units;
    const Eigen::Index S = n + 2;
    if (n != window_size() || batch.inputs.rows() != channels_) {
      throw Error(ErrorKind::Dimension, "batch shape does not match model");
    }

    ws.inputs_rev.resize(channels_, B * n);
    for (Eigen::Index t = 0; t < n; ++t) {
      ws.inputs_rev.middleCols(t * B, B) = batch.inputs.middleCols((n - 1 - t) * B, B);
    }

    const auto& L = layout_;
    auto& pre = ws.pre;
    for (auto [slot, inputs, trace] : {std::tuple{&L.enc_fwd, &batch.inputs, &ws.enc_f},
                                       std::tuple{&L.enc_bwd, &std::as_const(ws.inputs_rev), &ws.enc_b}}) {
      pre.noalias() = W(*slot) * *inputs;
      pre.colwise() += bias(*slot);
      detail::lstm_forward(U(*slot), B, n, [&](Eigen::Index s) { return pre.middleCols(s * B, B); }, *trace);
    }
    ws.latent.resize(2 * h, B);
    ws.latent.topRows(h) = ws.enc_f.hidden_at(n - 1);
    ws.latent.bottomRows(h) = ws.enc_b.hidden_at(n - 1);

    for (auto [slot, trace] : {std::pair{&L.dec_fwd, &ws.dec_f}, std::pair{&L.dec_bwd, &ws.dec_b}}) {
      pre.noalias() = W(*slot) * ws.latent;
      pre.colwise() += bias(*slot);
      detail::lstm_forward(U(*slot), B, S, [&](Eigen::Index) -> const Eigen::MatrixXd& { return pre; }, *trace);
    }

    const auto head = params_.segment(L.head_weights, 2 * h);
    const double head_b = params_(L.head_bias);
    Eigen::MatrixXd out(S, B);
    for (Eigen::Index p = 0; p < S; ++p) {
      out.row(p).noalias() = head.head(h).transpose() * ws.dec_f.hidden_at(p);
      out.row(p).noalias() += head.tail(h).transpose() * ws.dec_b.hidden_at(S - 1 - p);
      out.row(p).array() += head_b;
    }
    return out;
  }

  void backward(const Batch& batch, Workspace& ws, const Eigen::MatrixXd& d_out, Vector& grad) const {
    const Eigen::Index B = batch.size;
    const Eigen::Index n = batch.steps;
    const Eigen::Index h = config_.hidden_units;
    const Eigen::Index S = n + 2;
    const auto& L = layout_;
    if (grad.size() != params_.size()) grad = Vector::Zero(params_.size());

    const auto head = params_.segment(L.head_weights, 2 * h);
    auto& dh_f = ws.dh_f;
    auto& dh_b = ws.dh_b;
    dh_f.resize(h, B * S);
    dh_b.resize(h, B * S);
    auto g_head = grad.segment(L.head_weights, 2 * h);
    for (Eigen::Index p = 0; p < S; ++p) {
      const auto dy = d_out.row(p);
      dh_f.middleCols(p * B, B).noalias() = head.head(h) * dy;
      dh_b.middleCols((S - 1 - p) * B, B).noalias() = head.tail(h) * dy;
      g_head.head(h).noalias() += ws.dec_f.hidden_at(p) * dy.transpose();
      g_head.tail(h).noalias() += ws.dec_b.hidden_at(S - 1 - p) * dy.transpose();
    }
    grad(L.head_bias) += d_out.sum();

    Eigen::MatrixXd d_latent = Eigen::MatrixXd::Zero(2 * h, B);
    auto& d_act = ws.d_act;
    for (auto [slot, trace, dh] :
         {std::tuple{&L.dec_fwd, &ws.dec_f, &dh_f}, std::tuple{&L.dec_bwd, &ws.dec_b, &dh_b}}) {
      detail::lstm_backward(U(*slot), *trace, *dh, d_act);
      accumulate_recurrent(*slot, *trace, d_act, grad);
      const Eigen::MatrixXd d_sum = detail::sum_blocks(d_act, B);
      Map(grad.data() + slot->input_weights, 4 * h, 2 * h).noalias() += d_sum * ws.latent.transpose();
      d_latent.noalias() += W(*slot).transpose() * d_sum;
    }

    for (auto [slot, trace, inputs, half] :
         {std::tuple{&L.enc_fwd, &ws.enc_f, &batch.inputs, Eigen::Index{0}},
          std::tuple{&L.enc_bwd, &ws.enc_b, &std::as_const(ws.inputs_rev), h}}) {
      auto& dh = ws.dh_enc;
      dh.setZero(h, B * n);
      dh.rightCols(B) = d_latent.middleRows(half, h);
      detail::lstm_backward(U(*slot), *trace, dh, d_act);
      accumulate_recurrent(*slot, *trace, d_act, grad);
      Map(grad.data() + slot->input_weights, 4 * h, channels_).noalias() += d_act * inputs->transpose();
    }
  }

  void accumulate_recurrent(const LstmSlot& s, const detail::LstmTrace& tr, const Eigen::MatrixXd& d_act,
                            Vector& grad) const {
    const Eigen::Index cols = tr.batch * tr.steps;
    Map(grad.data() + s.recurrent_weights, 4 * s.hidden, s.hidden).noalias() +=
        d_act * tr.hidden.leftCols(cols).transpose();
    grad.segment(s.bias, 4 * s.hidden) += d_act.rowwise().sum();
  }

  AerConfig config_;
  Eigen::Index channels_;
  Eigen::Index target_ = 0;
  ModelLayout layout_;
  Vector params_;
};

inline ModelOutput aer_forward(const AerModel& model, const Eigen::MatrixXd& window, Eigen::Index start = 1) {
  return model.forward(window, start);
}

inline std::vector<ModelOutput> predict_all(const AerModel& model, const WindowSet& windows) {
  std::vector<ModelOutput> out;
  out.reserve(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    out.push_back(model.forward(windows.windows[k], windows.start_indices[k]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

/// Adam with the usual bias-corrected moments.
class Adam {
 public:
  Adam(Eigen::Index size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-7)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(size)),
        v_(Eigen::VectorXd::Zero(size)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

struct TrainResult {
  AerModel model;
  std::vector<double> loss_history;  // mean per-window loss per epoch
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Mini-batch Adam on the mean joint loss over windows that have both a
/// preceding and a following target. Deterministic for a fixed seed.
inline TrainResult train(const WindowSet& windows, const AerConfig& config, Eigen::Index target_channel = 0,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  std::vector<std::size_t> order = windows.trainable_indices();
  if (order.empty()) throw Error(ErrorKind::InsufficientData, "no window has both neighbouring targets");
  if (windows.window_size != config.window_size) {
    throw Error(ErrorKind::Dimension, "windows have size " + std::to_string(windows.window_size) +
                                          " but the model expects " + std::to_string(config.window_size));
  }

  TrainResult result{AerModel(config, windows.windows.front().cols()), {}};
  AerModel& model = result.model;
  model.set_target_channel(target_channel);
  Adam adam(model.parameters().size(), config.learning_rate);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  Eigen::VectorXd grad(model.parameters().size());
  AerModel::Workspace ws;
  std::vector<std::size_t> idx;
  std::vector<double> losses;
  const auto bs = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += bs) {
      const std::size_t end = std::min(order.size(), begin + bs);
      idx.assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
      grad.setZero();
      model.loss_and_gradient(Batch::from(windows, idx), config.gamma, &grad, &losses, ws);
      total = std::accumulate(losses.begin(), losses.end(), total);
      if (!grad.allFinite()) {
        throw Error(ErrorKind::Divergence, "non-finite gradient in epoch " + std::to_string(epoch));
      }
      adam.step(model.parameters(), grad);
    }
    const double mean = total / static_cast<double>(order.size());
    if (!std::isfinite(mean)) throw Error(ErrorKind::Divergence, "non-finite loss in epoch " + std::to_string(epoch));
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

/// Compares analytic gradients of the joint loss against central differences
/// on `coordinates` randomly chosen parameters. Relative error is
/// |a - f| / max(|a| + |f|, 1e-6); the floor keeps vanishing gradients from
/// dividing noise by noise.
inline GradientCheckResult gradient_check(const AerModel& model, const Eigen::MatrixXd& window,
                                          const WindowTruth& truth, double gamma, double epsilon,
                                          std::size_t coordinates = 64, std::uint64_t seed = 7) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) throw Error(ErrorKind::Config, "epsilon must lie in [1e-6, 1e-3]");
  const Batch batch = Batch::single(window, &truth);
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(model.parameters().size());
  model.loss_and_gradient(batch, gamma, &analytic);

  const auto total = static_cast<std::size_t>(model.parameters().size());
  std::vector<std::size_t> coords(total);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(std::min(coordinates, total));

  AerModel probe = model;
  GradientCheckResult res;
  for (std::size_t c : coords) {
    const auto k = static_cast<Eigen::Index>(c);
    const double orig = probe.parameters()(k);
    probe.parameters()(k) = orig + epsilon;
    const double up = probe.loss_and_gradient(batch, gamma, nullptr);
    probe.parameters()(k) = orig - epsilon;
    const double down = probe.loss_and_gradient(batch, gamma, nullptr);
    probe.parameters()(k) = orig;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = std::abs(analytic(k) - numeric) / std::max(std::abs(analytic(k)) + std::abs(numeric), 1e-6);
    res.max_relative_error = std::max(res.max_relative_error, err);
  }
  res.coordinates = coords.size();
  return res;
}

}  // namespace aer
