#pragma once

// Batched LSTM cell kernels with hand-written backpropagation through time.
//
// A batch of B sequences of length S is laid out column-block-wise: step s of
// every sequence occupies columns [s*B, (s+1)*B). Gate rows are ordered
// [input; forget; candidate; output].

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

namespace aer::detail {

using Eigen::Index;
using Eigen::MatrixXd;

/// Branch-free exp, accurate to about 1 ulp on [-708, 708] (inputs are
/// clamped to that range). Written so that loops over it auto-vectorize.
inline double exp_kernel(double x) {
  constexpr double kShift = 0x1.8p52;
  x = std::min(std::max(x, -708.0), 708.0);
  const double t = std::fma(x, 1.4426950408889634074, kShift);
  const double k = t - kShift;
  double r = std::fma(k, -6.93147180369123816490e-01, x);
  r = std::fma(k, -1.90821492927058770002e-10, r);
  double p = 2.08767569878680989792e-09;  // 1/12!
  p = std::fma(p, r, 2.50521083854417187751e-08);
  p = std::fma(p, r, 2.75573192239858906526e-07);
  p = std::fma(p, r, 2.75573192239858906526e-06);
  p = std::fma(p, r, 2.48015873015873015873e-05);
  p = std::fma(p, r, 1.98412698412698412698e-04);
  p = std::fma(p, r, 1.38888888888888888889e-03);
  p = std::fma(p, r, 8.33333333333333333333e-03);
  p = std::fma(p, r, 4.16666666666666666667e-02);
  p = std::fma(p, r, 1.66666666666666666667e-01);
  p = std::fma(p, r, 0.5);
  p = std::fma(p, r, 1.0);
  p = std::fma(p, r, 1.0);
  const std::int64_t ki = std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(kShift);
  return std::bit_cast<double>(std::bit_cast<std::int64_t>(p) + (ki << 52));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + exp_kernel(-x)); }

// 1 - 2 / (exp(2x) + 1) saturates cleanly at +-1.
inline double tanh_kernel(double x) { return 1.0 - 2.0 / (exp_kernel(2.0 * x) + 1.0); }

/// In-place activation of one contiguous column of 4h pre-activations.
inline void activate_gates(double* col, Index h) {
  for (Index r = 0; r < 2 * h; ++r) col[r] = sigmoid(col[r]);
  for (Index r = 2 * h; r < 3 * h; ++r) col[r] = tanh_kernel(col[r]);
  for (Index r = 3 * h; r < 4 * h; ++r) col[r] = sigmoid(col[r]);
}

/// Activations recorded during the forward pass and reused by backward.
struct LstmTrace {
  Index batch = 0;
  Index steps = 0;
  MatrixXd gates;      // 4h x B*S, post-activation
  MatrixXd cells;      // h x B*(S+1), block 0 holds the zero initial state
  MatrixXd cell_tanh;  // h x B*S
  MatrixXd hidden;     // h x B*(S+1), block 0 holds the zero initial state

  auto hidden_at(Index s) const { return hidden.middleCols((s + 1) * batch, batch); }
};

/// Runs the recurrence. `pre(s)` yields W x_s + bias for step s (4h x B).
template <typename PreFn>
void lstm_forward(const Eigen::Ref<const MatrixXd>& recurrent, Index batch, Index steps, PreFn&& pre,
                  LstmTrace& tr) {
  const Index h = recurrent.cols();
  tr.batch = batch;
  tr.steps = steps;
  tr.gates.resize(4 * h, batch * steps);
  tr.cells.resize(h, batch * (steps + 1));
  tr.cell_tanh.resize(h, batch * steps);
  tr.hidden.resize(h, batch * (steps + 1));
  tr.cells.leftCols(batch).setZero();
  tr.hidden.leftCols(batch).setZero();

  for (Index s = 0; s < steps; ++s) {
    auto g = tr.gates.middleCols(s * batch, batch);
    g.noalias() = pre(s);
    g.noalias() += recurrent * tr.hidden.middleCols(s * batch, batch);
    for (Index b = 0; b < batch; ++b) activate_gates(g.col(b).data(), h);

    const auto in = g.topRows(h).array();
    const auto forget = g.middleRows(h, h).array();
    const auto cand = g.middleRows(2 * h, h).array();
    const auto out = g.bottomRows(h).array();

    auto c = tr.cells.middleCols((s + 1) * batch, batch);
    c.array() = forget * tr.cells.middleCols(s * batch, batch).array() + in * cand;
    auto tc = tr.cell_tanh.middleCols(s * batch, batch);
    {
      const double* src = c.data();
      double* dst = tc.data();
      for (Index k = 0; k < h * batch; ++k) dst[k] = tanh_kernel(src[k]);
    }
    tr.hidden.middleCols((s + 1) * batch, batch).array() = out * tc.array();
  }
}

/// Backpropagates external hidden-state gradients `dh_ext` (h x B*S, step
/// order) and writes pre-activation gradients into `d_act` (4h x B*S).
inline void lstm_backward(const Eigen::Ref<const MatrixXd>& recurrent, const LstmTrace& tr,
                          const MatrixXd& dh_ext, MatrixXd& d_act) {
  const Index h = recurrent.cols();
  const Index batch = tr.batch;
  d_act.resize(4 * h, batch * tr.steps);

  const MatrixXd recurrent_t = recurrent.transpose();
  MatrixXd dh_next = MatrixXd::Zero(h, batch);
  Eigen::ArrayXXd dc_next = Eigen::ArrayXXd::Zero(h, batch);
  Eigen::ArrayXXd dh(h, batch), dc(h, batch);

  for (Index s = tr.steps - 1; s >= 0; --s) {
    const auto g = tr.gates.middleCols(s * batch, batch);
    const auto in = g.topRows(h).array();
    const auto forget = g.middleRows(h, h).array();
    const auto cand = g.middleRows(2 * h, h).array();
    const auto out = g.bottomRows(h).array();
    const auto tc = tr.cell_tanh.middleCols(s * batch, batch).array();
    const auto c_prev = tr.cells.middleCols(s * batch, batch).array();

    dh = dh_ext.middleCols(s * batch, batch).array() + dh_next.array();
    dc = dh * out * (1.0 - tc.square()) + dc_next;

    auto da = d_act.middleCols(s * batch, batch);
    da.topRows(h).array() = dc * cand * in * (1.0 - in);
    da.middleRows(h, h).array() = dc * c_prev * forget * (1.0 - forget);
    da.middleRows(2 * h, h).array() = dc * in * (1.0 - cand.square());
    da.bottomRows(h).array() = dh * tc * out * (1.0 - out);

    dc_next = dc * forget;
    dh_next.noalias() = recurrent_t * da;
  }
}

/// Sum of the S column blocks of a 4h x B*S matrix.
inline MatrixXd sum_blocks(const MatrixXd& m, Index batch) {
  MatrixXd acc = MatrixXd::Zero(m.rows(), batch);
  for (Index c = 0; c < m.cols(); c += batch) acc += m.middleCols(c, batch);
  return acc;
}

}  // namespace aer::detail
