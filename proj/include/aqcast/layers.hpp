#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aqcast/matrix.hpp"
#include "aqcast/rng.hpp"

namespace aqcast {

enum class Activation { identity, relu };

/// Named view onto one parameter block and its gradient accumulator.
/// Optimizers and the checkpoint writer walk these in registration order.
struct ParamRef {
  std::string name;
  Matrix* value;
  Matrix* grad;
};

// --- dense ------------------------------------------------------------------

struct DenseCache {
  Matrix x;    // B x in
  Matrix pre;  // B x out, pre-activation
};

/// Fully connected layer y = act(x W^T + b), weights out x in.
class DenseLayer {
 public:
  DenseLayer(std::size_t in, std::size_t out, Activation act);

  /// Uniform weights in [-1/sqrt(in), +1/sqrt(in)], zero bias.
  void init(Rng& rng);

  Matrix forward(const Matrix& x, DenseCache* cache) const;
  /// Accumulates into the weight/bias gradients; returns dL/dx.
  Matrix backward(const Matrix& dy, const DenseCache& cache);

  void zero_grads();
  std::vector<ParamRef> params(const std::string& prefix);
  std::size_t param_count() const { return w_.size() + b_.size(); }

  std::size_t in_size() const { return in_; }
  std::size_t out_size() const { return out_; }
  Activation activation() const { return act_; }

  Matrix& weights() { return w_; }
  Matrix& bias() { return b_; }
  const Matrix& weights() const { return w_; }
  const Matrix& bias() const { return b_; }

 private:
  std::size_t in_, out_;
  Activation act_;
  Matrix w_, b_;    // out x in, 1 x out
  Matrix gw_, gb_;
};

// --- LSTM -------------------------------------------------------------------

/// Everything the backward pass needs from one forward run over a sequence.
struct LstmCache {
  std::vector<Matrix> x;       // per step, B x I
  std::vector<Matrix> gate_i;  // sigmoid input gate, B x H
  std::vector<Matrix> gate_f;
  std::vector<Matrix> gate_g;  // tanh candidate
  std::vector<Matrix> gate_o;
  std::vector<Matrix> c;       // cell state after the step
  std::vector<Matrix> h;       // hidden state after the step
  std::vector<Matrix> tanh_c;
  std::size_t steps() const { return x.size(); }
};

/// Standard non-peephole LSTM layer: sigmoid input/forget/output gates,
/// tanh candidate, c_t = f*c_{t-1} + i*g, h_t = o*tanh(c_t). Gradients
/// come from backpropagation through the unrolled sequence.
class LstmLayer {
 public:
  LstmLayer(std::size_t input, std::size_t hidden);

  /// Input weights uniform in +-1/sqrt(I), recurrent in +-1/sqrt(H);
  /// biases zero except the forget-gate bias, which starts at 1.
  void init(Rng& rng);

  /// One cell step for a batch of rows. h_prev/c_prev are B x H;
  /// writes h_t/c_t and, when cache is given, appends the step to it.
  void cell_step(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                 Matrix& h_t, Matrix& c_t, LstmCache* cache) const;

  /// Runs the whole sequence from zero initial state; returns hidden
  /// states per step (each B x H).
  std::vector<Matrix> forward(const std::vector<Matrix>& xs, LstmCache* cache) const;

  /// dh_seq holds dL/dh_t for every step (zero matrices where a step's
  /// output is unused). Accumulates parameter gradients; returns dL/dx_t
  /// per step.
  std::vector<Matrix> backward(const std::vector<Matrix>& dh_seq, const LstmCache& cache);

  void zero_grads();
  std::vector<ParamRef> params(const std::string& prefix);
  /// 4 * (H*(I+H) + H)
  std::size_t param_count() const;

  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }

  // Per-gate access for tests and surgical parameter edits.
  Matrix& w(char gate);
  Matrix& r(char gate);
  Matrix& b(char gate);

 private:
  std::size_t input_, hidden_;
  Matrix wi_, wf_, wg_, wo_;  // H x I
  Matrix ri_, rf_, rg_, ro_;  // H x H
  Matrix bi_, bf_, bg_, bo_;  // 1 x H
  Matrix gwi_, gwf_, gwg_, gwo_;
  Matrix gri_, grf_, grg_, gro_;
  Matrix gbi_, gbf_, gbg_, gbo_;
};

/// Mean squared error over all elements with its gradient,
/// d loss / d pred = 2 (pred - target) / element_count.
struct LossResult {
  double loss;
  Matrix gradient;
};

LossResult mse_loss(const Matrix& pred, const Matrix& target);

}  // namespace aqcast
