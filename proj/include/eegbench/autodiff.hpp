#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eegbench/errors.hpp"

// Reverse-mode differentiation over a recorded tape of tensor primitives.
namespace eegbench::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& s);
std::string shape_str(const Shape& s);

struct TensorData {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until backward touches it
  bool requires_grad = false;
};

// Shared handle; copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const noexcept { return data_ != nullptr; }
  const Shape& shape() const { return data_->shape; }
  std::size_t dim(std::size_t i) const { return data_->shape.at(i); }
  std::size_t size() const { return data_->value.size(); }
  bool requires_grad() const { return data_->requires_grad; }

  std::vector<double>& values() { return data_->value; }
  const std::vector<double>& values() const { return data_->value; }
  double item() const;

  // Gradient storage, zero-filled on first access. Constness is shallow, as for the handle.
  std::vector<double>& grad() const;
  void zero_grad() const;

  // Deep copy detached from any tape.
  Tensor clone() const;

  TensorData* raw() const noexcept { return data_.get(); }

 private:
  std::shared_ptr<TensorData> data_;
};

enum class PrimitiveKind {
  matmul,
  add,
  add_bias,
  conv1d,
  relu,
  sigmoid,
  tanh,
  mul,
  scale,
  dropout,
  batchnorm1d,
  reshape,
  slice,
  concat,
  sum,
  mse,
  lstm_cell,
};

std::string to_string(PrimitiveKind k);

// Ordered record of primitive applications. Backward walks it in exact reverse order.
// A disabled tape records nothing, which is how inference runs.
class Tape {
 public:
  struct Record {
    PrimitiveKind kind;
    std::vector<Tensor> inputs;
    std::vector<Tensor> outputs;
    std::function<void()> backward;
  };

  explicit Tape(bool enabled = true) : enabled_(enabled) {}

  bool enabled() const noexcept { return enabled_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<Record>& records() const noexcept { return records_; }

  void push(Record r);
  // Seeds d(loss)/d(loss) = 1 and propagates. Every tensor on the tape has its gradient
  // reset first, so anything on the tape that the loss does not reach ends with zeros.
  void backward(const Tensor& loss);
  void clear() { records_.clear(); }

 private:
  bool enabled_;
  std::vector<Record> records_;
};

// Running statistics owned by a batch-norm layer.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
  double eps = 1e-8;
};

struct Conv1dParams {
  std::size_t stride = 1;
  std::size_t pad = 0;
};

// --- primitives -----------------------------------------------------------------

// [m,k] x [k,n] -> [m,n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// Same-shape elementwise sum.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
// Adds bias[shape[1]] broadcast over every other axis.
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias);
// x [B, Cin, L], w [Cout, Cin, K], bias [Cout] (may be undefined) -> [B, Cout, Lout]
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& bias, Conv1dParams p);
Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& x, double factor);
// Inverted dropout: y = x * mask / keep_prob. The mask holds 0/1 entries drawn by the caller.
Tensor dropout(Tape& tape, const Tensor& x, std::span<const double> mask, double keep_prob);
// Normalizes each channel (axis 1) over batch and any trailing axis. Training mode uses
// batch statistics and updates `state`; evaluation mode uses the running statistics.
Tensor batchnorm1d(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                   bool training);
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);
// Flattens everything after axis 0.
Tensor flatten(Tape& tape, const Tensor& x);
Tensor slice(Tape& tape, const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
Tensor concat(Tape& tape, const std::vector<Tensor>& parts, std::size_t axis);
Tensor sum(Tape& tape, const Tensor& x);
// Mean over all elements of (pred - target)^2.
Tensor mse(Tape& tape, const Tensor& pred, const Tensor& target);

struct LstmState {
  Tensor h;  // [B, H]
  Tensor c;  // [B, H]
};

// One LSTM step. x [B, I], w_x [I, 4H], w_h [H, 4H], bias [4H]; gate order i, f, g, o.
LstmState lstm_cell(Tape& tape, const Tensor& x, const LstmState& prev, const Tensor& w_x, const Tensor& w_h,
                    const Tensor& bias);

// --- gradient checking ----------------------------------------------------------

// Builds a scalar loss on the given tape from the current parameter values.
using LossFn = std::function<Tensor(Tape&)>;

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t checked = 0;
};

// Max over every element of `params` of |analytic - central| / max(|analytic|, |central|, floor).
// The floor keeps exactly-zero gradients, such as a bias feeding batch norm, from being
// compared against finite-difference round-off.
GradCheckResult grad_check(const LossFn& loss_fn, const std::vector<Tensor>& params, double eps = 1e-5,
                           double floor = 1e-6);

}  // namespace eegbench::ad
