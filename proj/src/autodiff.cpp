#include "eegbench/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "eegbench/kernels.hpp"

namespace eegbench::ad {

namespace kn = eegbench::kernels::parallel;

std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : data_(std::make_shared<TensorData>()) {
  if (numel(shape) != values.size())
    throw ShapeError("tensor: shape " + shape_str(shape) + " needs " + std::to_string(numel(shape)) +
                     " values, got " + std::to_string(values.size()));
  data_->shape = std::move(shape);
  data_->value = std::move(values);
  data_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return Tensor({1}, {v}, requires_grad); }

double Tensor::item() const {
  if (size() != 1) throw InvalidInput("item: tensor " + shape_str(shape()) + " is not a scalar");
  return data_->value[0];
}

std::vector<double>& Tensor::grad() const {
  if (data_->grad.size() != data_->value.size()) data_->grad.assign(data_->value.size(), 0.0);
  return data_->grad;
}

void Tensor::zero_grad() const { data_->grad.assign(data_->value.size(), 0.0); }

Tensor Tensor::clone() const { return Tensor(data_->shape, data_->value, data_->requires_grad); }

std::string to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::matmul: return "matmul";
    case PrimitiveKind::add: return "add";
    case PrimitiveKind::add_bias: return "add_bias";
    case PrimitiveKind::conv1d: return "conv1d";
    case PrimitiveKind::relu: return "relu";
    case PrimitiveKind::sigmoid: return "sigmoid";
    case PrimitiveKind::tanh: return "tanh";
    case PrimitiveKind::mul: return "mul";
    case PrimitiveKind::scale: return "scale";
    case PrimitiveKind::dropout: return "dropout";
    case PrimitiveKind::batchnorm1d: return "batchnorm1d";
    case PrimitiveKind::reshape: return "reshape";
    case PrimitiveKind::slice: return "slice";
    case PrimitiveKind::concat: return "concat";
    case PrimitiveKind::sum: return "sum";
    case PrimitiveKind::mse: return "mse";
    case PrimitiveKind::lstm_cell: return "lstm_cell";
  }
  return "?";
}

void Tape::push(Record r) {
  if (enabled_) records_.push_back(std::move(r));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw InvalidInput("backward: loss must be a scalar tensor, got " +
                       (loss.defined() ? shape_str(loss.shape()) : std::string("undefined")));
  const bool on_tape = std::any_of(records_.begin(), records_.end(), [&](const Record& r) {
    return std::any_of(r.outputs.begin(), r.outputs.end(), [&](const Tensor& t) { return t.raw() == loss.raw(); });
  });
  if (!on_tape) throw InvalidInput("backward: loss was not produced on this tape");
  for (auto& r : records_) {
    for (auto& t : r.inputs)
      if (t.defined() && t.requires_grad()) t.zero_grad();
    for (auto& t : r.outputs) t.zero_grad();
  }
  const_cast<Tensor&>(loss).grad()[0] = 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->backward();
}

namespace {

bool any_requires(std::initializer_list<const Tensor*> ts) {
  for (const Tensor* t : ts)
    if (t->defined() && t->requires_grad()) return true;
  return false;
}

[[noreturn]] void shape_fail(PrimitiveKind k, const std::string& detail) {
  throw ShapeError(to_string(k) + ": " + detail);
}

void require_same(PrimitiveKind k, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_fail(k, "shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
}

// Elementwise unary op with derivative expressed through input x and output y.
template <class F, class D>
Tensor unary(Tape& tape, PrimitiveKind kind, const Tensor& x, F f, D dfdx) {
  std::vector<double> v(x.size());
  const auto& xv = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(xv[i]);
  Tensor y(x.shape(), std::move(v), x.requires_grad());
  if (tape.enabled() && x.requires_grad()) {
    tape.push({kind, {x}, {y}, [x, y, dfdx]() mutable {
                 auto& gx = x.grad();
                 const auto& gy = y.grad();
                 const auto& xv = x.values();
                 const auto& yv = y.values();
                 for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * dfdx(xv[i], yv[i]);
               }});
  }
  return y;
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(0))
    shape_fail(PrimitiveKind::matmul, "cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  kn::gemm_nn(a.values(), b.values(), out, m, k, n, false);
  Tensor y({m, n}, std::move(out), any_requires({&a, &b}));
  if (tape.enabled() && y.requires_grad()) {
    tape.push({PrimitiveKind::matmul, {a, b}, {y}, [a, b, y, m, k, n]() mutable {
                 const auto& gy = y.grad();
                 if (a.requires_grad()) kn::gemm_nt(gy, b.values(), a.grad(), m, k, n, true);
                 if (b.requires_grad()) kn::gemm_tn(a.values(), gy, b.grad(), m, k, n, true);
               }});
  }
  return y;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same(PrimitiveKind::add, a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  Tensor y(a.shape(), std::move(out), any_requires({&a, &b}));
  if (tape.enabled() && y.requires_grad()) {
    tape.push({PrimitiveKind::add, {a, b}, {y}, [a, b, y]() mutable {
                 const auto& gy = y.grad();
                 if (a.requires_grad()) {
                   auto& g = a.grad();
                   for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
                 }
                 if (b.requires_grad()) {
                   auto& g = b.grad();
                   for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
                 }
               }});
  }
  return y;
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  if (x.shape().size() < 2 || bias.shape().size() != 1 || bias.dim(0) != x.dim(1))
    shape_fail(PrimitiveKind::add_bias, "bias " + shape_str(bias.shape()) + " vs input " + shape_str(x.shape()));
  const std::size_t outer = x.dim(0), ch = x.dim(1), inner = x.size() / (outer * ch);
  std::vector<double> out(x.values());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t c = 0; c < ch; ++c)
      for (std::size_t i = 0; i < inner; ++i) out[(o * ch + c) * inner + i] += bias.values()[c];
  Tensor y(x.shape(), std::move(out), any_requires({&x, &bias}));
  if (tape.enabled() && y.requires_grad()) {
    tape.push({PrimitiveKind::add_bias, {x, bias}, {y}, [x, bias, y, outer, ch, inner]() mutable {
                 const auto& gy = y.grad();
                 if (x.requires_grad()) {
                   auto& g = x.grad();
                   for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
                 }
                 if (bias.requires_grad()) {
                   auto& g = bias.grad();
                   for (std::size_t c = 0; c < ch; ++c) {
                     double acc = 0.0;
                     for (std::size_t o = 0; o < outer; ++o)
                       for (std::size_t i = 0; i < inner; ++i) acc += gy[(o * ch + c) * inner + i];
                     g[c] += acc;
                   }
                 }
               }});
  }
  return y;
}

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& bias, Conv1dParams p) {
  if (x.shape().size() != 3 || w.shape().size() != 3 || w.dim(1) != x.dim(1))
    shape_fail(PrimitiveKind::conv1d, "input " + shape_str(x.shape()) + " vs kernel " + shape_str(w.shape()));
  if (bias.defined() && (bias.shape().size() != 1 || bias.dim(0) != w.dim(0)))
    shape_fail(PrimitiveKind::conv1d, "bias " + shape_str(bias.shape()) + " vs kernel " + shape_str(w.shape()));
  if (p.stride == 0 || x.dim(2) + 2 * p.pad < w.dim(2))
    shape_fail(PrimitiveKind::conv1d, "kernel longer than padded input");
  kernels::Conv1dShape s{x.dim(0), x.dim(1), w.dim(0), x.dim(2), w.dim(2), p.stride, p.pad};
  std::vector<double> out(s.batch * s.out_channels * s.out_length());
  const std::vector<double> no_bias;
  kn::conv1d_forward(s, x.values(), w.values(), bias.defined() ? bias.values() : no_bias, out);
  Tensor y({s.batch, s.out_channels, s.out_length()}, std::move(out), any_requires({&x, &w, &bias}));
  if (tape.enabled() && y.requires_grad()) {
    tape.push({PrimitiveKind::conv1d, {x, w, bias}, {y}, [x, w, bias, y, s]() mutable {
                 const auto& gy = y.grad();
                 if (x.requires_grad()) kn::conv1d_backward_input(s, gy, w.values(), x.grad());
                 const bool gb = bias.defined() && bias.requires_grad();
                 if (w.requires_grad()) {
                   std::vector<double> unused;
                   kn::conv1d_backward_weight(s, gy, x.values(), w.grad(), gb ? std::span<double>(bias.grad())
                                                                             : std::span<double>(unused));
                 } else if (gb) {
                   std::vector<double> dw(w.size(), 0.0);
                   kn::conv1d_backward_weight(s, gy, x.values(), dw, bias.grad());
                 }
               }});
  }
  return y;
}

Tensor relu(Tape& tape, const Tensor& x) {
  return unary(
      tape, PrimitiveKind::relu, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  return unary(
      tape, PrimitiveKind::sigmoid, x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(Tape& tape, const Tensor& x) {
  return unary(
      tape, PrimitiveKind::tanh, x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same(PrimitiveKind::mul, a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  Tensor y(a.shape(), std::move(out), any_requires({&a, &b}));
  if (tape.enabled() && y.requires_grad()) {
    tape.push({PrimitiveKind::mul, {a, b}, {y}, [a, b, y]() mutable {
                 const auto& gy = y.grad();
                 if (a.requires_grad()) {
                   auto& g = a.grad();
                   for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * b.values()[i];
                 }
                 if (b.requires_grad()) {
                   auto& g = b.grad();
                   for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * a.values()[i];
                 }
               }});
  }
  return y;
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  std::vector<double> out(x.values());
  for (double& v : out) v *= factor;
  Tensor y(x.shape(), std::move(out), x.requires_grad());
  if (tape.enabled() && x.requires_grad()) {
    tape.push({PrimitiveKind::scale, {x}, {y}, [x, y, factor]() mutable {
                 auto& g = x.grad();
                 const auto& gy = y.grad();
                 for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * factor;
               }});
  }
  return y;
}

Tensor dropout(Tape& tape, const Tensor& x, std::span<const double> mask, double keep_prob) {
  if (mask.size() != x.size())
    shape_fail(PrimitiveKind::dropout,
               "mask of " + std::to_string(mask.size()) + " entries for input " + shape_str(x.shape()));
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw InvalidInput("dropout: keep probability must be in (0, 1]");
  std::vector<double> factor(mask.size());
  for (std::size_t i = 0; i < factor.size(); ++i) factor[i] = mask[i] / keep_prob;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] * factor[i];
  Tensor y(x.shape(), std::move(out), x.requires_grad());
  if (tape.enabled() && x.requires_grad()) {
    tape.push({PrimitiveKind::dropout, {x}, {y}, [x, y, factor = std::move(factor)]() mutable {
                 auto& g = x.grad();
                 const auto& gy = y.grad();
                 for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * factor[i];
               }});
  }
  return y;
}

Tensor batchnorm1d(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                   bool training) {
  if (x.shape().size() < 2) shape_fail(PrimitiveKind::batchnorm1d, "input " + shape_str(x.shape()));
  const std::size_t outer = x.dim(0), ch = x.dim(1), inner = x.size() / (outer * ch);
  if (gamma.size() != ch || beta.size() != ch)
    shape_fail(PrimitiveKind::batchnorm1d, "affine parameters do not match " + std::to_string(ch) + " channels");
  if (state.running_mean.size() != ch) {
    state.running_mean.assign(ch, 0.0);
    state.running_var.assign(ch, 1.0);
  }
  const double count = static_cast<double>(outer * inner);
  std::vector<double> mean(ch), inv_std(ch);
  for (std::size_t c = 0; c < ch; ++c) {
    if (training) {
      double m = 0.0;
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) m += x.values()[(o * ch + c) * inner + i];
      m /= count;
      double var = 0.0;
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) {
          const double d = x.values()[(o * ch + c) * inner + i] - m;
          var += d * d;
        }
      var /= count;
      mean[c] = m;
      inv_std[c] = 1.0 / std::sqrt(var + state.eps);
      state.running_mean[c] = state.momentum * state.running_mean[c] + (1.0 - state.momentum) * m;
      state.running_var[c] = state.momentum * state.running_var[c] + (1.0 - state.momentum) * var;
    } else {
      mean[c] = state.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
    }
  }
  std::vector<double> xhat(x.size()), out(x.size());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t c = 0; c < ch; ++c)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t idx = (o * ch + c) * inner + i;
        xhat[idx] = (x.values()[idx] - mean[c]) * inv_std[c];
        out[idx] = gamma.values()[c] * xhat[idx] + beta.values()[c];
      }
  Tensor y(x.shape(), std::move(out), any_requires({&x, &gamma, &beta}));
  if (tape.enabled() && y.requires_grad()) {
    tape.push({PrimitiveKind::batchnorm1d, {x, gamma, beta}, {y},
               [x, gamma, beta, y, xhat = std::move(xhat), inv_std, outer, ch, inner, count, training]() mutable {
                 const auto& gy = y.grad();
                 for (std::size_t c = 0; c < ch; ++c) {
                   double sum_gy = 0.0, sum_gy_xhat = 0.0;
                   for (std::size_t o = 0; o < outer; ++o)
                     for (std::size_t i = 0; i < inner; ++i) {
                       const std::size_t idx = (o * ch + c) * inner + i;
                       sum_gy += gy[idx];
                       sum_gy_xhat += gy[idx] * xhat[idx];
                     }
                   if (gamma.requires_grad()) gamma.grad()[c] += sum_gy_xhat;
                   if (beta.requires_grad()) beta.grad()[c] += sum_gy;
                   if (!x.requires_grad()) continue;
                   auto& gx = x.grad();
                   const double g = gamma.values()[c];
                   for (std::size_t o = 0; o < outer; ++o)
                     for (std::size_t i = 0; i < inner; ++i) {
                       const std::size_t idx = (o * ch + c) * inner + i;
                       if (training)
                         gx[idx] += g * inv_std[c] / count * (count * gy[idx] - sum_gy - xhat[idx] * sum_gy_xhat);
                       else
                         gx[idx] += g * inv_std[c] * gy[idx];
                     }
                 }
               }});
  }
  return y;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (numel(shape) != x.size())
    shape_fail(PrimitiveKind::reshape, "cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  Tensor y(std::move(shape), x.values(), x.requires_grad());
  if (tape.enabled() && x.requires_grad()) {
    tape.push({PrimitiveKind::reshape, {x}, {y}, [x, y]() mutable {
                 auto& g = x.grad();
                 const auto& gy = y.grad();
                 for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
               }});
  }
  return y;
}

Tensor flatten(Tape& tape, const Tensor& x) {
  if (x.shape().empty()) shape_fail(PrimitiveKind::reshape, "cannot flatten a rank-0 tensor");
  return reshape(tape, x, {x.dim(0), x.size() / x.dim(0)});
}

Tensor slice(Tape& tape, const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  if (axis >= x.shape().size() || start + length > x.dim(axis) || length == 0)
    shape_fail(PrimitiveKind::slice, "range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                                         ") on axis " + std::to_string(axis) + " of " + shape_str(x.shape()));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::size_t i = axis + 1; i < x.shape().size(); ++i) inner *= x.dim(i);
  const std::size_t dim = x.dim(axis);
  Shape shape = x.shape();
  shape[axis] = length;
  std::vector<double> out(outer * length * inner);
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(x.values().begin() + static_cast<std::ptrdiff_t>((o * dim + start) * inner), length * inner,
                out.begin() + static_cast<std::ptrdiff_t>(o * length * inner));
  Tensor y(std::move(shape), std::move(out), x.requires_grad());
  if (tape.enabled() && x.requires_grad()) {
    tape.push({PrimitiveKind::slice, {x}, {y}, [x, y, outer, inner, dim, start, length]() mutable {
                 auto& g = x.grad();
                 const auto& gy = y.grad();
                 for (std::size_t o = 0; o < outer; ++o)
                   for (std::size_t j = 0; j < length * inner; ++j)
                     g[(o * dim + start) * inner + j] += gy[o * length * inner + j];
               }});
  }
  return y;
}

Tensor concat(Tape& tape, const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) shape_fail(PrimitiveKind::concat, "no inputs");
  const Shape& ref = parts.front().shape();
  if (axis >= ref.size()) shape_fail(PrimitiveKind::concat, "axis out of range for " + shape_str(ref));
  std::size_t total = 0;
  bool req = false;
  for (const auto& p : parts) {
    if (p.shape().size() != ref.size())
      shape_fail(PrimitiveKind::concat, shape_str(p.shape()) + " vs " + shape_str(ref));
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (i != axis && p.dim(i) != ref[i])
        shape_fail(PrimitiveKind::concat, shape_str(p.shape()) + " vs " + shape_str(ref));
    total += p.dim(axis);
    req = req || p.requires_grad();
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= ref[i];
  for (std::size_t i = axis + 1; i < ref.size(); ++i) inner *= ref[i];
  Shape shape = ref;
  shape[axis] = total;
  std::vector<double> out(outer * total * inner);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t d = p.dim(axis);
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(p.values().begin() + static_cast<std::ptrdiff_t>(o * d * inner), d * inner,
                  out.begin() + static_cast<std::ptrdiff_t>((o * total + off) * inner));
    off += d;
  }
  Tensor y(std::move(shape), std::move(out), req);
  if (tape.enabled() && req) {
    tape.push({PrimitiveKind::concat, parts, {y}, [parts, y, offsets, outer, inner, total, axis]() mutable {
                 const auto& gy = y.grad();
                 for (std::size_t k = 0; k < parts.size(); ++k) {
                   if (!parts[k].requires_grad()) continue;
                   auto& g = parts[k].grad();
                   const std::size_t d = parts[k].dim(axis);
                   for (std::size_t o = 0; o < outer; ++o)
                     for (std::size_t j = 0; j < d * inner; ++j)
                       g[o * d * inner + j] += gy[(o * total + offsets[k]) * inner + j];
                 }
               }});
  }
  return y;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  Tensor y({1}, {acc}, x.requires_grad());
  if (tape.enabled() && x.requires_grad()) {
    tape.push({PrimitiveKind::sum, {x}, {y}, [x, y]() mutable {
                 auto& g = x.grad();
                 const double gy = y.grad()[0];
                 for (double& v : g) v += gy;
               }});
  }
  return y;
}

Tensor mse(Tape& tape, const Tensor& pred, const Tensor& target) {
  require_same(PrimitiveKind::mse, pred, target);
  const double n = static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.values()[i] - target.values()[i];
    acc += d * d;
  }
  Tensor y({1}, {acc / n}, any_requires({&pred, &target}));
  if (tape.enabled() && y.requires_grad()) {
    tape.push({PrimitiveKind::mse, {pred, target}, {y}, [pred, target, y, n]() mutable {
                 const double gy = y.grad()[0];
                 for (std::size_t i = 0; i < pred.size(); ++i) {
                   const double d = 2.0 * (pred.values()[i] - target.values()[i]) / n * gy;
                   if (pred.requires_grad()) pred.grad()[i] += d;
                   if (target.requires_grad()) target.grad()[i] -= d;
                 }
               }});
  }
  return y;
}

LstmState lstm_cell(Tape& tape, const Tensor& x, const LstmState& prev, const Tensor& w_x, const Tensor& w_h,
                    const Tensor& bias) {
  constexpr auto kind = PrimitiveKind::lstm_cell;
  if (x.shape().size() != 2 || prev.h.shape().size() != 2) shape_fail(kind, "input " + shape_str(x.shape()));
  const std::size_t batch = x.dim(0), in = x.dim(1), hid = prev.h.dim(1);
  if (prev.h.dim(0) != batch || prev.c.shape() != prev.h.shape())
    shape_fail(kind, "state " + shape_str(prev.h.shape()) + " vs input " + shape_str(x.shape()));
  if (w_x.shape() != Shape{in, 4 * hid} || w_h.shape() != Shape{hid, 4 * hid} || bias.shape() != Shape{4 * hid})
    shape_fail(kind, "weights " + shape_str(w_x.shape()) + ", " + shape_str(w_h.shape()) + ", " +
                         shape_str(bias.shape()) + " for input " + std::to_string(in) + " hidden " +
                         std::to_string(hid));
  const std::size_t g4 = 4 * hid;
  std::vector<double> z(batch * g4);
  kn::gemm_nn(x.values(), w_x.values(), z, batch, in, g4, false);
  kn::gemm_nn(prev.h.values(), w_h.values(), z, batch, hid, g4, true);
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  // gates holds activated i, f, g, o per row
  std::vector<double> gates(batch * g4), c_new(batch * hid), h_new(batch * hid), tanh_c(batch * hid);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < hid; ++j) {
      const std::size_t r = b * g4;
      const double i_g = sig(z[r + j] + bias.values()[j]);
      const double f_g = sig(z[r + hid + j] + bias.values()[hid + j]);
      const double g_g = std::tanh(z[r + 2 * hid + j] + bias.values()[2 * hid + j]);
      const double o_g = sig(z[r + 3 * hid + j] + bias.values()[3 * hid + j]);
      gates[r + j] = i_g;
      gates[r + hid + j] = f_g;
      gates[r + 2 * hid + j] = g_g;
      gates[r + 3 * hid + j] = o_g;
      const std::size_t s = b * hid + j;
      c_new[s] = f_g * prev.c.values()[s] + i_g * g_g;
      tanh_c[s] = std::tanh(c_new[s]);
      h_new[s] = o_g * tanh_c[s];
    }
  }
  const bool req = any_requires({&x, &prev.h, &prev.c, &w_x, &w_h, &bias});
  Tensor h({batch, hid}, std::move(h_new), req);
  Tensor c({batch, hid}, std::move(c_new), req);
  if (tape.enabled() && req) {
    Tensor h_prev = prev.h, c_prev = prev.c;
    tape.push({kind, {x, h_prev, c_prev, w_x, w_h, bias}, {h, c},
               [=, gates = std::move(gates), tanh_c = std::move(tanh_c)]() mutable {
                 const auto& gh = h.grad();
                 const auto& gc = c.grad();
                 std::vector<double> dz(batch * g4);
                 for (std::size_t b = 0; b < batch; ++b) {
                   for (std::size_t j = 0; j < hid; ++j) {
                     const std::size_t r = b * g4, s = b * hid + j;
                     const double i_g = gates[r + j], f_g = gates[r + hid + j];
                     const double g_g = gates[r + 2 * hid + j], o_g = gates[r + 3 * hid + j];
                     const double d_o = gh[s] * tanh_c[s];
                     const double d_c = gc[s] + gh[s] * o_g * (1.0 - tanh_c[s] * tanh_c[s]);
                     dz[r + j] = d_c * g_g * i_g * (1.0 - i_g);
                     dz[r + hid + j] = d_c * c_prev.values()[s] * f_g * (1.0 - f_g);
                     dz[r + 2 * hid + j] = d_c * i_g * (1.0 - g_g * g_g);
                     dz[r + 3 * hid + j] = d_o * o_g * (1.0 - o_g);
                     if (c_prev.requires_grad()) c_prev.grad()[s] += d_c * f_g;
                   }
                 }
                 if (bias.requires_grad()) {
                   auto& gb = bias.grad();
                   for (std::size_t b = 0; b < batch; ++b)
                     for (std::size_t k = 0; k < g4; ++k) gb[k] += dz[b * g4 + k];
                 }
                 if (w_x.requires_grad()) kn::gemm_tn(x.values(), dz, w_x.grad(), batch, in, g4, true);
                 if (w_h.requires_grad()) kn::gemm_tn(h_prev.values(), dz, w_h.grad(), batch, hid, g4, true);
                 if (x.requires_grad()) kn::gemm_nt(dz, w_x.values(), x.grad(), batch, in, g4, true);
                 if (h_prev.requires_grad()) kn::gemm_nt(dz, w_h.values(), h_prev.grad(), batch, hid, g4, true);
               }});
  }
  return {h, c};
}

GradCheckResult grad_check(const LossFn& loss_fn, const std::vector<Tensor>& params, double eps, double floor) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw InvalidInput("grad_check: eps must lie in [1e-7, 1e-3]");
  for (auto p : params) p.zero_grad();
  Tape tape;
  const Tensor loss = loss_fn(tape);
  if (!std::isfinite(loss.item())) throw NumericError("grad_check: non-finite loss");
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  for (auto p : params) analytic.push_back(p.grad());
  tape.clear();

  GradCheckResult res;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor p = params[k];
    auto& v = p.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      Tape off(false);
      v[i] = orig + eps;
      const double up = loss_fn(off).item();
      v[i] = orig - eps;
      const double down = loss_fn(off).item();
      v[i] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) throw NumericError("grad_check: non-finite perturbed loss");
      const double central = (up - down) / (2.0 * eps);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(central), floor});
      res.max_rel_error = std::max(res.max_rel_error, std::abs(a - central) / denom);
      ++res.checked;
    }
  }
  return res;
}

}  // namespace eegbench::ad
