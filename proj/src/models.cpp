#include "eegbench/models.hpp"

#include <cmath>

namespace eegbench {

using ad::Tape;
using ad::Tensor;

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::FCNN: return "fcnn";
    case Architecture::SimpleCNN: return "simple_cnn";
    case Architecture::ComplexCNN: return "complex_cnn";
    case Architecture::RNN: return "rnn";
  }
  return "?";
}

Architecture parse_architecture(const std::string& s) {
  if (s == "fcnn" || s == "FCNN") return Architecture::FCNN;
  if (s == "simple_cnn" || s == "SimpleCNN") return Architecture::SimpleCNN;
  if (s == "complex_cnn" || s == "ComplexCNN") return Architecture::ComplexCNN;
  if (s == "rnn" || s == "RNN") return Architecture::RNN;
  throw SpecError("unknown architecture '" + s + "'");
}

void ModelSpec::validate() const {
  if (input_len < 16) throw SpecError("model: input_len must be >= 16, got " + std::to_string(input_len));
  if (feature_maps < 1 || branch_width < 1 || hidden_size < 1) throw SpecError("model: widths must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw SpecError("model: dropout rate must lie in [0, 1)");
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (const auto& p : params_) out.push_back(p.tensor);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

std::vector<NamedBatchNorm> Model::batchnorm_states() {
  std::vector<NamedBatchNorm> out;
  for (auto& [name, st] : norms_) out.push_back({name, st});
  return out;
}

void Model::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

Tensor Model::add_param(std::string name, ad::Shape shape, std::vector<double> values) {
  Tensor t(std::move(shape), std::move(values), true);
  params_.push_back({std::move(name), t});
  return t;
}

Tensor Model::add_uniform(std::string name, ad::Shape shape, double limit, CounterRng& rng) {
  std::vector<double> v(ad::numel(shape));
  for (double& x : v) x = rng.uniform(-limit, limit);
  return add_param(std::move(name), std::move(shape), std::move(v));
}

Tensor Model::add_constant(std::string name, ad::Shape shape, double value) {
  const std::size_t n = ad::numel(shape);
  return add_param(std::move(name), std::move(shape), std::vector<double>(n, value));
}

Tensor Model::maybe_dropout(Tape& tape, const Tensor& x, ForwardContext& ctx) const {
  if (!ctx.training || spec_.dropout == 0.0) return x;
  if (!ctx.rng) throw InvalidInput("forward: training with dropout needs a generator");
  const double keep = 1.0 - spec_.dropout;
  std::vector<double> mask(x.size());
  for (double& m : mask) m = ctx.rng->uniform() < keep ? 1.0 : 0.0;
  return ad::dropout(tape, x, mask, keep);
}

Model::Dense Model::make_dense(const std::string& name, std::size_t in, std::size_t out, Init init,
                               CounterRng& rng) {
  const double limit = init == Init::he ? std::sqrt(6.0 / static_cast<double>(in))
                                        : std::sqrt(6.0 / static_cast<double>(in + out));
  Dense d;
  d.w = add_uniform(name + ".weight", {in, out}, limit, rng);
  d.b = add_constant(name + ".bias", {out}, 0.0);
  return d;
}

Model::Conv Model::make_conv(const std::string& name, std::size_t in, std::size_t out, std::size_t k, Init init,
                             CounterRng& rng) {
  const double fan_in = static_cast<double>(in * k);
  const double fan_out = static_cast<double>(out * k);
  const double limit = init == Init::he ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
  Conv c;
  c.w = add_uniform(name + ".weight", {out, in, k}, limit, rng);
  c.b = add_constant(name + ".bias", {out}, 0.0);
  c.pad = (k - 1) / 2;
  return c;
}

Model::Norm Model::make_norm(const std::string& name, std::size_t ch) {
  Norm n;
  n.gamma = add_constant(name + ".gamma", {ch}, 1.0);
  n.beta = add_constant(name + ".beta", {ch}, 0.0);
  n.state = std::make_unique<ad::BatchNormState>();
  n.state->running_mean.assign(ch, 0.0);
  n.state->running_var.assign(ch, 1.0);
  norms_.emplace_back(name, n.state.get());
  return n;
}

Tensor Model::apply(Tape& tape, const Dense& d, const Tensor& x) {
  return ad::add_bias(tape, ad::matmul(tape, x, d.w), d.b);
}

Tensor Model::apply(Tape& tape, const Conv& c, const Tensor& x) {
  return ad::conv1d(tape, x, c.w, c.b, {1, c.pad});
}

Tensor Model::apply(Tape& tape, Norm& n, const Tensor& x, const ForwardContext& ctx) {
  return ad::batchnorm1d(tape, x, n.gamma, n.beta, *n.state, ctx.training);
}

namespace {

void check_input(const ModelSpec& spec, const Tensor& x) {
  if (x.shape().size() != 2 || x.dim(1) != spec.input_len)
    throw ShapeError(to_string(spec.architecture) + ": expected input [batch, " + std::to_string(spec.input_len) +
                     "], got " + ad::shape_str(x.shape()));
}

class Fcnn final : public Model {
 public:
  explicit Fcnn(const ModelSpec& spec) : Model(spec) {
    CounterRng rng(spec.init_seed, 0xF0);
    const std::size_t n = spec.input_len;
    for (int i = 0; i < 4; ++i) hidden_.push_back(make_dense("dense" + std::to_string(i), n, n, Init::he, rng));
    out_ = make_dense("dense4", n, n, Init::xavier, rng);
  }

  Tensor forward(Tape& tape, const Tensor& x, ForwardContext& ctx) override {
    check_input(spec_, x);
    Tensor h = x;
    for (const auto& d : hidden_) h = maybe_dropout(tape, ad::relu(tape, apply(tape, d, h)), ctx);
    return apply(tape, out_, h);
  }

 private:
  std::vector<Dense> hidden_;
  Dense out_;
};

class SimpleCnn final : public Model {
 public:
  explicit SimpleCnn(const ModelSpec& spec) : Model(spec) {
    CounterRng rng(spec.init_seed, 0x5C);
    std::size_t in = 1;
    for (int i = 0; i < 4; ++i) {
      convs_.push_back(make_conv("conv" + std::to_string(i), in, spec.feature_maps, 3, Init::he, rng));
      norms_bn_.push_back(make_norm("bn" + std::to_string(i), spec.feature_maps));
      in = spec.feature_maps;
    }
    out_ = make_dense("dense", spec.feature_maps * spec.input_len, spec.input_len, Init::xavier, rng);
  }

  Tensor forward(Tape& tape, const Tensor& x, ForwardContext& ctx) override {
    check_input(spec_, x);
    Tensor h = ad::reshape(tape, x, {x.dim(0), 1, spec_.input_len});
    for (std::size_t i = 0; i < convs_.size(); ++i)
      h = ad::relu(tape, apply(tape, norms_bn_[i], apply(tape, convs_[i], h), ctx));
    return apply(tape, out_, ad::flatten(tape, h));
  }

 private:
  std::vector<Conv> convs_;
  std::vector<Norm> norms_bn_;
  Dense out_;
};

class ComplexCnn final : public Model {
 public:
  static constexpr std::size_t kKernels[3] = {3, 5, 7};

  explicit ComplexCnn(const ModelSpec& spec) : Model(spec) {
    CounterRng rng(spec.init_seed, 0xCC);
    const std::size_t w = spec.branch_width;
    stem_ = make_conv("stem", 1, w, 3, Init::he, rng);
    stem_bn_ = make_norm("stem_bn", w);
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t r = 0; r < 2; ++r) {
        const std::string name = "branch" + std::to_string(kKernels[b]) + ".block" + std::to_string(r);
        auto blk = std::make_unique<ResidualBlock>();
        Conv c1 = make_conv(name + ".conv1", w, w, kKernels[b], Init::he, rng);
        Norm n1 = make_norm(name + ".bn1", w);
        Conv c2 = make_conv(name + ".conv2", w, w, kKernels[b], Init::he, rng);
        Norm n2 = make_norm(name + ".bn2", w);
        blk->conv1_w = c1.w;
        blk->conv1_b = c1.b;
        blk->bn1_gamma = n1.gamma;
        blk->bn1_beta = n1.beta;
        blk->conv2_w = c2.w;
        blk->conv2_b = c2.b;
        blk->bn2_gamma = n2.gamma;
        blk->bn2_beta = n2.beta;
        blk->pad = c1.pad;
        // The block owns its running statistics; rebind the registry entries.
        blk->bn1 = *n1.state;
        blk->bn2 = *n2.state;
        norms_[norms_.size() - 2].second = &blk->bn1;
        norms_[norms_.size() - 1].second = &blk->bn2;
        blocks_.push_back(std::move(blk));
      }
    }
    merge_ = make_conv("merge", 3 * w, w, 1, Init::xavier, rng);
    out_ = make_dense("dense", w * spec.input_len, spec.input_len, Init::xavier, rng);
  }

  Tensor forward(Tape& tape, const Tensor& x, ForwardContext& ctx) override {
    check_input(spec_, x);
    Tensor h = ad::reshape(tape, x, {x.dim(0), 1, spec_.input_len});
    h = ad::relu(tape, apply(tape, stem_bn_, apply(tape, stem_, h), ctx));
    std::vector<Tensor> branches;
    for (std::size_t b = 0; b < 3; ++b) {
      Tensor t = h;
      for (std::size_t r = 0; r < 2; ++r) t = blocks_[2 * b + r]->forward(tape, t, ctx);
      branches.push_back(t);
    }
    Tensor merged = apply(tape, merge_, ad::concat(tape, branches, 1));
    return apply(tape, out_, ad::flatten(tape, merged));
  }

 private:
  Conv stem_;
  Norm stem_bn_;
  std::vector<std::unique_ptr<ResidualBlock>> blocks_;
  Conv merge_;
  Dense out_;
};

class Rnn final : public Model {
 public:
  explicit Rnn(const ModelSpec& spec) : Model(spec) {
    CounterRng rng(spec.init_seed, 0x22);
    const std::size_t h = spec.hidden_size;
    const double lim_x = std::sqrt(6.0 / static_cast<double>(1 + 4 * h));
    const double lim_h = std::sqrt(6.0 / static_cast<double>(h + 4 * h));
    w_x_ = add_uniform("lstm.w_x", {1, 4 * h}, lim_x, rng);
    w_h_ = add_uniform("lstm.w_h", {h, 4 * h}, lim_h, rng);
    std::vector<double> b(4 * h, 0.0);
    for (std::size_t j = h; j < 2 * h; ++j) b[j] = 1.0;  // forget gate
    bias_ = add_param("lstm.bias", {4 * h}, std::move(b));
    const std::size_t n = spec.input_len;
    d0_ = make_dense("dense0", n * h, n, Init::he, rng);
    d1_ = make_dense("dense1", n, n, Init::he, rng);
    d2_ = make_dense("dense2", n, n, Init::xavier, rng);
  }

  Tensor forward(Tape& tape, const Tensor& x, ForwardContext& ctx) override {
    check_input(spec_, x);
    const std::size_t batch = x.dim(0);
    const std::size_t h = spec_.hidden_size;
    ad::LstmState st{Tensor::zeros({batch, h}), Tensor::zeros({batch, h})};
    std::vector<Tensor> states;
    states.reserve(spec_.input_len);
    for (std::size_t t = 0; t < spec_.input_len; ++t) {
      st = ad::lstm_cell(tape, ad::slice(tape, x, 1, t, 1), st, w_x_, w_h_, bias_);
      states.push_back(st.h);
    }
    Tensor z = ad::concat(tape, states, 1);
    z = maybe_dropout(tape, ad::relu(tape, apply(tape, d0_, z)), ctx);
    z = maybe_dropout(tape, ad::relu(tape, apply(tape, d1_, z)), ctx);
    return apply(tape, d2_, z);
  }

 private:
  Tensor w_x_, w_h_, bias_;
  Dense d0_, d1_, d2_;
};

}  // namespace

Tensor ResidualBlock::forward(Tape& tape, const Tensor& x, const ForwardContext& ctx) {
  Tensor h = ad::conv1d(tape, x, conv1_w, conv1_b, {1, pad});
  h = ad::relu(tape, ad::batchnorm1d(tape, h, bn1_gamma, bn1_beta, bn1, ctx.training));
  h = ad::conv1d(tape, h, conv2_w, conv2_b, {1, pad});
  h = ad::batchnorm1d(tape, h, bn2_gamma, bn2_beta, bn2, ctx.training);
  return ad::relu(tape, ad::add(tape, h, x));
}

std::unique_ptr<Model> build_fcnn(const ModelSpec& spec) {
  if (spec.architecture != Architecture::FCNN) throw SpecError("build_fcnn: spec is not an FCNN");
  spec.validate();
  return std::make_unique<Fcnn>(spec);
}

std::unique_ptr<Model> build_simple_cnn(const ModelSpec& spec) {
  if (spec.architecture != Architecture::SimpleCNN) throw SpecError("build_simple_cnn: spec is not a SimpleCNN");
  spec.validate();
  return std::make_unique<SimpleCnn>(spec);
}

std::unique_ptr<Model> build_complex_cnn(const ModelSpec& spec) {
  if (spec.architecture != Architecture::ComplexCNN)
    throw SpecError("build_complex_cnn: spec is not a ComplexCNN");
  spec.validate();
  return std::make_unique<ComplexCnn>(spec);
}

std::unique_ptr<Model> build_rnn(const ModelSpec& spec) {
  if (spec.architecture != Architecture::RNN) throw SpecError("build_rnn: spec is not an RNN");
  spec.validate();
  return std::make_unique<Rnn>(spec);
}

std::unique_ptr<Model> build_model(const ModelSpec& spec) {
  switch (spec.architecture) {
    case Architecture::FCNN: return build_fcnn(spec);
    case Architecture::SimpleCNN: return build_simple_cnn(spec);
    case Architecture::ComplexCNN: return build_complex_cnn(spec);
    case Architecture::RNN: return build_rnn(spec);
  }
  throw SpecError("build_model: unknown architecture");
}

std::vector<Segment> denoise_batch(Model& model, const std::vector<Segment>& contaminated, std::size_t batch_size) {
  const std::size_t len = model.spec().input_len;
  std::vector<Segment> out;
  out.reserve(contaminated.size());
  ForwardContext ctx;  // evaluation mode
  for (std::size_t start = 0; start < contaminated.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, contaminated.size() - start);
    std::vector<double> input(n * len);
    std::vector<double> sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Segment& y = contaminated[start + i];
      if (y.size() != len)
        throw ShapeError("denoise: segment has " + std::to_string(y.size()) + " samples, model expects " +
                         std::to_string(len));
      sigma[i] = population_std(y.view());
      if (sigma[i] == 0.0) throw DegenerateSignal("denoise: contaminated segment has zero variance");
      for (std::size_t t = 0; t < len; ++t) input[i * len + t] = y[t] / sigma[i];
    }
    Tape tape(false);
    const Tensor pred = model.forward(tape, Tensor({n, len}, std::move(input)), ctx);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> s(pred.values().begin() + static_cast<std::ptrdiff_t>(i * len),
                            pred.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
      for (double& v : s) v *= sigma[i];
      out.emplace_back(std::move(s), contaminated[start + i].fs());
    }
  }
  return out;
}

Segment denoise(Model& model, const Segment& contaminated) { return denoise_batch(model, {contaminated}, 1).front(); }

}  // namespace eegbench
