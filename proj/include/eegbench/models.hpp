#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "eegbench/autodiff.hpp"
#include "eegbench/rng.hpp"
#include "eegbench/signal.hpp"

namespace eegbench {

enum class Architecture { FCNN, SimpleCNN, ComplexCNN, RNN };

std::string to_string(Architecture a);
Architecture parse_architecture(const std::string& s);

struct ModelSpec {
  Architecture architecture = Architecture::FCNN;
  std::size_t input_len = 512;
  std::size_t feature_maps = 64;  // simple CNN
  std::size_t branch_width = 32;  // complex CNN, per branch
  std::size_t hidden_size = 1;    // RNN state dimension
  double dropout = 0.2;
  std::uint64_t init_seed = 0;

  void validate() const;
};

// Everything a forward pass needs besides the input.
struct ForwardContext {
  bool training = false;
  CounterRng* rng = nullptr;  // dropout masks; required when training with dropout > 0
};

struct NamedTensor {
  std::string name;
  ad::Tensor tensor;
};

struct NamedBatchNorm {
  std::string name;
  ad::BatchNormState* state;
};

// A denoising network mapping [batch, input_len] to [batch, input_len].
class Model {
 public:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {}
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const noexcept { return spec_; }
  virtual ad::Tensor forward(ad::Tape& tape, const ad::Tensor& x, ForwardContext& ctx) = 0;

  const std::vector<NamedTensor>& named_parameters() const noexcept { return params_; }
  std::vector<ad::Tensor> parameters() const;
  std::size_t parameter_count() const;
  std::vector<NamedBatchNorm> batchnorm_states();
  void zero_grad();

 protected:
  ad::Tensor add_param(std::string name, ad::Shape shape, std::vector<double> values);
  ad::Tensor add_uniform(std::string name, ad::Shape shape, double limit, CounterRng& rng);
  ad::Tensor add_constant(std::string name, ad::Shape shape, double value);

  // Bernoulli(keep) mask applied as inverted dropout; identity outside training.
  ad::Tensor maybe_dropout(ad::Tape& tape, const ad::Tensor& x, ForwardContext& ctx) const;

  struct Dense {
    ad::Tensor w;  // [in, out]
    ad::Tensor b;  // [out]
  };
  struct Conv {
    ad::Tensor w;  // [out, in, k]
    ad::Tensor b;  // [out]
    std::size_t pad = 0;
  };
  struct Norm {
    ad::Tensor gamma, beta;
    std::unique_ptr<ad::BatchNormState> state;
  };

  enum class Init { he, xavier };
  Dense make_dense(const std::string& name, std::size_t in, std::size_t out, Init init, CounterRng& rng);
  Conv make_conv(const std::string& name, std::size_t in, std::size_t out, std::size_t k, Init init,
                 CounterRng& rng);
  Norm make_norm(const std::string& name, std::size_t ch);

  static ad::Tensor apply(ad::Tape& tape, const Dense& d, const ad::Tensor& x);
  static ad::Tensor apply(ad::Tape& tape, const Conv& c, const ad::Tensor& x);
  static ad::Tensor apply(ad::Tape& tape, Norm& n, const ad::Tensor& x, const ForwardContext& ctx);

  ModelSpec spec_;
  std::vector<NamedTensor> params_;
  std::vector<std::pair<std::string, ad::BatchNormState*>> norms_;
};

std::unique_ptr<Model> build_fcnn(const ModelSpec& spec);
std::unique_ptr<Model> build_simple_cnn(const ModelSpec& spec);
std::unique_ptr<Model> build_complex_cnn(const ModelSpec& spec);
std::unique_ptr<Model> build_rnn(const ModelSpec& spec);
std::unique_ptr<Model> build_model(const ModelSpec& spec);

// Residual block used by the complex CNN branches; exposed for tests.
// conv-BN-ReLU-conv-BN plus identity skip, ReLU after the add.
class ResidualBlock {
 public:
  ad::Tensor forward(ad::Tape& tape, const ad::Tensor& x, const ForwardContext& ctx);

  ad::Tensor conv1_w, conv1_b, bn1_gamma, bn1_beta;
  ad::Tensor conv2_w, conv2_b, bn2_gamma, bn2_beta;
  ad::BatchNormState bn1, bn2;
  std::size_t pad = 0;
};

// Inference on one contaminated segment: scale by 1/sigma_y, run the network with dropout
// off and batch-norm running statistics, scale back by sigma_y.
Segment denoise(Model& model, const Segment& contaminated);
// Batched variant of denoise.
std::vector<Segment> denoise_batch(Model& model, const std::vector<Segment>& contaminated,
                                   std::size_t batch_size = 64);

}  // namespace eegbench
