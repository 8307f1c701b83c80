#pragma once

#include <cstdint>
#include <vector>

#include "eegbench/autodiff.hpp"

namespace eegbench {

struct AdamConfig {
  double alpha = 5e-5;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

// Bias-corrected Adam with one (m, v) pair per parameter tensor.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update to every parameter from its current gradient.
  void step(std::vector<ad::Tensor>& params);

  std::uint64_t t() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return cfg_; }
  const std::vector<std::vector<double>>& first_moment() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moment() const noexcept { return v_; }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace eegbench
