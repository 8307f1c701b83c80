#include "eegbench/adam.hpp"

#include <cmath>

namespace eegbench {

void AdamState::step(std::vector<ad::Tensor>& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ShapeError("adam: parameter count changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (m_[k].size() != p.size())
      throw ShapeError("adam: parameter " + std::to_string(k) + " has " + std::to_string(p.size()) +
                       " values, state has " + std::to_string(m_[k].size()));
    auto& val = p.values();
    const auto& g = p.grad();
    for (std::size_t i = 0; i < val.size(); ++i) {
      m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g[i];
      v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = m_[k][i] / c1;
      const double v_hat = v_[k][i] / c2;
      val[i] -= cfg_.alpha * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

}  // namespace eegbench
