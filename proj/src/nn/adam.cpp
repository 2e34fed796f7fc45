#include "pbd/nn/adam.hpp"

#include <cmath>
#include <vector>

#include "pbd/error.hpp"

namespace pbd::nn {

namespace {

std::vector<std::span<double>> tensors(ParameterSet& p) {
  std::vector<std::span<double>> out;
  p.for_each_tensor([&](std::span<double> t) { out.push_back(t); });
  return out;
}

std::vector<std::span<const double>> tensors(const ParameterSet& p) {
  std::vector<std::span<const double>> out;
  p.for_each_tensor([&](std::span<const double> t) { out.push_back(t); });
  return out;
}

}  // namespace

OptimizerState OptimizerState::for_parameters(const ParameterSet& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state, const AdamConfig& config) {
  if (params.frozen) throw UsageError("adam_step on frozen parameters");
  auto p = tensors(params);
  auto g = tensors(grads);
  auto m = tensors(state.first_moment);
  auto v = tensors(state.second_moment);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) throw ShapeError("adam_step: tensor count mismatch");
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (g[t].size() != p[t].size() || m[t].size() != p[t].size() || v[t].size() != p[t].size()) {
      throw ShapeError("adam_step: tensor shape mismatch");
    }
  }

  state.step += 1;
  const double step = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, step);
  const double correction2 = 1.0 - std::pow(config.beta2, step);
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      const double gi = g[t][i];
      m[t][i] = config.beta1 * m[t][i] + (1.0 - config.beta1) * gi;
      v[t][i] = config.beta2 * v[t][i] + (1.0 - config.beta2) * gi * gi;
      const double m_hat = m[t][i] / correction1;
      const double v_hat = v[t][i] / correction2;
      p[t][i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace pbd::nn
