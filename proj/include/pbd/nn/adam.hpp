#pragma once

#include <cstdint>

#include "pbd/nn/network.hpp"

namespace pbd::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::uint64_t step = 0;

  static OptimizerState for_parameters(const ParameterSet& params);
};

/// One bias-corrected Adam update. Throws UsageError on frozen parameters and
/// ShapeError when grads/state do not match params.
void adam_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state, const AdamConfig& config = {});

}  // namespace pbd::nn
