#pragma once

#include <optional>
#include <vector>

#include "pbd/nn/network.hpp"

namespace pbd::nn {

/// One network in a chain. The output of stage i feeds stage i + 1.
/// Stages whose parameters are frozen still propagate gradients to earlier
/// stages but never receive parameter gradients.
struct Stage {
  const NetworkSpec* spec;
  const ParameterSet* params;
};

/// A mini-batch. `noise` (one row per sample, latent_size columns) feeds the
/// single variational stage of the chain, if any; leave it empty for eps = 0.
struct Batch {
  Matrix inputs;
  Matrix targets;
  Matrix noise;
};

/// loss = reconstruction_weight * mse(chain(inputs), targets)
///      + kl_weight * kl(mu, logvar)   (variational stage only)
/// with the dimension-summed MSE convention.
struct LossSpec {
  double reconstruction_weight = 1.0;
  double kl_weight = 0.0;
};

struct LossBreakdown {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

/// Forward and backward passes through a chain of networks with reusable
/// buffers. Not thread-safe; use one instance per thread.
class ChainGradient {
 public:
  explicit ChainGradient(std::vector<Stage> stages);

  /// Loss over the batch and the gradient of it w.r.t. every trainable stage.
  LossBreakdown compute(const Batch& batch, const LossSpec& loss);

  /// Loss only.
  LossBreakdown evaluate(const Batch& batch, const LossSpec& loss);

  /// Gradient of the last compute() for `stage`; empty for frozen stages.
  const std::optional<ParameterSet>& gradient(std::size_t stage) const { return grads_[stage]; }

  std::size_t stage_count() const { return stages_.size(); }

 private:
  LossBreakdown run(const Batch& batch, const LossSpec& loss, bool with_grad);

  std::vector<Stage> stages_;
  std::vector<ForwardCache> caches_;
  std::vector<std::optional<ParameterSet>> grads_;
  std::optional<std::size_t> variational_stage_;
  std::vector<double> grad_buf_;
  std::vector<double> next_buf_;
};

/// Convenience wrapper: gradients of `loss` for each stage (nullopt when frozen).
std::vector<std::optional<ParameterSet>> backward(std::vector<Stage> stages, const Batch& batch, const LossSpec& loss);

/// Runs the chain on every row of `inputs` with the given noise (may be empty).
Matrix predict(const std::vector<Stage>& stages, const Matrix& inputs, const Matrix& noise = {});

}  // namespace pbd::nn
