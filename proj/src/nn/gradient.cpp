#include "pbd/nn/gradient.hpp"

#include <algorithm>

#include "pbd/error.hpp"
#include "pbd/nn/loss.hpp"

namespace pbd::nn {

ChainGradient::ChainGradient(std::vector<Stage> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw UsageError("empty network chain");
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    stages_[s].spec->validate();
    check_shapes(*stages_[s].spec, *stages_[s].params);
    if (s > 0 && stages_[s].spec->input_size() != stages_[s - 1].spec->output_size()) {
      throw ShapeError("chain stage " + std::to_string(s) + " input does not match previous output");
    }
    if (stages_[s].spec->variational) {
      if (variational_stage_) throw UsageError("at most one variational stage per chain");
      variational_stage_ = s;
    }
  }
  caches_.resize(stages_.size());
  grads_.resize(stages_.size());
}

LossBreakdown ChainGradient::compute(const Batch& batch, const LossSpec& loss) { return run(batch, loss, true); }

LossBreakdown ChainGradient::evaluate(const Batch& batch, const LossSpec& loss) { return run(batch, loss, false); }

LossBreakdown ChainGradient::run(const Batch& batch, const LossSpec& loss, bool with_grad) {
  const std::size_t n = batch.inputs.rows;
  if (n == 0) throw DomainError("empty batch");
  if (batch.inputs.cols != stages_.front().spec->input_size()) throw ShapeError("batch input width mismatch");
  if (batch.targets.rows != n || batch.targets.cols != stages_.back().spec->output_size()) {
    throw ShapeError("batch target shape mismatch");
  }
  const bool has_noise = !batch.noise.empty();
  if (has_noise) {
    if (!variational_stage_) throw ShapeError("noise supplied to a chain without a variational stage");
    if (batch.noise.rows != n || batch.noise.cols != stages_[*variational_stage_].spec->latent_size) {
      throw ShapeError("batch noise shape mismatch");
    }
  }

  // Backward stops at the earliest trainable stage.
  std::optional<std::size_t> first_trainable;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const bool trainable = with_grad && !stages_[s].params->frozen;
    if (trainable) {
      if (!grads_[s]) grads_[s] = stages_[s].params->zeros_like();
      grads_[s]->for_each_tensor([](std::span<double> t) { std::fill(t.begin(), t.end(), 0.0); });
      if (!first_trainable) first_trainable = s;
    } else {
      grads_[s].reset();
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const double kl_scale = loss.kl_weight * inv_n;
  LossBreakdown out;
  for (std::size_t r = 0; r < n; ++r) {
    std::span<const double> in = batch.inputs.row(r);
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      std::span<const double> noise;
      if (has_noise && variational_stage_ == s) noise = batch.noise.row(r);
      forward(*stages_[s].params, *stages_[s].spec, in, noise, caches_[s]);
      in = caches_[s].output();
    }
    const auto target = batch.targets.row(r);
    grad_buf_.resize(in.size());
    double sq = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      const double d = in[j] - target[j];
      sq += d * d;
      grad_buf_[j] = loss.reconstruction_weight * 2.0 * d * inv_n;
    }
    out.reconstruction += sq;
    if (variational_stage_) {
      const auto& c = caches_[*variational_stage_];
      out.kl += kl_gaussian(c.mu, c.logvar);
    }
    if (!first_trainable) continue;
    for (std::size_t s = stages_.size(); s-- > *first_trainable;) {
      ParameterSet* g = grads_[s] ? &*grads_[s] : nullptr;
      const double kls = (variational_stage_ == s) ? kl_scale : 0.0;
      backward(*stages_[s].params, *stages_[s].spec, caches_[s], grad_buf_, kls, g, next_buf_);
      grad_buf_.swap(next_buf_);
    }
  }
  out.reconstruction *= inv_n;
  out.kl *= inv_n;
  out.total = loss.reconstruction_weight * out.reconstruction + loss.kl_weight * out.kl;
  return out;
}

std::vector<std::optional<ParameterSet>> backward(std::vector<Stage> stages, const Batch& batch, const LossSpec& loss) {
  ChainGradient engine(std::move(stages));
  engine.compute(batch, loss);
  std::vector<std::optional<ParameterSet>> out;
  for (std::size_t s = 0; s < engine.stage_count(); ++s) out.push_back(engine.gradient(s));
  return out;
}

Matrix predict(const std::vector<Stage>& stages, const Matrix& inputs, const Matrix& noise) {
  if (stages.empty()) throw UsageError("empty network chain");
  Matrix out(inputs.rows, stages.back().spec->output_size());
  std::vector<ForwardCache> caches(stages.size());
  for (std::size_t r = 0; r < inputs.rows; ++r) {
    std::span<const double> in = inputs.row(r);
    for (std::size_t s = 0; s < stages.size(); ++s) {
      std::span<const double> eps;
      if (!noise.empty() && stages[s].spec->variational) eps = noise.row(r);
      forward(*stages[s].params, *stages[s].spec, in, eps, caches[s]);
      in = caches[s].output();
    }
    std::copy(in.begin(), in.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace pbd::nn
