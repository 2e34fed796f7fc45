#pragma once

#include "pbd/nn/network.hpp"

namespace pbd::nn {

/// How squared errors are aggregated across output dimensions.
/// Both conventions average over samples.
enum class Reduction {
  sum_over_dims,   // training loss
  mean_over_dims,  // reported per-dimension MSE
};

/// Mean over samples of the squared error aggregated over output dimensions.
/// Throws DomainError on an empty batch and ShapeError on mismatched shapes.
double mse_loss(const Matrix& pred, const Matrix& target, Reduction reduction = Reduction::sum_over_dims);

/// KL divergence of N(mu, exp(logvar)) from N(0, I): summed over latent
/// dimensions, averaged over the batch.
double kl_gaussian(const Matrix& mu, const Matrix& logvar);

/// Single-sample KL term, -1/2 * sum(1 + logvar - mu^2 - exp(logvar)).
double kl_gaussian(std::span<const double> mu, std::span<const double> logvar);

}  // namespace pbd::nn
