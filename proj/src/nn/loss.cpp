#include "pbd/nn/loss.hpp"

#include <cmath>

#include "pbd/error.hpp"

namespace pbd::nn {

double mse_loss(const Matrix& pred, const Matrix& target, Reduction reduction) {
  if (pred.rows != target.rows || pred.cols != target.cols) throw ShapeError("mse_loss: batch shapes differ");
  if (pred.rows == 0 || pred.cols == 0) throw DomainError("mse_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    total += d * d;
  }
  total /= static_cast<double>(pred.rows);
  if (reduction == Reduction::mean_over_dims) total /= static_cast<double>(pred.cols);
  return total;
}

double kl_gaussian(std::span<const double> mu, std::span<const double> logvar) {
  if (mu.size() != logvar.size()) throw ShapeError("kl_gaussian: shapes differ");
  double acc = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (!std::isfinite(mu[j]) || !std::isfinite(logvar[j])) throw NumericError("kl_gaussian: non-finite input");
    // expm1(lv) - lv >= 0 with equality only at lv = 0.
    acc += mu[j] * mu[j] + (std::expm1(logvar[j]) - logvar[j]);
  }
  return 0.5 * acc;
}

double kl_gaussian(const Matrix& mu, const Matrix& logvar) {
  if (mu.rows != logvar.rows || mu.cols != logvar.cols) throw ShapeError("kl_gaussian: batch shapes differ");
  if (mu.rows == 0) throw DomainError("kl_gaussian: empty batch");
  double total = 0.0;
  for (std::size_t r = 0; r < mu.rows; ++r) total += kl_gaussian(mu.row(r), logvar.row(r));
  return total / static_cast<double>(mu.rows);
}

}  // namespace pbd::nn
