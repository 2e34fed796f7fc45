#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "pbd/data/dataset.hpp"
#include "pbd/nn/network.hpp"

namespace pbd::data {

/// Model-space coordinates: SLPs min-max normalized to [0, 1] on the
/// training fold; ALPs normalized the same way and then standardized to zero
/// mean and unit (population) variance.
class Scaler {
 public:
  Scaler() = default;

  /// Fits on training samples only. Requires at least two samples; throws
  /// FitError naming the first constant dimension.
  static Scaler fit(std::span<const Sample> train);
  static Scaler fit(const Dataset& dataset, std::span<const std::size_t> indices);

  std::vector<double> transform_alp(std::span<const double> alp) const;
  std::vector<double> transform_slp(std::span<const double> slp) const;
  std::vector<double> invert_alp(std::span<const double> alp_model) const;
  std::vector<double> invert_slp(std::span<const double> slp_model) const;
  /// ALP min-max normalization without standardization.
  std::vector<double> normalize_alp(std::span<const double> alp) const;

  std::size_t alp_dim() const { return alp_min_.size(); }
  std::size_t slp_dim() const { return slp_min_.size(); }

  const std::vector<double>& alp_min() const { return alp_min_; }
  const std::vector<double>& alp_max() const { return alp_max_; }
  const std::vector<double>& slp_min() const { return slp_min_; }
  const std::vector<double>& slp_max() const { return slp_max_; }
  const std::vector<double>& alp_mean() const { return alp_mean_; }
  const std::vector<double>& alp_std() const { return alp_std_; }

  nlohmann::json to_json() const;
  static Scaler from_json(const nlohmann::json& doc);

  friend bool operator==(const Scaler&, const Scaler&) = default;

 private:
  std::vector<double> alp_min_, alp_max_, slp_min_, slp_max_, alp_mean_, alp_std_;
};

/// Row-aligned model-space matrices.
struct ModelSpaceData {
  nn::Matrix alp;
  nn::Matrix slp;

  std::size_t size() const { return alp.rows; }
};

ModelSpaceData to_model_space(const Scaler& scaler, const Dataset& dataset, std::span<const std::size_t> indices);
ModelSpaceData to_model_space(const Scaler& scaler, std::span<const Sample> samples);

/// Balanced k-way partition of sample indices.
struct FoldSplit {
  std::size_t k = 1;
  std::vector<std::size_t> assignments;  // fold index of each sample

  /// Ascending sample indices held out in fold i.
  std::vector<std::size_t> test_indices(std::size_t fold) const;
  /// Ascending sample indices used for training in fold i.
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Seeded shuffle, then round-robin assignment. Throws DomainError if k > n or k == 0.
FoldSplit kfold(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace pbd::data
