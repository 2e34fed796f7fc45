#include "pbd/data/scaler.hpp"

#include <cmath>

#include "pbd/error.hpp"

namespace pbd::data {

namespace {

void check_len(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) throw ShapeError(std::string("scaler: ") + what + " length mismatch");
}

}  // namespace

Scaler Scaler::fit(std::span<const Sample> train) {
  if (train.size() < 2) throw FitError("scaler fit needs at least two samples");
  const std::size_t a = train.front().alp.size(), s = train.front().slp.size();
  Scaler sc;
  sc.alp_min_ = train.front().alp;
  sc.alp_max_ = train.front().alp;
  sc.slp_min_ = train.front().slp;
  sc.slp_max_ = train.front().slp;
  for (const auto& sample : train) {
    if (sample.alp.size() != a || sample.slp.size() != s) throw ShapeError("scaler: ragged samples");
    for (std::size_t d = 0; d < a; ++d) {
      sc.alp_min_[d] = std::min(sc.alp_min_[d], sample.alp[d]);
      sc.alp_max_[d] = std::max(sc.alp_max_[d], sample.alp[d]);
    }
    for (std::size_t d = 0; d < s; ++d) {
      sc.slp_min_[d] = std::min(sc.slp_min_[d], sample.slp[d]);
      sc.slp_max_[d] = std::max(sc.slp_max_[d], sample.slp[d]);
    }
  }
  for (std::size_t d = 0; d < a; ++d) {
    if (!(sc.alp_max_[d] > sc.alp_min_[d])) throw FitError("scaler: ALP dimension " + std::to_string(d) + " is constant");
  }
  for (std::size_t d = 0; d < s; ++d) {
    if (!(sc.slp_max_[d] > sc.slp_min_[d])) throw FitError("scaler: SLP dimension " + std::to_string(d) + " is constant");
  }

  // Population statistics of the normalized ALPs.
  const double n = static_cast<double>(train.size());
  sc.alp_mean_.assign(a, 0.0);
  sc.alp_std_.assign(a, 0.0);
  for (const auto& sample : train) {
    const auto x = sc.normalize_alp(sample.alp);
    for (std::size_t d = 0; d < a; ++d) sc.alp_mean_[d] += x[d];
  }
  for (auto& m : sc.alp_mean_) m /= n;
  for (const auto& sample : train) {
    const auto x = sc.normalize_alp(sample.alp);
    for (std::size_t d = 0; d < a; ++d) sc.alp_std_[d] += (x[d] - sc.alp_mean_[d]) * (x[d] - sc.alp_mean_[d]);
  }
  for (std::size_t d = 0; d < a; ++d) {
    sc.alp_std_[d] = std::sqrt(sc.alp_std_[d] / n);
    if (!(sc.alp_std_[d] > 0)) throw FitError("scaler: ALP dimension " + std::to_string(d) + " has zero variance");
  }
  return sc;
}

Scaler Scaler::fit(const Dataset& dataset, std::span<const std::size_t> indices) {
  std::vector<Sample> subset;
  subset.reserve(indices.size());
  for (std::size_t i : indices) subset.push_back(dataset.samples.at(i));
  return fit(subset);
}

std::vector<double> Scaler::normalize_alp(std::span<const double> alp) const {
  check_len(alp, alp_dim(), "ALP");
  std::vector<double> out(alp.size());
  for (std::size_t d = 0; d < alp.size(); ++d) out[d] = (alp[d] - alp_min_[d]) / (alp_max_[d] - alp_min_[d]);
  return out;
}

std::vector<double> Scaler::transform_alp(std::span<const double> alp) const {
  auto out = normalize_alp(alp);
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = (out[d] - alp_mean_[d]) / alp_std_[d];
  return out;
}

std::vector<double> Scaler::transform_slp(std::span<const double> slp) const {
  check_len(slp, slp_dim(), "SLP");
  std::vector<double> out(slp.size());
  for (std::size_t d = 0; d < slp.size(); ++d) out[d] = (slp[d] - slp_min_[d]) / (slp_max_[d] - slp_min_[d]);
  return out;
}

std::vector<double> Scaler::invert_alp(std::span<const double> alp_model) const {
  check_len(alp_model, alp_dim(), "ALP");
  std::vector<double> out(alp_model.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    const double normalized = alp_model[d] * alp_std_[d] + alp_mean_[d];
    out[d] = normalized * (alp_max_[d] - alp_min_[d]) + alp_min_[d];
  }
  return out;
}

std::vector<double> Scaler::invert_slp(std::span<const double> slp_model) const {
  check_len(slp_model, slp_dim(), "SLP");
  std::vector<double> out(slp_model.size());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = slp_model[d] * (slp_max_[d] - slp_min_[d]) + slp_min_[d];
  return out;
}

nlohmann::json Scaler::to_json() const {
  return {{"alp_min", alp_min_}, {"alp_max", alp_max_}, {"slp_min", slp_min_},
          {"slp_max", slp_max_}, {"alp_mean", alp_mean_}, {"alp_std", alp_std_}};
}

Scaler Scaler::from_json(const nlohmann::json& doc) {
  try {
    Scaler sc;
    sc.alp_min_ = doc.at("alp_min").get<std::vector<double>>();
    sc.alp_max_ = doc.at("alp_max").get<std::vector<double>>();
    sc.slp_min_ = doc.at("slp_min").get<std::vector<double>>();
    sc.slp_max_ = doc.at("slp_max").get<std::vector<double>>();
    sc.alp_mean_ = doc.at("alp_mean").get<std::vector<double>>();
    sc.alp_std_ = doc.at("alp_std").get<std::vector<double>>();
    const std::size_t a = sc.alp_min_.size(), s = sc.slp_min_.size();
    if (sc.alp_max_.size() != a || sc.alp_mean_.size() != a || sc.alp_std_.size() != a || sc.slp_max_.size() != s) {
      throw ShapeError("scaler document has inconsistent lengths");
    }
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scaler: ") + e.what());
  }
}

ModelSpaceData to_model_space(const Scaler& scaler, std::span<const Sample> samples) {
  ModelSpaceData out{nn::Matrix(samples.size(), scaler.alp_dim()), nn::Matrix(samples.size(), scaler.slp_dim())};
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto a = scaler.transform_alp(samples[r].alp);
    const auto s = scaler.transform_slp(samples[r].slp);
    std::copy(a.begin(), a.end(), out.alp.row(r).begin());
    std::copy(s.begin(), s.end(), out.slp.row(r).begin());
  }
  return out;
}

ModelSpaceData to_model_space(const Scaler& scaler, const Dataset& dataset, std::span<const std::size_t> indices) {
  std::vector<Sample> subset;
  subset.reserve(indices.size());
  for (std::size_t i : indices) subset.push_back(dataset.samples.at(i));
  return to_model_space(scaler, subset);
}

}  // namespace pbd::data
