#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "pbd/error.hpp"
#include "pbd/eval/eval.hpp"
#include "pbd/nn/gradient.hpp"
#include "pbd/nn/loss.hpp"
#include "pbd/util.hpp"

namespace pbd::eval {

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

MseStat aggregate(std::span<const double> values) {
  if (values.empty()) throw DomainError("aggregate: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

double network_mse(const std::vector<nn::Stage>& stages, const nn::Matrix& inputs, const nn::Matrix& targets,
                   const nn::Matrix& noise) {
  const nn::Matrix pred = nn::predict(stages, inputs, noise);
  return nn::mse_loss(pred, targets, nn::Reduction::mean_over_dims);
}

double fm_mse(const surrogate::FmModel& fm, const data::ModelSpaceData& data) {
  return network_mse({{&fm.net.spec, &fm.net.params}}, data.alp, data.slp);
}

double rm_mse(const surrogate::RmModel& rm, const data::ModelSpaceData& data) {
  return network_mse({{&rm.net.spec, &rm.net.params}}, data.slp, data.alp);
}

double composite_mse(const surrogate::RmModel& rm, const surrogate::FmModel& fm, const data::ModelSpaceData& data,
                     std::uint64_t noise_seed) {
  if (!rm.fm_hash || *rm.fm_hash != fm.hash()) throw UsageError("reverse model was not trained against this FM");
  if (!(rm.scaler == fm.scaler)) throw UsageError("reverse model and FM use different scalers");
  nn::Matrix noise;
  if (rm.net.spec.variational) noise = surrogate::standard_normal(data.size(), rm.net.spec.latent_size, noise_seed);
  return network_mse({{&rm.net.spec, &rm.net.params}, {&fm.net.spec, &fm.net.params}}, data.slp, data.slp, noise);
}

double output_difference(const domains::Domain& domain, const data::Scaler& scaler,
                         std::span<const double> slp_query_raw, std::span<const double> alp_raw,
                         std::uint64_t sim_seed) {
  if (slp_query_raw.size() != domain.spec().slp_dim) throw ShapeError("query has the wrong number of SLPs");
  const domains::SimResult sim = domains::simulate(domain, alp_raw, sim_seed);
  const auto a = scaler.transform_slp(slp_query_raw);
  const auto b = scaler.transform_slp(sim.slp);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

double random_baseline(const domains::Domain& domain, const data::Scaler& scaler,
                       std::span<const double> slp_query_raw, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> alp;
  for (const auto& r : domain.spec().alp_ranges) alp.push_back(std::uniform_real_distribution<double>(r.low, r.high)(rng));
  return output_difference(domain, scaler, slp_query_raw, alp, derive_seed(seed, {1}));
}

double median_log(std::span<const double> values, double zero_substitute) {
  if (values.empty()) throw DomainError("median_log: no values");
  std::vector<double> logs;
  logs.reserve(values.size());
  for (double v : values) {
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("median_log: value must be finite and non-negative");
    logs.push_back(std::log(v == 0.0 ? zero_substitute : v));
  }
  std::sort(logs.begin(), logs.end());
  const std::size_t m = logs.size() / 2;
  return logs.size() % 2 == 1 ? logs[m] : 0.5 * (logs[m - 1] + logs[m]);
}

const std::vector<ReferenceConstants::MseRow>& ReferenceConstants::network_mse() {
  static const std::vector<MseRow> rows = {
      {"forest_fire", {1.0000, 0.2129, 0.2129}, {0.0000, 0.0002, 0.0002}, {1.0004, 0.2130, 0.2130}, {0.0180, 0.0026, 0.0026}},
      {"schelling", {2.0000, 0.0982, 0.0982}, {0.0000, 0.0002, 0.0002}, {2.0000, 0.0982, 0.0982}, {0.0427, 0.0022, 0.0022}},
      {"turbulence", {2.0001, 0.0028, 0.0028}, {0.0001, 0.0001, 0.0001}, {2.0012, 0.0028, 0.0028}, {0.0354, 0.0012, 0.0012}},
      {"eum", {0.6474, 0.0081, 0.0224}, {0.0392, 0.0033, 0.0162}, {0.6489, 0.0082, 0.0228}, {0.0431, 0.0029, 0.0168}},
      {"aids", {0.6122, 0.0064, 0.0001}, {0.0228, 0.0001, 0.0000}, {0.6155, 0.0065, 0.0001}, {0.0386, 0.0007, 0.0000}},
      {"flocking", {1.1872, 0.0138, 0.0018}, {0.0039, 0.0001, 0.0008}, {1.1925, 0.0141, 0.0018}, {0.0208, 0.0005, 0.0008}},
      {"civil_violence", {0.1590, 0.0004, 0.0001}, {0.0041, 0.0000, 0.0000}, {0.1627, 0.0004, 0.0001}, {0.0040, 0.0000, 0.0000}},
      {"brouwer", {1.0000, 0.0495, 0.0495}, {0.0000, 0.0001, 0.0001}, {1.0006, 0.0496, 0.0496}, {0.0238, 0.0009, 0.0009}},
      {"fk_full", {0.9792, 0.0530, 0.0703}, {0.0, 0.0, 0.0}, {1.0220, 0.0510, 0.0691}, {0.0, 0.0, 0.0}},
      {"fk_a", {0.5000, 0.0703, 0.0703}, {0.0, 0.0, 0.0}, {0.5090, 0.0694, 0.0694}, {0.0, 0.0, 0.0}},
      {"fk_b", {0.5000, 0.0703, 0.0703}, {0.0, 0.0, 0.0}, {0.5274, 0.0690, 0.0690}, {0.0, 0.0, 0.0}},
  };
  return rows;
}

const std::vector<ReferenceConstants::VariationalRow>& ReferenceConstants::variational_mse() {
  static const std::vector<VariationalRow> rows = {
      {0.5, 0.0380, 0.0003, 0.0381, 0.0013},
      {0.0001, 0.0012, 0.0001, 0.0012, 0.0000},
      {0.0, 0.0003, 0.0002, 0.0003, 0.0002},
  };
  return rows;
}

nlohmann::json ReferenceConstants::to_json() {
  using nlohmann::json;
  json mse = json::array();
  for (const auto& r : network_mse()) {
    auto triple = [](const double (&v)[3]) { return json{{"rm", v[0]}, {"fm", v[1]}, {"rm_fm", v[2]}}; };
    mse.push_back({{"domain", r.domain},
                   {"train_mu", triple(r.train_mu)},
                   {"train_sigma", triple(r.train_sigma)},
                   {"test_mu", triple(r.test_mu)},
                   {"test_sigma", triple(r.test_sigma)}});
  }
  json var = json::array();
  for (const auto& r : variational_mse()) {
    var.push_back({{"alpha", r.alpha},
                   {"train_mu", r.train_mu},
                   {"train_sigma", r.train_sigma},
                   {"test_mu", r.test_mu},
                   {"test_sigma", r.test_sigma}});
  }
  return {{"network_mse", mse},
          {"variational_mse", var},
          {"civil_violence_median_log_od",
           {{"random", random_median},
            {"amf_plus", amf_plus_median},
            {"rm_fm", nn_median},
            {variational_label(0.5), variational_median[0]},
            {variational_label(0.0001), variational_median[1]},
            {variational_label(0.0), variational_median[2]}}},
          {"amf_plus_training_sizes", {amf_plus_min_size, amf_plus_max_size}}};
}

}  // namespace pbd::eval
