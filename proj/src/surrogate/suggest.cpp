#include <algorithm>
#include <random>

#include "pbd/error.hpp"
#include "pbd/surrogate/surrogate.hpp"

namespace pbd::surrogate {

namespace {

std::vector<double> to_raw(const RmModel& rm, std::span<const double> alp_model) {
  std::vector<double> alp = rm.scaler.invert_alp(alp_model);
  for (std::size_t i = 0; i < alp.size(); ++i) alp[i] = std::clamp(alp[i], rm.alp_ranges[i].low, rm.alp_ranges[i].high);
  return alp;
}

void check_query(const RmModel& rm, std::span<const double> slp_model) {
  if (rm.kind == ModelKind::fm) throw UsageError("suggest requires a reverse model");
  if (slp_model.size() != rm.net.spec.input_size()) {
    throw ShapeError("query has " + std::to_string(slp_model.size()) + " SLPs, model expects " +
                     std::to_string(rm.net.spec.input_size()));
  }
}

}  // namespace

std::vector<double> suggest(const RmModel& rm, std::span<const double> slp_model) {
  check_query(rm, slp_model);
  const auto r = nn::forward(rm.net.params, rm.net.spec, slp_model);
  return to_raw(rm, r.output);
}

std::vector<std::vector<double>> suggest_many(const RmModel& rm, std::span<const double> slp_model, std::size_t k,
                                              std::uint64_t seed) {
  check_query(rm, slp_model);
  if (rm.kind != ModelKind::rm_var || !rm.net.spec.variational) {
    throw UsageError("sampling several suggestions requires a variational model");
  }
  const nn::Matrix eps = standard_normal(k, rm.net.spec.latent_size, seed);
  nn::ForwardCache cache;
  std::vector<std::vector<double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    nn::forward(rm.net.params, rm.net.spec, slp_model, eps.row(i), cache);
    out.push_back(to_raw(rm, cache.output()));
  }
  return out;
}

}  // namespace pbd::surrogate
