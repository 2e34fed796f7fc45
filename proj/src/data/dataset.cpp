#include "pbd/data/dataset.hpp"

#include <random>

#include "pbd/error.hpp"
#include "pbd/util.hpp"

namespace pbd::data {

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, {0x53494dULL, index}); }

Dataset generate(const domains::Domain& domain, std::size_t n, std::uint64_t seed, std::size_t threads) {
  const auto& spec = domain.spec();
  if (n == 0) throw DomainError("generate: n must be >= 1");

  if (spec.projection) {
    auto parent = domains::make_domain(spec.projection->parent);
    Dataset full = generate(*parent, n, seed, threads);
    Dataset out{spec.name, {}, seed};
    out.samples.reserve(n);
    for (auto& s : full.samples) out.samples.push_back({{s.alp[spec.projection->alp_index]}, std::move(s.slp)});
    return out;
  }

  Dataset out{spec.name, std::vector<Sample>(n), seed};
  std::mt19937_64 rng(seed);
  for (auto& s : out.samples) {
    s.alp.resize(spec.alp_dim);
    for (std::size_t d = 0; d < spec.alp_dim; ++d) {
      std::uniform_real_distribution<double> u(spec.alp_ranges[d].low, spec.alp_ranges[d].high);
      s.alp[d] = u(rng);
    }
  }
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      out.samples[i].slp = domains::simulate(domain, out.samples[i].alp, sample_seed(seed, i)).slp;
    } catch (const Error& e) {
      throw Error(spec.name + ": simulation of sample " + std::to_string(i) + " failed: " + e.what());
    }
  });
  return out;
}

void check_against(const Dataset& dataset, const domains::DomainSpec& spec) {
  if (dataset.samples.empty()) throw DomainError("dataset is empty");
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& s = dataset.samples[i];
    if (s.alp.size() != spec.alp_dim || s.slp.size() != spec.slp_dim) {
      throw ShapeError("sample " + std::to_string(i) + " has wrong dimensions for " + spec.name);
    }
    for (std::size_t d = 0; d < spec.alp_dim; ++d) {
      if (!spec.alp_ranges[d].contains(s.alp[d])) throw DomainError("sample " + std::to_string(i) + " ALP out of range");
    }
    for (std::size_t d = 0; d < spec.slp_dim; ++d) {
      if (!spec.slp_ranges[d].contains(s.slp[d])) throw DomainError("sample " + std::to_string(i) + " SLP out of range");
    }
  }
}

nlohmann::json metadata(const Dataset& dataset, const nlohmann::json& extra) {
  nlohmann::json doc = {{"domain", dataset.domain_name},
                        {"n", dataset.samples.size()},
                        {"seed", dataset.generation_seed},
                        {"created_with_version", kVersion}};
  for (const auto& [k, v] : extra.items()) doc[k] = v;
  return doc;
}

}  // namespace pbd::data
