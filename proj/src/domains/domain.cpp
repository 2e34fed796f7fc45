#include "pbd/domains/domain.hpp"

#include <cmath>

#include "pbd/error.hpp"

namespace pbd::domains {

void DomainSpec::validate() const {
  if (alp_dim == 0 || slp_dim == 0) throw SpecError(name + ": dimensions must be positive");
  if (alp_ranges.size() != alp_dim || slp_ranges.size() != slp_dim) throw SpecError(name + ": range count mismatch");
  for (const auto* ranges : {&alp_ranges, &slp_ranges}) {
    for (const auto& r : *ranges) {
      if (!(r.low < r.high)) throw SpecError(name + ": empty range");
    }
  }
}

SimResult simulate(const Domain& domain, std::span<const double> alp, std::uint64_t seed) {
  const auto& spec = domain.spec();
  if (alp.size() != spec.alp_dim) {
    throw ShapeError(spec.name + ": expected " + std::to_string(spec.alp_dim) + " ALPs, got " +
                     std::to_string(alp.size()));
  }
  for (std::size_t i = 0; i < alp.size(); ++i) {
    if (!std::isfinite(alp[i]) || !spec.alp_ranges[i].contains(alp[i])) {
      throw DomainError(spec.name + ": ALP " + std::to_string(i) + " = " + std::to_string(alp[i]) +
                        " outside [" + std::to_string(spec.alp_ranges[i].low) + ", " +
                        std::to_string(spec.alp_ranges[i].high) + "]");
    }
  }
  return domain.run(alp, seed);
}

std::vector<std::string> domain_names() {
  return {"forest_fire", "schelling", "flocking", "civil_violence", "brouwer", "fk_full", "fk_a", "fk_b"};
}

std::unique_ptr<Domain> make_domain(std::string_view name, const nlohmann::json& overrides) {
  const bool analytic = name == "brouwer" || name == "fk_full" || name == "fk_a" || name == "fk_b";
  if (analytic && !overrides.is_null() && !overrides.empty()) {
    throw ConfigError(std::string(name) + " has no overridable parameters");
  }
  if (name == "brouwer") return make_brouwer();
  if (name == "fk_full") return make_fk_full();
  if (name == "fk_a") return make_fk_projection(0);
  if (name == "fk_b") return make_fk_projection(1);
  const nlohmann::json& o = overrides.is_null() ? nlohmann::json::object() : overrides;
  if (name == "forest_fire") return make_forest_fire(o);
  if (name == "schelling") return make_schelling(o);
  if (name == "flocking") return make_flocking(o);
  if (name == "civil_violence") return make_civil_violence(o);
  throw ConfigError("unknown domain '" + std::string(name) + "'");
}

}  // namespace pbd::domains
