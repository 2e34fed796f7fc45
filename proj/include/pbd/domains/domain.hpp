#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pbd::domains {

struct Range {
  double low = 0.0;
  double high = 1.0;

  double width() const { return high - low; }
  bool contains(double v) const { return v >= low && v <= high; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// A domain whose dataset is the projection of a parent domain's dataset
/// onto a single ALP coordinate (the remaining ALPs become hidden inputs).
struct Projection {
  std::string parent;
  std::size_t alp_index = 0;
};

struct DomainSpec {
  std::string name;
  std::size_t alp_dim = 1;
  std::size_t slp_dim = 1;
  std::vector<Range> alp_ranges;
  std::vector<Range> slp_ranges;
  bool stochastic = false;
  std::size_t default_total_size = 10000;
  /// Non-zero for domains evaluated on one train/test split instead of k-fold:
  /// the size of the independently generated test set.
  std::size_t single_split_test_size = 0;
  std::optional<Projection> projection;

  /// Throws SpecError on inconsistent dimensions or empty ranges.
  void validate() const;
};

struct SimResult {
  std::vector<double> slp;
  std::size_t steps_run = 0;
};

/// ALP -> SLP black box. Implementations are immutable after construction and
/// safe to call from several threads at once.
class Domain {
 public:
  virtual ~Domain() = default;

  const DomainSpec& spec() const { return spec_; }

  /// Runs without argument checking; use simulate() at API boundaries.
  virtual SimResult run(std::span<const double> alp, std::uint64_t seed) const = 0;

 protected:
  explicit Domain(DomainSpec spec) : spec_(std::move(spec)) {}

  DomainSpec spec_;
};

/// Validates `alp` against the domain's ranges, then runs it.
SimResult simulate(const Domain& domain, std::span<const double> alp, std::uint64_t seed);

/// Registered names: forest_fire, schelling, flocking, civil_violence,
/// brouwer, fk_full, fk_a, fk_b.
std::vector<std::string> domain_names();

/// Builds a domain by name. `overrides` replaces model parameters (grid
/// sizes, step budgets, ...); unknown keys are rejected. Throws ConfigError
/// for unknown names.
std::unique_ptr<Domain> make_domain(std::string_view name, const nlohmann::json& overrides = nlohmann::json::object());

/// x + 0.5 sin(2 pi x) for x in [0, 1].
double eval_brouwer(double x);

/// Two-link forward kinematics for a, b in [-2 pi, 2 pi]:
/// p1 = cos(a + b) + sin(a) sin(b), p2 = sin(a + b) + cos(a) sin(b).
std::pair<double, double> eval_fk(double a, double b);

// Factories for the individual models (used by the registry).
std::unique_ptr<Domain> make_brouwer();
std::unique_ptr<Domain> make_fk_full();
std::unique_ptr<Domain> make_fk_projection(std::size_t alp_index);
std::unique_ptr<Domain> make_forest_fire(const nlohmann::json& overrides);
std::unique_ptr<Domain> make_schelling(const nlohmann::json& overrides);
std::unique_ptr<Domain> make_flocking(const nlohmann::json& overrides);
std::unique_ptr<Domain> make_civil_violence(const nlohmann::json& overrides);

}  // namespace pbd::domains
