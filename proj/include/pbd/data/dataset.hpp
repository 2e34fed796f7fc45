#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbd/domains/domain.hpp"
#include "pbd/nn/network.hpp"

namespace pbd::data {

/// One observed ALP -> SLP correspondence in raw units.
struct Sample {
  std::vector<double> alp;
  std::vector<double> slp;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::string domain_name;
  std::vector<Sample> samples;
  std::uint64_t generation_seed = 0;

  std::size_t size() const { return samples.size(); }
  std::size_t alp_dim() const { return samples.empty() ? 0 : samples.front().alp.size(); }
  std::size_t slp_dim() const { return samples.empty() ? 0 : samples.front().slp.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Draws n ALP vectors uniformly over the domain's ranges and simulates each
/// with a per-sample seed derived from (seed, index). Projected domains
/// generate their parent dataset and keep the projected ALP coordinate.
/// Simulation failures are rethrown with the sample index attached.
Dataset generate(const domains::Domain& domain, std::size_t n, std::uint64_t seed, std::size_t threads = 1);

/// Seed used to simulate sample `index` of a dataset generated with `seed`.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t index);

/// Throws unless every sample has the domain's dimensions and lies in its ranges.
void check_against(const Dataset& dataset, const domains::DomainSpec& spec);

/// Header row alp_0..alp_{A-1},slp_0..slp_{S-1}; values in shortest
/// round-trip decimal form.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Reads a dataset written by write_csv. Throws ParseError (with line number)
/// on malformed rows, an empty file, or a header that disagrees with the
/// expected dimensions (pass 0 to accept any).
Dataset read_csv(const std::filesystem::path& path, const std::string& domain_name = {}, std::size_t alp_dim = 0,
                 std::size_t slp_dim = 0);

/// Sidecar {domain, n, seed, created_with_version, ...extra}.
nlohmann::json metadata(const Dataset& dataset, const nlohmann::json& extra = nlohmann::json::object());

inline constexpr const char* kVersion = "1.0.0";

}  // namespace pbd::data
