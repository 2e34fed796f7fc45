#include <algorithm>
#include <numeric>
#include <random>

#include "overrides.hpp"
#include "pbd/domains/domain.hpp"

namespace pbd::domains {

namespace {

// Two-colour Schelling segregation on a torus with Moore neighbourhoods.
// ALPs: desired similar-neighbour fraction, occupancy density.
// SLP: mean same-colour fraction among occupied neighbours.
class Schelling final : public Domain {
 public:
  Schelling(std::size_t size, std::size_t max_sweeps)
      : Domain({.name = "schelling",
                .alp_dim = 2,
                .slp_dim = 1,
                .alp_ranges = {{0.0, 1.0}, {0.5, 0.95}},
                .slp_ranges = {{0.0, 1.0}},
                .stochastic = true,
                .default_total_size = 10000,
                .single_split_test_size = 0,
                .projection = std::nullopt}),
        size_(size),
        max_sweeps_(max_sweeps) {
    if (size_ < 3) throw ConfigError("schelling: grid_size must be >= 3");
  }

  SimResult run(std::span<const double> alp, std::uint64_t seed) const override {
    const double wanted = alp[0];
    const double density = alp[1];
    const std::size_t cells = size_ * size_;
    const auto agents = static_cast<std::size_t>(std::lround(density * static_cast<double>(cells)));

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(cells);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    // grid value: 0 empty, 1 or 2 colour.
    std::vector<unsigned char> grid(cells, 0);
    std::vector<std::size_t> position(agents);
    for (std::size_t a = 0; a < agents; ++a) {
      position[a] = order[a];
      grid[order[a]] = static_cast<unsigned char>(1 + a % 2);
    }
    std::vector<std::size_t> empty(order.begin() + static_cast<std::ptrdiff_t>(agents), order.end());

    std::vector<std::size_t> schedule(agents);
    std::iota(schedule.begin(), schedule.end(), 0);
    std::size_t sweeps = 0;
    for (; sweeps < max_sweeps_; ++sweeps) {
      std::shuffle(schedule.begin(), schedule.end(), rng);
      bool anyone_moved = false;
      for (std::size_t a : schedule) {
        auto [same, occupied] = neighbourhood(grid, position[a]);
        const bool happy = static_cast<double>(same) >= wanted * static_cast<double>(occupied);
        if (happy || empty.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, empty.size() - 1);
        const std::size_t slot = pick(rng);
        const std::size_t target = empty[slot];
        empty[slot] = position[a];
        grid[target] = grid[position[a]];
        grid[position[a]] = 0;
        position[a] = target;
        anyone_moved = true;
      }
      if (!anyone_moved) break;
    }

    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t a = 0; a < agents; ++a) {
      auto [same, occupied] = neighbourhood(grid, position[a]);
      if (occupied == 0) continue;
      total += static_cast<double>(same) / static_cast<double>(occupied);
      ++counted;
    }
    return {{counted ? total / static_cast<double>(counted) : 0.0}, sweeps};
  }

 private:
  std::pair<int, int> neighbourhood(const std::vector<unsigned char>& grid, std::size_t cell) const {
    const auto n = static_cast<long>(size_);
    const long r = static_cast<long>(cell) / n, c = static_cast<long>(cell) % n;
    const unsigned char colour = grid[cell];
    int same = 0, occupied = 0;
    for (long dr = -1; dr <= 1; ++dr) {
      for (long dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const long rr = (r + dr + n) % n, cc = (c + dc + n) % n;
        const unsigned char v = grid[static_cast<std::size_t>(rr * n + cc)];
        if (v == 0) continue;
        ++occupied;
        if (v == colour) ++same;
      }
    }
    return {same, occupied};
  }

  std::size_t size_;
  std::size_t max_sweeps_;
};

}  // namespace

std::unique_ptr<Domain> make_schelling(const nlohmann::json& overrides) {
  detail::Overrides o("schelling", overrides);
  const auto size = o.get<std::size_t>("grid_size", 20);
  const auto sweeps = o.get<std::size_t>("max_sweeps", 200);
  o.finish();
  return std::make_unique<Schelling>(size, sweeps);
}

}  // namespace pbd::domains
