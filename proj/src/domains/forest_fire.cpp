#include <deque>
#include <random>

#include "overrides.hpp"
#include "pbd/domains/domain.hpp"

namespace pbd::domains {

namespace {

// Percolation forest fire: trees placed with probability `density`, every
// tree in the left column ignites, fire spreads to 4-neighbours until it
// dies out. SLP = burned trees / total cells.
class ForestFire final : public Domain {
 public:
  explicit ForestFire(std::size_t size)
      : Domain({.name = "forest_fire",
                .alp_dim = 1,
                .slp_dim = 1,
                .alp_ranges = {{0.0, 1.0}},
                .slp_ranges = {{0.0, 1.0}},
                .stochastic = true,
                .default_total_size = 10000,
                .single_split_test_size = 0,
                .projection = std::nullopt}),
        size_(size) {
    if (size_ < 2) throw ConfigError("forest_fire: grid_size must be >= 2");
  }

  SimResult run(std::span<const double> alp, std::uint64_t seed) const override {
    const double density = alp[0];
    const std::size_t n = size_;
    enum : unsigned char { kEmpty, kTree, kBurnt };
    std::vector<unsigned char> grid(n * n, kEmpty);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& cell : grid) cell = u(rng) < density ? kTree : kEmpty;

    std::deque<std::size_t> front;
    for (std::size_t r = 0; r < n; ++r) {
      if (grid[r * n] == kTree) {
        grid[r * n] = kBurnt;
        front.push_back(r * n);
      }
    }
    std::size_t burned = front.size();
    std::size_t steps = 0;
    while (!front.empty()) {
      ++steps;
      for (std::size_t k = front.size(); k-- > 0;) {
        const std::size_t idx = front.front();
        front.pop_front();
        const std::size_t r = idx / n, c = idx % n;
        const std::size_t neighbours[4] = {r > 0 ? idx - n : idx, r + 1 < n ? idx + n : idx,
                                           c > 0 ? idx - 1 : idx, c + 1 < n ? idx + 1 : idx};
        for (std::size_t nb : neighbours) {
          if (grid[nb] == kTree) {
            grid[nb] = kBurnt;
            front.push_back(nb);
            ++burned;
          }
        }
      }
    }
    return {{static_cast<double>(burned) / static_cast<double>(n * n)}, steps};
  }

 private:
  std::size_t size_;
};

}  // namespace

std::unique_ptr<Domain> make_forest_fire(const nlohmann::json& overrides) {
  detail::Overrides o("forest_fire", overrides);
  const auto size = o.get<std::size_t>("grid_size", 51);
  o.finish();
  return std::make_unique<ForestFire>(size);
}

}  // namespace pbd::domains
