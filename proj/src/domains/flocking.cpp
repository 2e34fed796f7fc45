#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "overrides.hpp"
#include "pbd/domains/domain.hpp"

namespace pbd::domains {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegree = std::numbers::pi / 180.0;

struct FlockingParams {
  std::size_t agents = 50;
  double world = 50.0;
  double speed = 1.0;
  double vision = 5.0;
  double min_separation = 1.0;
  std::size_t steps = 300;
};

// Signed smallest rotation taking `from` to `to`, in (-pi, pi].
double subtract_headings(double to, double from) {
  double d = std::remainder(to - from, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

double turn_at_most(double heading, double turn, double max_turn) {
  if (std::abs(turn) > max_turn) turn = turn > 0 ? max_turn : -max_turn;
  return heading + turn;
}

// Reynolds-style boids after the classic NetLogo flocking model: each boid
// either separates from its nearest flockmate or aligns with and coheres to
// its flockmates, turning by at most the configured angles.
// ALPs: max align / cohere / separate turn in degrees.
// SLPs: polarization |mean heading vector| and mean nearest-neighbour
// distance divided by the torus half-diagonal.
class Flocking final : public Domain {
 public:
  explicit Flocking(FlockingParams p)
      : Domain({.name = "flocking",
                .alp_dim = 3,
                .slp_dim = 2,
                .alp_ranges = {{0.0, 20.0}, {0.0, 20.0}, {0.0, 20.0}},
                .slp_ranges = {{0.0, 1.0}, {0.0, 1.0}},
                .stochastic = true,
                .default_total_size = 10000,
                .single_split_test_size = 0,
                .projection = std::nullopt}),
        p_(p) {
    if (p_.agents < 2) throw ConfigError("flocking: need at least two agents");
    if (!(p_.world > 0 && p_.vision > 0 && p_.speed >= 0 && p_.min_separation >= 0)) {
      throw ConfigError("flocking: invalid geometry");
    }
  }

  SimResult run(std::span<const double> alp, std::uint64_t seed) const override {
    const double max_align = alp[0] * kDegree;
    const double max_cohere = alp[1] * kDegree;
    const double max_separate = alp[2] * kDegree;
    const std::size_t n = p_.agents;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, p_.world);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::vector<double> x(n), y(n), heading(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = coord(rng);
      y[i] = coord(rng);
      heading[i] = angle(rng);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t step = 0; step < p_.steps; ++step) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        double nearest = std::numeric_limits<double>::infinity();
        std::size_t nearest_id = i;
        double sx = 0, sy = 0, tx = 0, ty = 0;
        std::size_t mates = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double dx = wrap(x[j] - x[i]), dy = wrap(y[j] - y[i]);
          const double d = std::hypot(dx, dy);
          if (d > p_.vision) continue;
          ++mates;
          sx += std::cos(heading[j]);
          sy += std::sin(heading[j]);
          if (d > 0) {
            tx += dx / d;
            ty += dy / d;
          }
          if (d < nearest) {
            nearest = d;
            nearest_id = j;
          }
        }
        if (mates == 0) continue;
        if (nearest < p_.min_separation) {
          heading[i] = turn_at_most(heading[i], subtract_headings(heading[i], heading[nearest_id]), max_separate);
        } else {
          if (sx != 0 || sy != 0) {
            heading[i] = turn_at_most(heading[i], subtract_headings(std::atan2(sy, sx), heading[i]), max_align);
          }
          if (tx != 0 || ty != 0) {
            heading[i] = turn_at_most(heading[i], subtract_headings(std::atan2(ty, tx), heading[i]), max_cohere);
          }
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::fmod(x[i] + p_.speed * std::cos(heading[i]) + p_.world, p_.world);
        y[i] = std::fmod(y[i] + p_.speed * std::sin(heading[i]) + p_.world, p_.world);
      }
    }
    return {{polarization(heading), mean_nearest_distance(x, y) / half_diagonal()}, p_.steps};
  }

 private:
  double wrap(double d) const {
    if (d > 0.5 * p_.world) return d - p_.world;
    if (d < -0.5 * p_.world) return d + p_.world;
    return d;
  }

  double half_diagonal() const { return std::hypot(0.5 * p_.world, 0.5 * p_.world); }

  static double polarization(const std::vector<double>& heading) {
    double sx = 0, sy = 0;
    for (double h : heading) {
      sx += std::cos(h);
      sy += std::sin(h);
    }
    const double norm = std::hypot(sx, sy) / static_cast<double>(heading.size());
    return std::min(norm, 1.0);
  }

  double mean_nearest_distance(const std::vector<double>& x, const std::vector<double>& y) const {
    double total = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (j != i) best = std::min(best, std::hypot(wrap(x[j] - x[i]), wrap(y[j] - y[i])));
      }
      total += best;
    }
    return total / static_cast<double>(x.size());
  }

  FlockingParams p_;
};

}  // namespace

std::unique_ptr<Domain> make_flocking(const nlohmann::json& overrides) {
  detail::Overrides o("flocking", overrides);
  FlockingParams p;
  p.agents = o.get("agents", p.agents);
  p.world = o.get("world_size", p.world);
  p.speed = o.get("speed", p.speed);
  p.vision = o.get("vision", p.vision);
  p.min_separation = o.get("min_separation", p.min_separation);
  p.steps = o.get("steps", p.steps);
  o.finish();
  return std::make_unique<Flocking>(p);
}

}  // namespace pbd::domains
