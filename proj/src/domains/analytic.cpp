#include <cmath>
#include <numbers>
#include <random>

#include "pbd/domains/domain.hpp"
#include "pbd/error.hpp"

namespace pbd::domains {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Brouwer final : public Domain {
 public:
  Brouwer()
      : Domain({.name = "brouwer",
                .alp_dim = 1,
                .slp_dim = 1,
                .alp_ranges = {{0.0, 1.0}},
                // f(0) = 0 and f(1) = 1 bound the curve; the interior extrema
                // (~0.775 and ~0.225) lie inside.
                .slp_ranges = {{0.0, 1.0}},
                .stochastic = false,
                .default_total_size = 10000,
                .single_split_test_size = 0,
                .projection = std::nullopt}) {}

  SimResult run(std::span<const double> alp, std::uint64_t) const override { return {{eval_brouwer(alp[0])}, 0}; }
};

class ForwardKinematics final : public Domain {
 public:
  ForwardKinematics()
      : Domain({.name = "fk_full",
                .alp_dim = 2,
                .slp_dim = 2,
                .alp_ranges = {{-kTwoPi, kTwoPi}, {-kTwoPi, kTwoPi}},
                .slp_ranges = {{-2.0, 2.0}, {-2.0, 2.0}},
                .stochastic = false,
                .default_total_size = 10000,
                .single_split_test_size = 1000,
                .projection = std::nullopt}) {}

  SimResult run(std::span<const double> alp, std::uint64_t) const override {
    auto [p1, p2] = eval_fk(alp[0], alp[1]);
    return {{p1, p2}, 0};
  }
};

// Problem sets A and B: one joint angle is the ALP, the other is a hidden
// input drawn from the simulation seed.
class ForwardKinematicsProjection final : public Domain {
 public:
  explicit ForwardKinematicsProjection(std::size_t alp_index)
      : Domain({.name = alp_index == 0 ? "fk_a" : "fk_b",
                .alp_dim = 1,
                .slp_dim = 2,
                .alp_ranges = {{-kTwoPi, kTwoPi}},
                .slp_ranges = {{-2.0, 2.0}, {-2.0, 2.0}},
                .stochastic = true,
                .default_total_size = 10000,
                .single_split_test_size = 1000,
                .projection = Projection{"fk_full", alp_index}}),
        alp_index_(alp_index) {}

  SimResult run(std::span<const double> alp, std::uint64_t seed) const override {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-kTwoPi, kTwoPi);
    const double hidden = angle(rng);
    auto [p1, p2] = alp_index_ == 0 ? eval_fk(alp[0], hidden) : eval_fk(hidden, alp[0]);
    return {{p1, p2}, 0};
  }

 private:
  std::size_t alp_index_;
};

}  // namespace

double eval_brouwer(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("eval_brouwer: x outside [0, 1]");
  return x + 0.5 * std::sin(2.0 * kPi * x);
}

std::pair<double, double> eval_fk(double a, double b) {
  if (!(a >= -kTwoPi && a <= kTwoPi) || !(b >= -kTwoPi && b <= kTwoPi)) {
    throw DomainError("eval_fk: angle outside [-2pi, 2pi]");
  }
  const double p1 = std::cos(a + b) + std::sin(a) * std::sin(b);
  const double p2 = std::sin(a + b) + std::cos(a) * std::sin(b);
  return {p1, p2};
}

std::unique_ptr<Domain> make_brouwer() { return std::make_unique<Brouwer>(); }
std::unique_ptr<Domain> make_fk_full() { return std::make_unique<ForwardKinematics>(); }
std::unique_ptr<Domain> make_fk_projection(std::size_t alp_index) {
  return std::make_unique<ForwardKinematicsProjection>(alp_index);
}

}  // namespace pbd::domains
