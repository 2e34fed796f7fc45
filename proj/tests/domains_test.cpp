#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pbd/data/dataset.hpp"
#include "pbd/domains/domain.hpp"
#include "pbd/error.hpp"

using namespace pbd;
using namespace pbd::domains;

namespace {

constexpr double kPi = std::numbers::pi;

// Small grids keep the property tests fast; the dynamics are unchanged.
std::unique_ptr<Domain> small(const std::string& name) {
  if (name == "civil_violence") return make_domain(name, {{"grid_size", 15}, {"steps", 40}, {"burn_in", 10}});
  if (name == "flocking") return make_domain(name, {{"agents", 20}, {"world_size", 20.0}, {"steps", 60}});
  if (name == "schelling") return make_domain(name, {{"grid_size", 10}, {"max_sweeps", 50}});
  if (name == "forest_fire") return make_domain(name, {{"grid_size", 21}});
  return make_domain(name);
}

}  // namespace

TEST_CASE("brouwer: exact values") {
  CHECK(eval_brouwer(0.0) == 0.0);
  CHECK(eval_brouwer(0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(std::abs(eval_brouwer(0.5) - 0.5) < 1e-15);
  // 40-digit references computed independently.
  const std::pair<double, double> ref[] = {{0.1, 0.393892626146236564584353},
                                           {0.3, 0.7755282581475767860582197},
                                           {0.7, 0.2244717418524232139417803},
                                           {0.9, 0.606107373853763435415647},
                                           {0.123456, 0.4735629017300082010500377}};
  for (auto [x, y] : ref) CHECK(std::abs(eval_brouwer(x) - y) < 1e-12);
  CHECK_THROWS_AS(eval_brouwer(-0.01), DomainError);
  CHECK_THROWS_AS(eval_brouwer(1.01), DomainError);
}

TEST_CASE("fk: exact values") {
  auto close = [](std::pair<double, double> got, double p1, double p2) {
    CHECK(std::abs(got.first - p1) < 1e-12);
    CHECK(std::abs(got.second - p2) < 1e-12);
  };
  close(eval_fk(0, 0), 1, 0);
  close(eval_fk(kPi / 2, 0), 0, 1);
  close(eval_fk(0, kPi / 2), 0, 2);
  close(eval_fk(0.5, -1.2), 0.3179988464944818710841086, -1.462158936082770888181988);
  close(eval_fk(3.0, 2.5), 0.7931261680908163580718514, -1.298023257657689359484523);
  close(eval_fk(-6.0, 1.0), 0.5187822199032654513039183, 1.766879711354102248538231);
  close(eval_fk(1.1, -4.4), -0.1394049978088024419545849, 0.589388704000068526133441);
  CHECK_THROWS_AS(eval_fk(7.0, 0.0), DomainError);
}

TEST_CASE("fk: outputs bounded by 2 over a dense grid") {
  for (int i = 0; i <= 80; ++i) {
    for (int j = 0; j <= 80; ++j) {
      const double a = -2 * kPi + 4 * kPi * i / 80, b = -2 * kPi + 4 * kPi * j / 80;
      auto [p1, p2] = eval_fk(a, b);
      CHECK(std::abs(p1) <= 2.0 + 1e-12);
      CHECK(std::abs(p2) <= 2.0 + 1e-12);
    }
  }
}

TEST_CASE("registry: dimensions per domain") {
  const std::map<std::string, std::pair<std::size_t, std::size_t>> dims = {
      {"forest_fire", {1, 1}}, {"schelling", {2, 1}}, {"flocking", {3, 2}}, {"civil_violence", {3, 3}},
      {"brouwer", {1, 1}},     {"fk_full", {2, 2}},   {"fk_a", {1, 2}},     {"fk_b", {1, 2}}};
  CHECK(domain_names().size() == dims.size());
  for (const auto& name : domain_names()) {
    const auto d = make_domain(name);
    INFO(name);
    CHECK(d->spec().name == name);
    CHECK(d->spec().alp_dim == dims.at(name).first);
    CHECK(d->spec().slp_dim == dims.at(name).second);
    CHECK_NOTHROW(d->spec().validate());
  }
  CHECK_FALSE(make_domain("brouwer")->spec().stochastic);
  CHECK(make_domain("forest_fire")->spec().stochastic);
  CHECK_THROWS_AS(make_domain("turbulence"), ConfigError);
  CHECK_THROWS_AS(make_domain("forest_fire", {{"grid", 3}}), ConfigError);
  CHECK_THROWS_AS(make_domain("brouwer", {{"grid_size", 3}}), ConfigError);
}

TEST_CASE("simulate: argument checks") {
  const auto d = make_domain("brouwer");
  const std::vector<double> out{1.5}, two{0.1, 0.2};
  CHECK_THROWS_AS(simulate(*d, out, 0), DomainError);
  CHECK_THROWS_AS(simulate(*d, two, 0), ShapeError);
}

TEST_CASE("simulate: reproducible and within declared ranges") {
  for (const auto& name : domain_names()) {
    INFO(name);
    const auto d = small(name);
    const auto& s = d->spec();
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 12; ++trial) {
      std::vector<double> alp;
      for (const auto& r : s.alp_ranges) alp.push_back(std::uniform_real_distribution<double>(r.low, r.high)(rng));
      const auto a = simulate(*d, alp, 100 + trial);
      const auto b = simulate(*d, alp, 100 + trial);
      CHECK(a.slp == b.slp);
      CHECK(a.steps_run == b.steps_run);
      REQUIRE(a.slp.size() == s.slp_dim);
      for (std::size_t i = 0; i < s.slp_dim; ++i) {
        CHECK(std::isfinite(a.slp[i]));
        CHECK(s.slp_ranges[i].contains(a.slp[i]));
      }
    }
  }
}

TEST_CASE("analytic domains ignore the seed") {
  const auto d = make_domain("fk_full");
  const std::vector<double> alp{0.3, -2.0};
  CHECK(simulate(*d, alp, 1).slp == simulate(*d, alp, 999).slp);
}

TEST_CASE("forest fire: empty and full grids") {
  const auto d = make_domain("forest_fire");
  for (std::uint64_t seed : {0u, 1u, 77u}) {
    const std::vector<double> zero{0.0}, one{1.0};
    CHECK(simulate(*d, zero, seed).slp[0] == 0.0);
    CHECK(simulate(*d, one, seed).slp[0] == 1.0);
  }
}

TEST_CASE("forest fire: mean burned fraction is non-decreasing in density") {
  const auto d = make_domain("forest_fire");
  double previous = -1.0;
  for (double density : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const std::vector<double> alp{density};
      total += simulate(*d, alp, seed).slp[0];
    }
    const double mean = total / 20.0;
    CHECK(mean >= previous);
    previous = mean;
  }
}

TEST_CASE("civil violence: full legitimacy means no activity") {
  const auto d = make_domain("civil_violence");
  const std::vector<double> alp{1.0, 25.0, 0.05};
  for (std::uint64_t seed : {0u, 3u}) {
    const auto r = simulate(*d, alp, seed);
    CHECK(r.slp[0] == 0.0);
    CHECK(r.slp[1] == 0.0);
    CHECK(r.slp[2] == 1.0);
  }
}

TEST_CASE("civil violence: fractions sum to one") {
  const auto d = small("civil_violence");
  for (double legitimacy : {0.0, 0.3, 0.8}) {
    const std::vector<double> alp{legitimacy, 30.0, 0.04};
    const auto r = simulate(*d, alp, 5);
    CHECK(r.slp[0] + r.slp[1] + r.slp[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("flocking: zero turn limits keep the initial polarization") {
  const auto d = make_domain("flocking");
  const std::vector<double> alp{0.0, 0.0, 0.0};
  const std::uint64_t seed = 0;
  // Headings are the third of every three draws made during placement.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 50.0);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  double sx = 0, sy = 0;
  for (int i = 0; i < 50; ++i) {
    coord(rng);
    coord(rng);
    const double h = angle(rng);
    sx += std::cos(h);
    sy += std::sin(h);
  }
  const double expected = std::hypot(sx, sy) / 50.0;
  CHECK(simulate(*d, alp, seed).slp[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("flocking: alignment raises polarization") {
  const auto d = make_domain("flocking");
  double loose = 0, tight = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const std::vector<double> none{0.0, 0.0, 0.0}, align{20.0, 3.0, 1.5};
    loose += simulate(*d, none, seed).slp[0];
    tight += simulate(*d, align, seed).slp[0];
  }
  CHECK(tight > loose);
}

TEST_CASE("schelling: higher tolerance threshold segregates more") {
  const auto d = make_domain("schelling");
  double low = 0, high = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::vector<double> a{0.1, 0.7}, b{0.6, 0.7};
    low += simulate(*d, a, seed).slp[0];
    high += simulate(*d, b, seed).slp[0];
  }
  CHECK(high > low);
}

TEST_CASE("projected domains come from the parent dataset") {
  const auto full = data::generate(*make_domain("fk_full"), 20, 9);
  for (std::size_t index : {0u, 1u}) {
    const auto proj = data::generate(*make_domain(index == 0 ? "fk_a" : "fk_b"), 20, 9);
    REQUIRE(proj.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(proj.samples[i].alp == std::vector<double>{full.samples[i].alp[index]});
      CHECK(proj.samples[i].slp == full.samples[i].slp);
    }
  }
}
