#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "overrides.hpp"
#include "pbd/domains/domain.hpp"

namespace pbd::domains {

namespace {

struct CivilViolenceParams {
  std::size_t grid_size = 30;
  double citizen_density = 0.7;
  long vision = 7;
  double arrest_constant = 2.3;
  double threshold = 0.1;
  std::size_t steps = 120;
  std::size_t burn_in = 40;
};

// Window counts of two cell classes on a torus through 2-D prefix sums.
class TorusCounter {
 public:
  struct Counts {
    int first = 0;
    int second = 0;
  };

  explicit TorusCounter(std::size_t n) : n_(n), sums_((n + 1) * (n + 1)) {}

  template <typename First, typename Second>
  void rebuild(const std::vector<int>& grid, First&& first, Second&& second) {
    const std::size_t w = n_ + 1;
    for (std::size_t r = 0; r < n_; ++r) {
      Counts row;
      for (std::size_t c = 0; c < n_; ++c) {
        const int v = grid[r * n_ + c];
        row.first += first(v) ? 1 : 0;
        row.second += second(v) ? 1 : 0;
        const Counts& above = sums_[r * w + c + 1];
        sums_[(r + 1) * w + c + 1] = {above.first + row.first, above.second + row.second};
      }
    }
  }

  // Cells within Chebyshev distance `radius` of (r, c), inclusive.
  Counts window(long r, long c, long radius) const {
    const Segments rows = segments(r - radius, r + radius);
    const Segments cols = segments(c - radius, c + radius);
    Counts total;
    for (int i = 0; i < rows.count; ++i) {
      for (int j = 0; j < cols.count; ++j) {
        const Counts part = rect(rows.lo[i], rows.hi[i], cols.lo[j], cols.hi[j]);
        total.first += part.first;
        total.second += part.second;
      }
    }
    return total;
  }

 private:
  struct Segments {
    long lo[2];
    long hi[2];
    int count;
  };

  // Splits the wrapped interval [lo, hi] into at most two in-range pieces.
  Segments segments(long lo, long hi) const {
    const long n = static_cast<long>(n_);
    if (hi - lo + 1 >= n) return {{0, 0}, {n - 1, 0}, 1};
    lo = ((lo % n) + n) % n;
    hi = ((hi % n) + n) % n;
    if (lo <= hi) return {{lo, 0}, {hi, 0}, 1};
    return {{lo, 0}, {n - 1, hi}, 2};
  }

  Counts rect(long r0, long r1, long c0, long c1) const {
    const std::size_t w = n_ + 1;
    auto at = [&](long r, long c) { return sums_[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)]; };
    const Counts a = at(r1 + 1, c1 + 1), b = at(r0, c1 + 1), d = at(r1 + 1, c0), e = at(r0, c0);
    return {a.first - b.first - d.first + e.first, a.second - b.second - d.second + e.second};
  }

  std::size_t n_;
  std::vector<Counts> sums_;
};

// Epstein's civil violence model. Citizens have hardship H ~ U(0,1) and risk
// aversion R ~ U(0,1); grievance G = H (1 - L). A citizen turns active when
// G - R * P > threshold with P = 1 - exp(-k * floor(C / (1 + A))) for C cops
// and A active citizens in vision. Cops arrest a random active citizen in
// vision; jail terms are uniform on [0, max_jail_term].
// ALPs: legitimacy L, max jail term, cop density.
// SLPs: mean active / jailed / quiescent fractions of citizens after burn-in.
class CivilViolence final : public Domain {
 public:
  explicit CivilViolence(CivilViolenceParams p)
      : Domain({.name = "civil_violence",
                .alp_dim = 3,
                .slp_dim = 3,
                .alp_ranges = {{0.0, 1.0}, {0.0, 50.0}, {0.0, 0.1}},
                .slp_ranges = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}},
                .stochastic = true,
                .default_total_size = 10000,
                .single_split_test_size = 0,
                .projection = std::nullopt}),
        p_(p) {
    if (p_.grid_size < 3 || p_.vision < 1) throw ConfigError("civil_violence: invalid grid or vision");
    if (!(p_.citizen_density > 0 && p_.citizen_density + 0.1 < 1.0)) {
      throw ConfigError("civil_violence: citizen_density must leave room for cops");
    }
    if (p_.burn_in >= p_.steps) throw ConfigError("civil_violence: burn_in must be below steps");
  }

  SimResult run(std::span<const double> alp, std::uint64_t seed) const override {
    const double legitimacy = alp[0];
    const long max_jail = std::lround(alp[1]);
    const double cop_density = alp[2];
    const std::size_t n = p_.grid_size;
    const std::size_t cells = n * n;
    const auto citizens = static_cast<std::size_t>(std::lround(p_.citizen_density * static_cast<double>(cells)));
    const auto cops = static_cast<std::size_t>(std::lround(cop_density * static_cast<double>(cells)));
    const std::size_t agents = citizens + cops;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // grid holds agent id + 1, 0 when empty.
    std::vector<int> grid(cells, 0);
    std::vector<std::size_t> cell_of(agents);
    {
      std::vector<std::size_t> shuffled(cells);
      std::iota(shuffled.begin(), shuffled.end(), 0);
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t a = 0; a < agents; ++a) {
        cell_of[a] = shuffled[a];
        grid[shuffled[a]] = static_cast<int>(a + 1);
      }
    }
    std::vector<double> grievance(citizens), risk_aversion(citizens);
    for (std::size_t a = 0; a < citizens; ++a) {
      grievance[a] = u(rng) * (1.0 - legitimacy);
      risk_aversion[a] = u(rng);
    }
    std::vector<char> active(citizens, 0);
    std::vector<long> jail(citizens, -1);  // -1 free, otherwise remaining term

    auto is_cop = [&](int v) { return v > 0 && static_cast<std::size_t>(v - 1) >= citizens; };
    auto is_active = [&](int v) {
      return v > 0 && static_cast<std::size_t>(v - 1) < citizens && active[static_cast<std::size_t>(v - 1)];
    };

    TorusCounter counter(n);
    std::vector<std::size_t> order(agents);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> candidates;
    double sum_active = 0, sum_jailed = 0, sum_quiet = 0;
    const long radius = p_.vision;
    const auto side = static_cast<long>(n);
    // wrap[i + radius] maps coordinate i in [-radius, n + radius) onto the torus.
    std::vector<long> wrap(n + 2 * static_cast<std::size_t>(radius));
    for (long i = -radius; i < side + radius; ++i) wrap[static_cast<std::size_t>(i + radius)] = ((i % side) + side) % side;
    auto wrapped = [&](long i) { return wrap[static_cast<std::size_t>(i + radius)]; };
    // Windows wider than the grid visit some cells twice.
    const bool window_overlaps = 2 * radius + 1 > side;

    auto random_cell_near = [&](std::size_t from) -> std::optional<std::size_t> {
      const long r = static_cast<long>(from) / side, c = static_cast<long>(from) % side;
      const auto width = static_cast<std::uint64_t>(2 * radius + 1);
      for (int attempt = 0; attempt < 16; ++attempt) {
        // One draw per attempt; the modulo bias of 2^64 mod width^2 is negligible.
        const std::uint64_t x = rng() % (width * width);
        const long rr = wrapped(r + static_cast<long>(x / width) - radius);
        const long cc = wrapped(c + static_cast<long>(x % width) - radius);
        const auto cell = static_cast<std::size_t>(rr * side + cc);
        if (grid[cell] == 0) return cell;
      }
      return std::nullopt;
    };
    auto relocate = [&](std::size_t a, std::size_t cell) {
      grid[cell_of[a]] = 0;
      grid[cell] = static_cast<int>(a + 1);
      cell_of[a] = cell;
    };

    for (std::size_t step = 0; step < p_.steps; ++step) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t a : order) {
        if (a < citizens && jail[a] >= 0) continue;
        if (auto cell = random_cell_near(cell_of[a])) relocate(a, *cell);
      }

      counter.rebuild(grid, is_cop, is_active);
      for (std::size_t a = 0; a < citizens; ++a) {
        if (jail[a] >= 0) continue;
        const long r = static_cast<long>(cell_of[a]) / side, c = static_cast<long>(cell_of[a]) % side;
        const auto seen = counter.window(r, c, radius);
        const int cops_seen = seen.first;
        const int actives_seen = seen.second - (active[a] ? 1 : 0);
        const double ratio = std::floor(static_cast<double>(cops_seen) / static_cast<double>(1 + actives_seen));
        const double arrest_probability = 1.0 - std::exp(-p_.arrest_constant * ratio);
        active[a] = grievance[a] - risk_aversion[a] * arrest_probability > p_.threshold;
      }

      for (std::size_t a : order) {
        if (a < citizens) continue;
        candidates.clear();
        const long r = static_cast<long>(cell_of[a]) / side, c = static_cast<long>(cell_of[a]) % side;
        for (long dr = -radius; dr <= radius; ++dr) {
          for (long dc = -radius; dc <= radius; ++dc) {
            const int v = grid[static_cast<std::size_t>(wrapped(r + dr) * side + wrapped(c + dc))];
            if (is_active(v)) candidates.push_back(static_cast<std::size_t>(v - 1));
          }
        }
        if (candidates.empty()) continue;
        if (window_overlaps) {
          std::sort(candidates.begin(), candidates.end());
          candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        }
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        const std::size_t suspect = candidates[pick(rng)];
        std::uniform_int_distribution<long> term(0, max_jail);
        const std::size_t cell = cell_of[suspect];
        grid[cell] = 0;
        active[suspect] = 0;
        jail[suspect] = term(rng);
        relocate(a, cell);
      }

      for (std::size_t a = 0; a < citizens; ++a) {
        if (jail[a] < 0) continue;
        if (jail[a] > 0) {
          --jail[a];
          continue;
        }
        // Released onto a random empty cell.
        std::uniform_int_distribution<std::size_t> any(0, cells - 1);
        std::size_t cell = any(rng);
        while (grid[cell] != 0) cell = any(rng);
        grid[cell] = static_cast<int>(a + 1);
        cell_of[a] = cell;
        jail[a] = -1;
      }

      if (step >= p_.burn_in) {
        std::size_t n_active = 0, n_jailed = 0;
        for (std::size_t a = 0; a < citizens; ++a) {
          if (jail[a] >= 0) {
            ++n_jailed;
          } else if (active[a]) {
            ++n_active;
          }
        }
        const double total = static_cast<double>(citizens);
        sum_active += static_cast<double>(n_active) / total;
        sum_jailed += static_cast<double>(n_jailed) / total;
        sum_quiet += static_cast<double>(citizens - n_active - n_jailed) / total;
      }
    }
    const double measured = static_cast<double>(p_.steps - p_.burn_in);
    return {{sum_active / measured, sum_jailed / measured, sum_quiet / measured}, p_.steps};
  }

 private:
  CivilViolenceParams p_;
};

}  // namespace

std::unique_ptr<Domain> make_civil_violence(const nlohmann::json& overrides) {
  detail::Overrides o("civil_violence", overrides);
  CivilViolenceParams p;
  p.grid_size = o.get("grid_size", p.grid_size);
  p.citizen_density = o.get("citizen_density", p.citizen_density);
  p.vision = o.get("vision", p.vision);
  p.arrest_constant = o.get("arrest_constant", p.arrest_constant);
  p.threshold = o.get("threshold", p.threshold);
  p.steps = o.get("steps", p.steps);
  p.burn_in = o.get("burn_in", p.burn_in);
  o.finish();
  return std::make_unique<CivilViolence>(p);
}

}  // namespace pbd::domains
