#include "pbd/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pbd::nn {

double finite_diff_check(std::vector<Network> chain, const Batch& batch, const LossSpec& loss, double step,
                         std::size_t max_parameters) {
  std::vector<Stage> stages;
  for (const auto& net : chain) stages.push_back({&net.spec, &net.params});
  ChainGradient engine(stages);
  engine.compute(batch, loss);

  struct Slot {
    double* value;
    double analytic;
  };
  std::vector<Slot> slots;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    const auto& grad = engine.gradient(s);
    if (!grad) continue;
    std::vector<std::span<const double>> g;
    grad->for_each_tensor([&](std::span<const double> t) { g.push_back(t); });
    std::size_t t = 0;
    chain[s].params.for_each_tensor([&](std::span<double> p) {
      for (std::size_t i = 0; i < p.size(); ++i) slots.push_back({&p[i], g[t][i]});
      ++t;
    });
  }

  const std::size_t stride = std::max<std::size_t>(1, (slots.size() + max_parameters - 1) / std::max<std::size_t>(1, max_parameters));
  double worst = 0.0;
  for (std::size_t i = 0; i < slots.size(); i += stride) {
    double& v = *slots[i].value;
    const double saved = v;
    v = saved + step;
    const double up = engine.evaluate(batch, loss).total;
    v = saved - step;
    const double down = engine.evaluate(batch, loss).total;
    v = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = slots[i].analytic;
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace pbd::nn
