#include <random>

#include "pbd/nn/gradcheck.hpp"
#include "pbd/surrogate/surrogate.hpp"
#include "pbd/util.hpp"

namespace pbd::surrogate {

namespace {

constexpr std::size_t kBatch = 8;

nn::Matrix uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo, double hi) {
  nn::Matrix m(rows, cols);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : m.data) v = u(rng);
  return m;
}

// Zero biases put stacked ReLUs exactly on their kink whenever a layer is
// fully inactive; check at a generic point instead.
nn::Network make(const nn::NetworkSpec& spec, std::uint64_t seed) {
  nn::Network net{spec, nn::init_parameters(spec, seed)};
  std::mt19937_64 rng(derive_seed(seed, {0x42}));
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& layer : net.params.layers) {
    for (double& b : layer.bias) b = u(rng);
  }
  return net;
}

}  // namespace

std::vector<GradcheckCase> gradcheck_suite(std::uint64_t seed) {
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {1, 2}, {2, 2}, {3, 3}};
  std::vector<GradcheckCase> out;
  for (const auto& [na, ns] : shapes) {
    std::mt19937_64 rng(derive_seed(seed, {na, ns}));
    const nn::Matrix alp = uniform(kBatch, na, rng, -1.5, 1.5);
    const nn::Matrix slp = uniform(kBatch, ns, rng, 0.0, 1.0);

    const nn::Network fm = make(build_fm(na, ns), derive_seed(seed, {1}));
    const nn::Network rm = make(build_rm(na, ns, false), derive_seed(seed, {2}));
    const nn::Network var = make(build_rm(na, ns, true), derive_seed(seed, {3}));
    nn::Network frozen = fm;
    frozen.params.frozen = true;

    out.push_back({"fm", na, ns, nn::finite_diff_check({fm}, {alp, slp, {}}, {})});
    out.push_back({"rm", na, ns, nn::finite_diff_check({rm}, {slp, alp, {}}, {})});
    out.push_back({"rm_fm", na, ns, nn::finite_diff_check({rm, frozen}, {slp, slp, {}}, {})});
    const nn::Matrix eps = standard_normal(kBatch, var.spec.latent_size, derive_seed(seed, {4, na, ns}));
    out.push_back({"rm_fm_var", na, ns, nn::finite_diff_check({var, frozen}, {slp, slp, eps}, {0.5, 0.5})});
  }
  return out;
}

}  // namespace pbd::surrogate
