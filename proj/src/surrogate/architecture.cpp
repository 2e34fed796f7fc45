#include "pbd/error.hpp"
#include "pbd/surrogate/surrogate.hpp"

namespace pbd::surrogate {

using nn::Activation;

nn::NetworkSpec build_fm(std::size_t n_alp, std::size_t n_slp) {
  if (n_alp == 0 || n_slp == 0) throw SpecError("build_fm: dimensions must be positive");
  const std::size_t middle = n_slp * n_slp;
  nn::NetworkSpec spec;
  spec.layers = {{n_alp, 2 * n_alp, Activation::sigmoid},
                 {2 * n_alp, middle, Activation::sigmoid},
                 {middle, 2 * n_slp, Activation::sigmoid},
                 {2 * n_slp, n_slp, Activation::linear}};
  return spec;
}

nn::NetworkSpec build_rm(std::size_t n_alp, std::size_t n_slp, bool variational) {
  if (n_alp == 0 || n_slp == 0) throw SpecError("build_rm: dimensions must be positive");
  const std::size_t middle = n_slp * n_slp;
  nn::NetworkSpec spec;
  if (!variational) {
    spec.layers = {{n_slp, 2 * n_slp, Activation::relu},
                   {2 * n_slp, middle, Activation::relu},
                   {middle, 2 * n_alp, Activation::relu},
                   {2 * n_alp, n_alp, Activation::linear}};
    return spec;
  }
  spec.variational = true;
  spec.latent_size = middle;
  spec.encoder_depth = 1;
  spec.layers = {{n_slp, 2 * n_slp, Activation::relu},
                 {middle, 2 * n_alp, Activation::relu},
                 {2 * n_alp, n_alp, Activation::linear}};
  return spec;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::fm:
      return "fm";
    case ModelKind::rm:
      return "rm";
    case ModelKind::rm_fm:
      return "rm_fm";
    case ModelKind::rm_var:
      break;
  }
  return "rm_var";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "fm") return ModelKind::fm;
  if (name == "rm") return ModelKind::rm;
  if (name == "rm_fm") return ModelKind::rm_fm;
  if (name == "rm_var") return ModelKind::rm_var;
  throw ParseError("unknown model kind '" + std::string(name) + "'");
}

}  // namespace pbd::surrogate
