#include "pbd/nn/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "pbd/error.hpp"
#include "pbd/util.hpp"

namespace pbd::nn {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::linear:
      break;
  }
  return x;
}

// Derivative expressed through the pre-activation x and activation y.
double activate_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::sigmoid:
      return y * (1.0 - y);
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::linear:
      break;
  }
  return 1.0;
}

void affine(const DenseParams& p, std::span<const double> in, std::vector<double>& out) {
  const std::size_t rows = p.weight.rows;
  const std::size_t cols = p.weight.cols;
  out.resize(rows);
  const double* w = p.weight.data.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = p.bias[r];
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * in[c];
    out[r] = acc;
  }
}

// Accumulates dW += delta * in^T, db += delta, and writes W^T delta to in_grad.
void affine_backward(const DenseParams& p, std::span<const double> in, std::span<const double> delta,
                     DenseParams* grad, std::vector<double>& in_grad, bool accumulate_input) {
  const std::size_t rows = p.weight.rows;
  const std::size_t cols = p.weight.cols;
  if (!accumulate_input) in_grad.assign(cols, 0.0);
  const double* w = p.weight.data.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = delta[r];
    if (d == 0.0) continue;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) in_grad[c] += wr[c] * d;
    if (grad) {
      double* gr = grad->weight.data.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) gr[c] += d * in[c];
      grad->bias[r] += d;
    }
  }
}

DenseParams glorot(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  DenseParams p{Matrix(out, in), std::vector<double>(out, 0.0)};
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& w : p.weight.data) w = dist(rng);
  return p;
}

void check_dense(const DenseParams& p, std::size_t in, std::size_t out, const char* what) {
  if (p.weight.rows != out || p.weight.cols != in || p.weight.data.size() != in * out || p.bias.size() != out) {
    throw ShapeError(std::string("parameter shape mismatch in ") + what);
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::relu:
      return "relu";
    case Activation::linear:
      break;
  }
  return "linear";
}

Activation activation_from_string(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  if (name == "linear") return Activation::linear;
  throw SpecError("unknown activation '" + std::string(name) + "'");
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw SpecError("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].input_size == 0 || layers[i].output_size == 0) {
      throw SpecError("layer " + std::to_string(i) + " has a zero dimension");
    }
  }
  if (!variational) {
    if (latent_size != 0 || encoder_depth != 0) throw SpecError("latent fields set on a non-variational network");
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
      if (layers[i].output_size != layers[i + 1].input_size) {
        throw SpecError("layer chain mismatch between layers " + std::to_string(i) + " and " + std::to_string(i + 1));
      }
    }
    return;
  }
  if (latent_size == 0) throw SpecError("variational network requires latent_size >= 1");
  if (encoder_depth == 0 || encoder_depth >= layers.size()) {
    throw SpecError("variational network requires a non-empty encoder and generator");
  }
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    if (i + 1 == encoder_depth) {
      if (layers[i + 1].input_size != latent_size) throw SpecError("generator input must equal latent_size");
      continue;
    }
    if (layers[i].output_size != layers[i + 1].input_size) {
      throw SpecError("layer chain mismatch between layers " + std::to_string(i) + " and " + std::to_string(i + 1));
    }
  }
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet z = *this;
  z.frozen = false;
  z.for_each_tensor([](std::span<double> t) { std::fill(t.begin(), t.end(), 0.0); });
  return z;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](std::span<const double> t) { n += t.size(); });
  return n;
}

ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ParameterSet p;
  p.layers.reserve(spec.layers.size());
  for (const auto& l : spec.layers) p.layers.push_back(glorot(l.input_size, l.output_size, rng));
  if (spec.variational) {
    p.mu_head = glorot(spec.encoder_output_size(), spec.latent_size, rng);
    p.logvar_head = glorot(spec.encoder_output_size(), spec.latent_size, rng);
  }
  return p;
}

void check_shapes(const NetworkSpec& spec, const ParameterSet& params) {
  if (params.layers.size() != spec.layers.size()) throw ShapeError("layer count mismatch");
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    check_dense(params.layers[i], spec.layers[i].input_size, spec.layers[i].output_size, "dense layer");
  }
  if (spec.variational) {
    if (!params.mu_head || !params.logvar_head) throw ShapeError("variational network is missing latent heads");
    check_dense(*params.mu_head, spec.encoder_output_size(), spec.latent_size, "mu head");
    check_dense(*params.logvar_head, spec.encoder_output_size(), spec.latent_size, "logvar head");
  } else if (params.mu_head || params.logvar_head) {
    throw ShapeError("latent heads present on a non-variational network");
  }
}

void forward(const ParameterSet& params, const NetworkSpec& spec, std::span<const double> input,
             std::span<const double> noise, ForwardCache& cache) {
  cache.valid = false;
  if (input.size() != spec.input_size()) {
    throw ShapeError("input length " + std::to_string(input.size()) + " != " + std::to_string(spec.input_size()));
  }
  for (double v : input) {
    if (!std::isfinite(v)) throw NumericError("non-finite network input");
  }
  if (spec.variational && !noise.empty() && noise.size() != spec.latent_size) {
    throw ShapeError("noise length must equal latent_size");
  }
  if (!spec.variational && !noise.empty()) throw ShapeError("noise supplied to a non-variational network");

  const std::size_t n = spec.layers.size();
  cache.pre.resize(n);
  cache.post.resize(n + 1);
  cache.post[0].assign(input.begin(), input.end());

  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> in = cache.post[i];
    if (spec.variational && i == spec.encoder_depth) {
      const std::span<const double> h = cache.post[i];
      affine(*params.mu_head, h, cache.mu);
      affine(*params.logvar_head, h, cache.logvar_raw);
      const std::size_t m = spec.latent_size;
      cache.logvar.resize(m);
      cache.z.resize(m);
      if (noise.empty()) {
        cache.noise.assign(m, 0.0);
      } else {
        cache.noise.assign(noise.begin(), noise.end());
      }
      for (std::size_t j = 0; j < m; ++j) {
        cache.logvar[j] = std::clamp(cache.logvar_raw[j], kLogvarMin, kLogvarMax);
        cache.z[j] = cache.mu[j] + std::exp(0.5 * cache.logvar[j]) * cache.noise[j];
      }
      in = cache.z;
    }
    affine(params.layers[i], in, cache.pre[i]);
    auto& out = cache.post[i + 1];
    out.resize(cache.pre[i].size());
    const Activation act = spec.layers[i].activation;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = activate(act, cache.pre[i][j]);
  }
  cache.valid = true;
}

ForwardResult forward(const ParameterSet& params, const NetworkSpec& spec, std::span<const double> input,
                      std::span<const double> noise) {
  ForwardResult r;
  forward(params, spec, input, noise, r.cache);
  r.output.assign(r.cache.output().begin(), r.cache.output().end());
  return r;
}

void backward(const ParameterSet& params, const NetworkSpec& spec, const ForwardCache& cache,
              std::span<const double> output_grad, double kl_scale, ParameterSet* grads,
              std::vector<double>& input_grad) {
  const std::size_t n = spec.layers.size();
  if (!cache.valid || cache.post.size() != n + 1 || cache.pre.size() != n) {
    throw UsageError("backward called without a matching forward cache");
  }
  if (output_grad.size() != spec.output_size()) throw ShapeError("output gradient length mismatch");

  thread_local std::vector<double> delta, upstream, d_mu, d_logvar;
  delta.assign(output_grad.begin(), output_grad.end());
  for (std::size_t i = n; i-- > 0;) {
    const Activation act = spec.layers[i].activation;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      delta[j] *= activate_grad(act, cache.pre[i][j], cache.post[i + 1][j]);
    }
    const bool at_latent = spec.variational && i == spec.encoder_depth;
    std::span<const double> in = at_latent ? std::span<const double>(cache.z) : std::span<const double>(cache.post[i]);
    affine_backward(params.layers[i], in, delta, grads ? &grads->layers[i] : nullptr, upstream, false);

    if (at_latent) {
      // upstream holds dL/dz; route it through the reparameterization and add the KL term.
      const std::size_t m = spec.latent_size;
      d_mu.resize(m);
      d_logvar.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double lv = cache.logvar[j];
        const double sigma = std::exp(0.5 * lv);
        d_mu[j] = upstream[j] + kl_scale * cache.mu[j];
        double dlv = upstream[j] * cache.noise[j] * 0.5 * sigma + kl_scale * 0.5 * (std::exp(lv) - 1.0);
        if (cache.logvar_raw[j] < kLogvarMin || cache.logvar_raw[j] > kLogvarMax) dlv = 0.0;
        d_logvar[j] = dlv;
      }
      const std::span<const double> h = cache.post[i];
      affine_backward(*params.mu_head, h, d_mu, grads ? &*grads->mu_head : nullptr, upstream, false);
      affine_backward(*params.logvar_head, h, d_logvar, grads ? &*grads->logvar_head : nullptr, upstream, true);
    }
    delta.swap(upstream);
  }
  input_grad.assign(delta.begin(), delta.end());
}

std::uint64_t content_hash(const Network& net) {
  Fnv1a h;
  h.update(static_cast<std::uint64_t>(net.spec.layers.size()));
  for (const auto& l : net.spec.layers) {
    h.update(static_cast<std::uint64_t>(l.input_size));
    h.update(static_cast<std::uint64_t>(l.output_size));
    h.update(static_cast<std::uint64_t>(l.activation));
  }
  h.update(static_cast<std::uint64_t>(net.spec.variational));
  h.update(static_cast<std::uint64_t>(net.spec.latent_size));
  h.update(static_cast<std::uint64_t>(net.spec.encoder_depth));
  net.params.for_each_tensor([&](std::span<const double> t) { h.update(t); });
  return h.digest();
}

std::vector<std::size_t> layer_widths(const NetworkSpec& spec) {
  std::vector<std::size_t> w{spec.input_size()};
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.variational && i == spec.encoder_depth) w.push_back(spec.latent_size);
    w.push_back(spec.layers[i].output_size);
  }
  return w;
}

}  // namespace pbd::nn
