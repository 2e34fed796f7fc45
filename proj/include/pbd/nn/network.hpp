#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pbd::nn {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool empty() const { return rows == 0; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

enum class Activation { sigmoid, relu, linear };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct LayerSpec {
  std::size_t input_size = 1;
  std::size_t output_size = 1;
  Activation activation = Activation::linear;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Topology of a dense network.
///
/// A variational network splits `layers` into an encoder (the first
/// `encoder_depth` layers) and a generator (the rest). The encoder output
/// feeds two linear heads producing the latent mean and log-variance; the
/// generator consumes the sampled latent vector z = mu + exp(logvar/2) * eps.
struct NetworkSpec {
  std::vector<LayerSpec> layers;
  bool variational = false;
  std::size_t latent_size = 0;
  std::size_t encoder_depth = 0;

  /// Throws SpecError when the topology is inconsistent.
  void validate() const;

  std::size_t input_size() const { return layers.front().input_size; }
  std::size_t output_size() const { return layers.back().output_size; }
  /// Width feeding the latent heads (variational only).
  std::size_t encoder_output_size() const { return layers[encoder_depth - 1].output_size; }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct DenseParams {
  Matrix weight;  // output_size x input_size
  std::vector<double> bias;

  friend bool operator==(const DenseParams&, const DenseParams&) = default;
};

/// Trainable values of a network. Also used as the container for gradients
/// and optimizer moments, which share its shape.
struct ParameterSet {
  std::vector<DenseParams> layers;
  std::optional<DenseParams> mu_head;
  std::optional<DenseParams> logvar_head;
  bool frozen = false;

  /// Same shape, all values zero, not frozen.
  ParameterSet zeros_like() const;

  std::size_t parameter_count() const;

  /// Visits every tensor in a fixed order: layer weights and biases in layer
  /// order, then the mu head, then the logvar head.
  template <typename F>
  void for_each_tensor(F&& f) {
    for (auto& l : layers) {
      f(std::span<double>(l.weight.data));
      f(std::span<double>(l.bias));
    }
    for (auto* head : {&mu_head, &logvar_head}) {
      if (*head) {
        f(std::span<double>((*head)->weight.data));
        f(std::span<double>((*head)->bias));
      }
    }
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    for (const auto& l : layers) {
      f(std::span<const double>(l.weight.data));
      f(std::span<const double>(l.bias));
    }
    for (const auto* head : {&mu_head, &logvar_head}) {
      if (*head) {
        f(std::span<const double>((*head)->weight.data));
        f(std::span<const double>((*head)->bias));
      }
    }
  }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

struct Network {
  NetworkSpec spec;
  ParameterSet params;

  friend bool operator==(const Network&, const Network&) = default;
};

/// Log-variance values are clamped to this interval before exponentiation.
inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed);

/// Throws ShapeError unless `params` matches `spec` exactly.
void check_shapes(const NetworkSpec& spec, const ParameterSet& params);

/// Intermediate values retained for backpropagation. Buffers are reused
/// across calls, so one cache per thread avoids reallocations in hot loops.
struct ForwardCache {
  std::vector<std::vector<double>> pre;   // pre-activation of layer i
  std::vector<std::vector<double>> post;  // post[0] = input, post[i + 1] = output of layer i
  // Variational path only.
  std::vector<double> mu;
  std::vector<double> logvar_raw;
  std::vector<double> logvar;
  std::vector<double> noise;
  std::vector<double> z;
  bool valid = false;

  std::span<const double> output() const { return post.back(); }
};

/// Runs the network on one input vector. For variational networks `noise`
/// supplies eps (length latent_size); an empty span means eps = 0.
void forward(const ParameterSet& params, const NetworkSpec& spec, std::span<const double> input,
             std::span<const double> noise, ForwardCache& cache);

struct ForwardResult {
  std::vector<double> output;
  ForwardCache cache;
};

ForwardResult forward(const ParameterSet& params, const NetworkSpec& spec, std::span<const double> input,
                      std::span<const double> noise = {});

/// Backpropagates dLoss/dOutput through one network.
///
/// `kl_scale` adds kl_scale * KL(mu, logvar) for this sample to the loss
/// (variational networks only). Parameter gradients are accumulated into
/// `grads` when it is non-null; dLoss/dInput is written to `input_grad`.
void backward(const ParameterSet& params, const NetworkSpec& spec, const ForwardCache& cache,
              std::span<const double> output_grad, double kl_scale, ParameterSet* grads,
              std::vector<double>& input_grad);

/// FNV-1a digest of the topology and the raw bits of every parameter.
std::uint64_t content_hash(const Network& net);

/// Widths of the activations along the main path: input, then each layer's
/// output. Variational networks insert the latent width between the encoder
/// and the generator.
std::vector<std::size_t> layer_widths(const NetworkSpec& spec);

}  // namespace pbd::nn
