#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdet/matrix.hpp"
#include "pdet/rng.hpp"

namespace pdet {

enum class Activation { relu, tanh, linear };

struct Layer {
  Matrix weights;              // out x in
  std::vector<double> bias;    // out
  Activation act = Activation::linear;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
  bool operator==(const Layer&) const = default;
};

struct LayerSpec {
  std::size_t out = 0;
  Activation act = Activation::linear;
};

// Small fixed-shape dense network. Forward caches what backward needs;
// backward produces exact reverse-mode gradients.
struct Mlp {
  std::vector<Layer> layers;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  std::size_t param_count() const;

  // Glorot-uniform weights, zero biases.
  static Mlp init(std::size_t in, const std::vector<LayerSpec>& spec,
                  rng::Stream& rs);

  // flat parameter views in a fixed order (per layer: weights then bias)
  void copy_params_to(std::span<double> out) const;
  void set_params_from(std::span<const double> in);
  bool operator==(const Mlp&) const = default;
};

struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;

  static MlpGrads zeros_like(const Mlp& mlp);
  void accumulate(const MlpGrads& other);
  void scale(double factor);
  bool all_finite() const;
};

struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation per layer
  std::vector<double> output;
  std::size_t layer_count = 0;
};

// output of the network on `input`, with intermediates cached for backward
ForwardCache forward(const Mlp& mlp, std::span<const double> input);
// convenience: forward without keeping the cache
std::vector<double> forward_value(const Mlp& mlp, std::span<const double> input);

// Returns parameter gradients and writes the gradient w.r.t. the network
// input into `input_grad` (resized as needed).
MlpGrads backward(const Mlp& mlp, const ForwardCache& cache,
                  std::span<const double> output_grad,
                  std::vector<double>& input_grad);

struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<std::vector<double>> m_b, v_b;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double base_lr = 1e-3;
  double decay = 1.0;  // per-epoch multiplicative factor
  int epoch = 0;

  static AdamState init(const Mlp& mlp, double base_lr, double decay = 1.0);
  double effective_lr() const;
};

// One Adam step with bias correction. Throws on non-finite gradients.
void adam_step(Mlp& mlp, const MlpGrads& grads, AdamState& state);

// target <- tau * online + (1 - tau) * target, elementwise
void soft_update(const Mlp& online, Mlp& target, double tau);

}  // namespace pdet
