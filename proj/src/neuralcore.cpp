#include "pdet/neuralcore.hpp"

#include <cmath>
#include <stdexcept>

#include "pdet/kernels.hpp"

namespace pdet {

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

Mlp Mlp::init(std::size_t in, const std::vector<LayerSpec>& spec,
              rng::Stream& rs) {
  if (spec.empty()) throw std::invalid_argument("Mlp::init: no layers");
  Mlp mlp;
  std::size_t prev = in;
  for (const LayerSpec& ls : spec) {
    Layer layer;
    layer.weights = Matrix(ls.out, prev);
    layer.bias.assign(ls.out, 0.0);
    layer.act = ls.act;
    const double bound =
        std::sqrt(6.0 / static_cast<double>(prev + ls.out));
    for (double& w : layer.weights.data) w = rs.uniform(-bound, bound);
    mlp.layers.push_back(std::move(layer));
    prev = ls.out;
  }
  return mlp;
}

void Mlp::copy_params_to(std::span<double> out) const {
  std::size_t pos = 0;
  for (const Layer& l : layers) {
    for (const double w : l.weights.data) out[pos++] = w;
    for (const double b : l.bias) out[pos++] = b;
  }
}

void Mlp::set_params_from(std::span<const double> in) {
  std::size_t pos = 0;
  for (Layer& l : layers) {
    for (double& w : l.weights.data) w = in[pos++];
    for (double& b : l.bias) b = in[pos++];
  }
}

MlpGrads MlpGrads::zeros_like(const Mlp& mlp) {
  MlpGrads g;
  for (const Layer& l : mlp.layers) {
    g.weights.emplace_back(l.weights.rows, l.weights.cols);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void MlpGrads::accumulate(const MlpGrads& other) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    kernels::add(weights[i].data.data(), weights[i].data.data(),
                 other.weights[i].data.data(), weights[i].size());
    kernels::add(bias[i].data(), bias[i].data(), other.bias[i].data(),
                 bias[i].size());
  }
}

void MlpGrads::scale(double factor) {
  for (Matrix& w : weights) kernels::scale(w.data.data(), factor, w.size());
  for (std::vector<double>& b : bias)
    kernels::scale(b.data(), factor, b.size());
}

bool MlpGrads::all_finite() const {
  for (const Matrix& w : weights)
    for (const double x : w.data)
      if (!std::isfinite(x)) return false;
  for (const std::vector<double>& b : bias)
    for (const double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

namespace {

void apply_activation(Activation act, const std::vector<double>& pre,
                      std::vector<double>& out) {
  out.resize(pre.size());
  switch (act) {
    case Activation::relu:
      kernels::relu(out.data(), pre.data(), pre.size());
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = std::tanh(pre[i]);
      break;
    case Activation::linear:
      out = pre;
      break;
  }
}

}  // namespace

ForwardCache forward(const Mlp& mlp, std::span<const double> input) {
  if (input.size() != mlp.in_dim())
    throw std::invalid_argument(
        "forward: input length " + std::to_string(input.size()) +
        " does not match layer 0 in-dimension " + std::to_string(mlp.in_dim()));

  ForwardCache cache;
  cache.layer_count = mlp.layers.size();
  std::vector<double> cur(input.begin(), input.end());
  for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
    const Layer& layer = mlp.layers[li];
    if (cur.size() != layer.in_dim())
      throw std::invalid_argument("forward: shape mismatch at layer " +
                                  std::to_string(li));
    cache.inputs.push_back(cur);
    std::vector<double> pre(layer.out_dim());
    kernels::matvec(layer.weights.data.data(), cur.data(), layer.bias.data(),
                    pre.data(), layer.out_dim(), layer.in_dim());
    apply_activation(layer.act, pre, cur);
    cache.pre.push_back(std::move(pre));
  }
  cache.output = cur;
  return cache;
}

std::vector<double> forward_value(const Mlp& mlp,
                                  std::span<const double> input) {
  return forward(mlp, input).output;
}

MlpGrads backward(const Mlp& mlp, const ForwardCache& cache,
                  std::span<const double> output_grad,
                  std::vector<double>& input_grad) {
  if (cache.layer_count != mlp.layers.size() ||
      cache.inputs.size() != mlp.layers.size())
    throw std::invalid_argument("backward: cache does not match network");
  if (output_grad.size() != mlp.out_dim())
    throw std::invalid_argument("backward: output gradient has wrong size");

  MlpGrads grads = MlpGrads::zeros_like(mlp);
  std::vector<double> g(output_grad.begin(), output_grad.end());
  for (std::size_t i = mlp.layers.size(); i-- > 0;) {
    const Layer& layer = mlp.layers[i];
    const std::vector<double>& pre = cache.pre[i];
    const std::vector<double>& x = cache.inputs[i];
    if (pre.size() != layer.out_dim() || x.size() != layer.in_dim())
      throw std::invalid_argument("backward: stale cache at layer " +
                                  std::to_string(i));

    // gradient through the activation
    switch (layer.act) {
      case Activation::relu:
        kernels::relu_backward(g.data(), pre.data(), g.size());
        break;
      case Activation::tanh:
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double a = std::tanh(pre[k]);
          g[k] *= 1.0 - a * a;
        }
        break;
      case Activation::linear:
        break;
    }

    kernels::outer_acc(grads.weights[i].data.data(), g.data(), x.data(),
                       layer.out_dim(), layer.in_dim());
    kernels::add(grads.bias[i].data(), grads.bias[i].data(), g.data(),
                 g.size());

    std::vector<double> gin(layer.in_dim(), 0.0);
    kernels::matvec_t_acc(layer.weights.data.data(), g.data(), gin.data(),
                          layer.out_dim(), layer.in_dim());
    g = std::move(gin);
  }
  input_grad = std::move(g);
  return grads;
}

AdamState AdamState::init(const Mlp& mlp, double base_lr, double decay) {
  AdamState st;
  for (const Layer& l : mlp.layers) {
    st.m_w.emplace_back(l.weights.rows, l.weights.cols);
    st.v_w.emplace_back(l.weights.rows, l.weights.cols);
    st.m_b.emplace_back(l.bias.size(), 0.0);
    st.v_b.emplace_back(l.bias.size(), 0.0);
  }
  st.base_lr = base_lr;
  st.decay = decay;
  return st;
}

double AdamState::effective_lr() const {
  return base_lr * std::pow(decay, epoch);
}

void adam_step(Mlp& mlp, const MlpGrads& grads, AdamState& state) {
  if (state.m_w.size() != mlp.layers.size())
    throw std::invalid_argument("adam_step: state does not match network");
  if (!grads.all_finite())
    throw std::runtime_error("adam_step: non-finite gradient");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double lr = state.effective_lr();
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    Layer& l = mlp.layers[i];
    kernels::adam_update(l.weights.data.data(), state.m_w[i].data.data(),
                         state.v_w[i].data.data(), grads.weights[i].data.data(),
                         l.weights.size(), lr, state.beta1, state.beta2,
                         state.eps, bc1, bc2);
    kernels::adam_update(l.bias.data(), state.m_b[i].data(),
                         state.v_b[i].data(), grads.bias[i].data(),
                         l.bias.size(), lr, state.beta1, state.beta2, state.eps,
                         bc1, bc2);
  }
}

void soft_update(const Mlp& online, Mlp& target, double tau) {
  if (online.layers.size() != target.layers.size())
    throw std::invalid_argument("soft_update: layer count mismatch");
  for (std::size_t i = 0; i < online.layers.size(); ++i) {
    const Layer& src = online.layers[i];
    Layer& dst = target.layers[i];
    if (!src.weights.same_shape(dst.weights) ||
        src.bias.size() != dst.bias.size())
      throw std::invalid_argument("soft_update: shape mismatch at layer " +
                                  std::to_string(i));
    kernels::lerp(dst.weights.data.data(), src.weights.data.data(), tau,
                  src.weights.size());
    kernels::lerp(dst.bias.data(), src.bias.data(), tau, src.bias.size());
  }
}

}  // namespace pdet
