#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "augablate/nn/layers.hpp"

namespace augb {

enum class Mode { Train, Eval };

// Weight decay applies to Weight parameters only; Bias and Norm (batchnorm
// gamma/beta) stay undecayed.
enum class ParamClass { Weight, Bias, Norm };

template <typename S>
struct ParamRef {
  std::string name;
  ParamClass cls;
  Tensor<S>* value;
  Tensor<S>* grad;
};

// Layers own their parameters, gradients, and whatever the backward pass
// needs from the last training-mode forward.

template <typename S>
struct ConvLayer {
  std::string name;
  Index stride = 1;
  bool has_bias = false;
  Tensor<S> kernel, bias, g_kernel, g_bias;
  Tensor<S> in;
};

template <typename S>
struct NormLayer {
  std::string name;
  Tensor<S> gamma, beta, run_mean, run_var, g_gamma, g_beta;
  BatchNormCache<S> cache;
};

template <typename S>
struct ReluLayer {
  Tensor<S> in;
};

template <typename S>
struct DropoutLayer {
  double rate = 0.0;
  Tensor<S> mask;
};

template <typename S>
struct GlobalPoolLayer {
  Shape in_shape;
};

template <typename S>
struct AvgPoolLayer {
  Index window = 1;
  Shape in_shape;
};

template <typename S>
struct DenseLayer {
  std::string name;
  Tensor<S> weight, bias, g_weight, g_bias;
  Tensor<S> in;    // flattened (N, F)
  Shape in_shape;  // pre-flatten shape
};

template <typename S>
using Layer = std::variant<ConvLayer<S>, NormLayer<S>, ReluLayer<S>, DropoutLayer<S>,
                           GlobalPoolLayer<S>, AvgPoolLayer<S>, DenseLayer<S>>;

template <typename S>
Tensor<S> forward_layer(Layer<S>& layer, const Tensor<S>& x, Mode mode, Rng* rng,
                        std::uint64_t* mask_draws) {
  const bool train = mode == Mode::Train;
  return std::visit(
      [&](auto& l) -> Tensor<S> {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, ConvLayer<S>>) {
          if (train) l.in = x;
          return conv2d_forward(x, l.kernel, l.has_bias ? &l.bias : nullptr, l.stride);
        } else if constexpr (std::is_same_v<L, NormLayer<S>>) {
          return batchnorm_forward(x, l.gamma, l.beta, l.run_mean, l.run_var, train,
                                   train ? &l.cache : nullptr);
        } else if constexpr (std::is_same_v<L, ReluLayer<S>>) {
          if (train) l.in = x;
          return relu_forward(x);
        } else if constexpr (std::is_same_v<L, DropoutLayer<S>>) {
          return dropout_forward(x, l.rate, train, rng, train ? &l.mask : nullptr,
                                 mask_draws);
        } else if constexpr (std::is_same_v<L, GlobalPoolLayer<S>>) {
          l.in_shape = x.shape();
          return global_avg_pool_forward(x);
        } else if constexpr (std::is_same_v<L, AvgPoolLayer<S>>) {
          l.in_shape = x.shape();
          return spatial_avg_pool_forward(x, l.window);
        } else {
          static_assert(std::is_same_v<L, DenseLayer<S>>);
          l.in_shape = x.shape();
          Tensor<S> flat = x.reshaped({x.dim(0), x.size() / x.dim(0)});
          if (train) l.in = flat;
          return fully_connected_forward(flat, l.weight, l.bias);
        }
      },
      layer);
}

template <typename S>
Tensor<S> backward_layer(Layer<S>& layer, const Tensor<S>& g) {
  return std::visit(
      [&](auto& l) -> Tensor<S> {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, ConvLayer<S>>) {
          Tensor<S> gx;
          conv2d_backward(l.in, l.kernel, l.stride, g, gx, l.g_kernel,
                          l.has_bias ? &l.g_bias : nullptr);
          return gx;
        } else if constexpr (std::is_same_v<L, NormLayer<S>>) {
          return batchnorm_backward(g, l.cache, l.gamma, l.g_gamma, l.g_beta);
        } else if constexpr (std::is_same_v<L, ReluLayer<S>>) {
          return relu_backward(l.in, g);
        } else if constexpr (std::is_same_v<L, DropoutLayer<S>>) {
          return dropout_backward(g, l.mask);
        } else if constexpr (std::is_same_v<L, GlobalPoolLayer<S>>) {
          return global_avg_pool_backward(l.in_shape, g);
        } else if constexpr (std::is_same_v<L, AvgPoolLayer<S>>) {
          return spatial_avg_pool_backward(l.in_shape, l.window, g);
        } else {
          static_assert(std::is_same_v<L, DenseLayer<S>>);
          Tensor<S> gx;
          fully_connected_backward(l.in, l.weight, g, gx, l.g_weight, l.g_bias);
          return gx.reshaped(l.in_shape);
        }
      },
      layer);
}

// Pre-activation residual block. Group-entry blocks carry a `pre` (BN+ReLU)
// whose output feeds both the body and the 1x1 projection; equal-shape blocks
// have an empty `pre`, start the body with BN+ReLU, and add the raw input.
template <typename S>
struct ResidualBlock {
  std::vector<Layer<S>> pre;
  std::vector<Layer<S>> body;
  std::optional<ConvLayer<S>> projection;
};

template <typename S>
using Stage = std::variant<Layer<S>, ResidualBlock<S>>;

template <typename S>
class Network {
 public:
  std::vector<Stage<S>> stages;
  std::uint64_t mask_draws = 0;  // uniforms consumed by dropout masks

  // Returns logits (N, classes); apply softmax separately when probabilities
  // are wanted. `rng` may be null in eval mode or when no dropout is active.
  Tensor<S> forward(const Tensor<S>& x, Mode mode, Rng* rng = nullptr) {
    Tensor<S> h = x;
    for (auto& stage : stages) {
      if (auto* layer = std::get_if<Layer<S>>(&stage)) {
        h = forward_layer(*layer, h, mode, rng, &mask_draws);
      } else {
        auto& block = std::get<ResidualBlock<S>>(stage);
        Tensor<S> body_in = h;
        for (auto& l : block.pre) body_in = forward_layer(l, body_in, mode, rng, &mask_draws);
        Tensor<S> y = body_in;
        for (auto& l : block.body) y = forward_layer(l, y, mode, rng, &mask_draws);
        if (block.projection) {
          Layer<S> as_layer = std::move(*block.projection);
          Tensor<S> shortcut = forward_layer(as_layer, body_in, mode, rng, &mask_draws);
          *block.projection = std::move(std::get<ConvLayer<S>>(as_layer));
          y.vec() += shortcut.vec();
        } else {
          if (!y.same_shape(h))
            throw std::logic_error("residual block without projection changed shape");
          y.vec() += h.vec();
        }
        h = std::move(y);
      }
    }
    return h;
  }

  // Propagates d(loss)/d(logits) back to the input, overwriting every
  // parameter gradient. Requires a preceding training-mode forward.
  Tensor<S> backward(const Tensor<S>& grad_logits) {
    Tensor<S> g = grad_logits;
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
      if (auto* layer = std::get_if<Layer<S>>(&*it)) {
        g = backward_layer(*layer, g);
      } else {
        auto& block = std::get<ResidualBlock<S>>(*it);
        Tensor<S> gb = g;
        for (auto bit = block.body.rbegin(); bit != block.body.rend(); ++bit)
          gb = backward_layer(*bit, gb);
        if (block.projection) {
          Layer<S> as_layer = std::move(*block.projection);
          Tensor<S> gp = backward_layer(as_layer, g);
          *block.projection = std::move(std::get<ConvLayer<S>>(as_layer));
          gb.vec() += gp.vec();
          for (auto pit = block.pre.rbegin(); pit != block.pre.rend(); ++pit)
            gb = backward_layer(*pit, gb);
          g = std::move(gb);
        } else {
          gb.vec() += g.vec();
          g = std::move(gb);
        }
      }
    }
    return g;
  }

  std::vector<ParamRef<S>> params() {
    std::vector<ParamRef<S>> out;
    for (auto& stage : stages) visit_stage(stage, out);
    return out;
  }

  // Parameters plus batchnorm running statistics, in declaration order; the
  // full set a checkpoint must capture to reproduce eval behaviour.
  std::vector<std::pair<std::string, Tensor<S>*>> state_tensors() {
    std::vector<std::pair<std::string, Tensor<S>*>> out;
    for (ParamRef<S>& p : params()) out.emplace_back(p.name, p.value);
    for (auto& stage : stages) visit_running(stage, out);
    return out;
  }

 private:
  static void collect_layer(Layer<S>& layer, std::vector<ParamRef<S>>& out) {
    if (auto* c = std::get_if<ConvLayer<S>>(&layer)) {
      out.push_back({c->name + ".kernel", ParamClass::Weight, &c->kernel, &c->g_kernel});
      if (c->has_bias)
        out.push_back({c->name + ".bias", ParamClass::Bias, &c->bias, &c->g_bias});
    } else if (auto* n = std::get_if<NormLayer<S>>(&layer)) {
      out.push_back({n->name + ".gamma", ParamClass::Norm, &n->gamma, &n->g_gamma});
      out.push_back({n->name + ".beta", ParamClass::Norm, &n->beta, &n->g_beta});
    } else if (auto* d = std::get_if<DenseLayer<S>>(&layer)) {
      out.push_back({d->name + ".weight", ParamClass::Weight, &d->weight, &d->g_weight});
      out.push_back({d->name + ".bias", ParamClass::Bias, &d->bias, &d->g_bias});
    }
  }

  static void visit_stage(Stage<S>& stage, std::vector<ParamRef<S>>& out) {
    if (auto* layer = std::get_if<Layer<S>>(&stage)) {
      collect_layer(*layer, out);
    } else {
      auto& block = std::get<ResidualBlock<S>>(stage);
      for (auto& l : block.pre) collect_layer(l, out);
      for (auto& l : block.body) collect_layer(l, out);
      if (block.projection) {
        out.push_back({block.projection->name + ".kernel", ParamClass::Weight,
                       &block.projection->kernel, &block.projection->g_kernel});
      }
    }
  }

  static void collect_running(Layer<S>& layer,
                              std::vector<std::pair<std::string, Tensor<S>*>>& out) {
    if (auto* n = std::get_if<NormLayer<S>>(&layer)) {
      out.emplace_back(n->name + ".run_mean", &n->run_mean);
      out.emplace_back(n->name + ".run_var", &n->run_var);
    }
  }

  static void visit_running(Stage<S>& stage,
                            std::vector<std::pair<std::string, Tensor<S>*>>& out) {
    if (auto* layer = std::get_if<Layer<S>>(&stage)) {
      collect_running(*layer, out);
    } else {
      auto& block = std::get<ResidualBlock<S>>(stage);
      for (auto& l : block.pre) collect_running(l, out);
      for (auto& l : block.body) collect_running(l, out);
    }
  }
};

// Copies named tensors into the network's state. The name sets must match
// exactly and shapes must agree; anything else means the checkpoint belongs
// to a different architecture.
template <typename S>
void load_state(Network<S>& net, const std::map<std::string, Tensor<S>>& tensors) {
  auto state = net.state_tensors();
  if (state.size() != tensors.size())
    throw std::runtime_error("state mismatch: network has " + std::to_string(state.size()) +
                             " tensors, checkpoint has " + std::to_string(tensors.size()));
  for (auto& [name, dst] : state) {
    const auto it = tensors.find(name);
    if (it == tensors.end())
      throw std::runtime_error("checkpoint is missing tensor '" + name + "'");
    if (it->second.shape() != dst->shape())
      throw std::runtime_error("tensor '" + name + "' has shape " +
                               shape_str(it->second.shape()) + ", network expects " +
                               shape_str(dst->shape()));
    *dst = it->second;
  }
}

}  // namespace augb
