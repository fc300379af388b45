#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "augablate/arch/network.hpp"
#include "augablate/nn/init.hpp"

// Network construction runs off a plan: a shape-level description that the
// parameter counter and the builder both walk, so the reported count is the
// count of what actually gets built.

namespace augb {

struct ConvPlan {
  std::string name;
  Index d, c_in, c_out, stride;
  bool bias = false;
};
struct NormPlan {
  std::string name;
  Index c;
};
struct ReluPlan {};
struct DropoutPlan {
  double rate;
};
struct GlobalPoolPlan {};
struct AvgPoolPlan {
  Index window;
};
struct DensePlan {
  std::string name;
  Index f, k;
};

using LayerPlan =
    std::variant<ConvPlan, NormPlan, ReluPlan, DropoutPlan, GlobalPoolPlan, AvgPoolPlan, DensePlan>;

struct BlockPlan {
  std::vector<LayerPlan> pre;
  std::vector<LayerPlan> body;
  std::vector<ConvPlan> projection;  // empty or one entry
};

using StagePlan = std::variant<LayerPlan, BlockPlan>;

enum class InitKind { XavierUniform, HeNormal };

struct NetworkPlan {
  std::vector<StagePlan> stages;
  InitKind init = InitKind::XavierUniform;
  Index classes = 10;
};

struct ArchitectureSpec {
  std::string family = "allcnn-cifar";  // allcnn-cifar | allcnn-imagenet | wrn
  Index classes = 10;
  double width_scale = 1.0;  // channel multiplier, allcnn families
  Index depth = 28;          // wrn: 6n+4
  Index width = 10;          // wrn: channel multiplier k
  bool dropout = false;      // include the dropout regularizer
};

namespace detail {

inline Index scaled(Index base, double ws) {
  const Index c = static_cast<Index>(std::lround(base * ws));
  if (c < 1) throw std::invalid_argument("width scale " + std::to_string(ws) +
                                         " collapses a " + std::to_string(base) +
                                         "-channel layer");
  return c;
}

// conv + batchnorm + relu; the building unit of both allcnn families.
inline void conv_unit(NetworkPlan& plan, int& idx, Index d, Index c_in, Index c_out,
                      Index stride) {
  const std::string name = "conv" + std::to_string(idx++);
  plan.stages.emplace_back(LayerPlan{ConvPlan{name, d, c_in, c_out, stride, false}});
  plan.stages.emplace_back(LayerPlan{NormPlan{name + ".bn", c_out}});
  plan.stages.emplace_back(LayerPlan{ReluPlan{}});
}

}  // namespace detail

inline NetworkPlan allcnn_cifar_plan(const ArchitectureSpec& s) {
  const Index a = detail::scaled(96, s.width_scale);
  const Index b = detail::scaled(192, s.width_scale);
  NetworkPlan plan;
  plan.init = InitKind::XavierUniform;
  plan.classes = s.classes;
  int idx = 0;
  if (s.dropout) plan.stages.emplace_back(LayerPlan{DropoutPlan{0.2}});
  detail::conv_unit(plan, idx, 3, 3, a, 1);
  detail::conv_unit(plan, idx, 3, a, a, 1);
  detail::conv_unit(plan, idx, 3, a, a, 2);
  if (s.dropout) plan.stages.emplace_back(LayerPlan{DropoutPlan{0.5}});
  detail::conv_unit(plan, idx, 3, a, b, 1);
  detail::conv_unit(plan, idx, 3, b, b, 1);
  detail::conv_unit(plan, idx, 3, b, b, 2);
  if (s.dropout) plan.stages.emplace_back(LayerPlan{DropoutPlan{0.5}});
  detail::conv_unit(plan, idx, 3, b, b, 1);
  detail::conv_unit(plan, idx, 1, b, b, 1);
  // Class conv: bias, no norm or nonlinearity; spatial average gives logits.
  plan.stages.emplace_back(
      LayerPlan{ConvPlan{"conv" + std::to_string(idx++), 1, b, s.classes, 1, true}});
  plan.stages.emplace_back(LayerPlan{GlobalPoolPlan{}});
  return plan;
}

inline NetworkPlan allcnn_imagenet_plan(const ArchitectureSpec& s) {
  const Index c96 = detail::scaled(96, s.width_scale);
  const Index c256 = detail::scaled(256, s.width_scale);
  const Index c384 = detail::scaled(384, s.width_scale);
  const Index c1024 = detail::scaled(1024, s.width_scale);
  NetworkPlan plan;
  plan.init = InitKind::XavierUniform;
  plan.classes = s.classes;
  int idx = 0;
  if (s.dropout) plan.stages.emplace_back(LayerPlan{DropoutPlan{0.2}});
  detail::conv_unit(plan, idx, 11, 3, c96, 2);  // strided stem, no dropout after
  detail::conv_unit(plan, idx, 1, c96, c96, 1);
  detail::conv_unit(plan, idx, 3, c96, c96, 2);
  if (s.dropout) plan.stages.emplace_back(LayerPlan{DropoutPlan{0.5}});
  detail::conv_unit(plan, idx, 5, c96, c256, 1);
  detail::conv_unit(plan, idx, 1, c256, c256, 1);
  detail::conv_unit(plan, idx, 3, c256, c256, 2);
  if (s.dropout) plan.stages.emplace_back(LayerPlan{DropoutPlan{0.5}});
  detail::conv_unit(plan, idx, 3, c256, c384, 1);
  detail::conv_unit(plan, idx, 1, c384, c384, 1);
  detail::conv_unit(plan, idx, 3, c384, c384, 2);
  if (s.dropout) plan.stages.emplace_back(LayerPlan{DropoutPlan{0.5}});
  detail::conv_unit(plan, idx, 3, c384, c1024, 1);
  detail::conv_unit(plan, idx, 1, c1024, c1024, 1);
  plan.stages.emplace_back(
      LayerPlan{ConvPlan{"conv" + std::to_string(idx++), 1, c1024, s.classes, 1, true}});
  plan.stages.emplace_back(LayerPlan{GlobalPoolPlan{}});
  return plan;
}

inline NetworkPlan wrn_plan(const ArchitectureSpec& s) {
  if ((s.depth - 4) % 6 != 0 || s.depth < 10)
    throw std::invalid_argument("wrn depth must be 6n+4 with n >= 1, got " +
                                std::to_string(s.depth));
  const Index n = (s.depth - 4) / 6;
  const Index widths[3] = {16 * s.width, 32 * s.width, 64 * s.width};
  const Index strides[3] = {1, 2, 2};
  const double drop = s.dropout ? 0.3 : 0.0;

  NetworkPlan plan;
  plan.init = InitKind::HeNormal;
  plan.classes = s.classes;
  // Bare stem: the first block's pre-activation provides its norm and relu.
  plan.stages.emplace_back(LayerPlan{ConvPlan{"stem", 3, 3, 16, 1, false}});

  Index c_in = 16;
  for (int g = 0; g < 3; ++g) {
    const Index c_out = widths[g];
    for (Index b = 0; b < n; ++b) {
      const Index stride = b == 0 ? strides[g] : 1;
      // A shape change forces a projected shortcut, fed (like the body) by
      // the pre-activation; equal shapes keep the identity shortcut on the
      // raw input and fold the leading norm+relu into the body.
      const bool entry = stride != 1 || c_in != c_out;
      const std::string base = "g" + std::to_string(g) + "b" + std::to_string(b);
      BlockPlan block;
      auto& head = entry ? block.pre : block.body;
      head.emplace_back(NormPlan{base + ".bn0", c_in});
      head.emplace_back(ReluPlan{});
      block.body.emplace_back(ConvPlan{base + ".conv0", 3, c_in, c_out, stride, false});
      block.body.emplace_back(NormPlan{base + ".bn1", c_out});
      block.body.emplace_back(ReluPlan{});
      if (drop > 0.0) block.body.emplace_back(DropoutPlan{drop});
      block.body.emplace_back(ConvPlan{base + ".conv1", 3, c_out, c_out, 1, false});
      if (entry)
        block.projection.push_back(ConvPlan{base + ".proj", 1, c_in, c_out, stride, false});
      plan.stages.emplace_back(std::move(block));
      c_in = c_out;
    }
  }
  plan.stages.emplace_back(LayerPlan{NormPlan{"head.bn", c_in}});
  plan.stages.emplace_back(LayerPlan{ReluPlan{}});
  plan.stages.emplace_back(LayerPlan{AvgPoolPlan{8}});
  plan.stages.emplace_back(LayerPlan{DensePlan{"head.fc", c_in, s.classes}});
  return plan;
}

inline NetworkPlan make_plan(const ArchitectureSpec& s) {
  if (s.family == "allcnn-cifar") return allcnn_cifar_plan(s);
  if (s.family == "allcnn-imagenet") return allcnn_imagenet_plan(s);
  if (s.family == "wrn") return wrn_plan(s);
  throw std::invalid_argument("unknown architecture family '" + s.family + "'");
}

namespace detail {

inline std::int64_t layer_param_count(const LayerPlan& lp) {
  if (const auto* c = std::get_if<ConvPlan>(&lp))
    return c->d * c->d * c->c_in * c->c_out + (c->bias ? c->c_out : 0);
  if (const auto* nm = std::get_if<NormPlan>(&lp)) return 2 * nm->c;  // gamma + beta
  if (const auto* d = std::get_if<DensePlan>(&lp)) return d->f * d->k + d->k;
  return 0;
}

}  // namespace detail

// Learnable parameters: conv kernels and biases, dense weights and biases,
// batchnorm gamma/beta. Running statistics are state, not parameters.
inline std::int64_t count_params(const NetworkPlan& plan) {
  std::int64_t total = 0;
  for (const StagePlan& sp : plan.stages) {
    if (const auto* lp = std::get_if<LayerPlan>(&sp)) {
      total += detail::layer_param_count(*lp);
    } else {
      const auto& b = std::get<BlockPlan>(sp);
      for (const LayerPlan& l : b.pre) total += detail::layer_param_count(l);
      for (const LayerPlan& l : b.body) total += detail::layer_param_count(l);
      for (const ConvPlan& p : b.projection)
        total += detail::layer_param_count(LayerPlan{p});
    }
  }
  return total;
}

// Convolutions only (projections included, dense classifier not).
inline int conv_layer_count(const NetworkPlan& plan) {
  int total = 0;
  auto count = [&](const LayerPlan& l) {
    if (std::holds_alternative<ConvPlan>(l)) ++total;
  };
  for (const StagePlan& sp : plan.stages) {
    if (const auto* lp = std::get_if<LayerPlan>(&sp)) {
      count(*lp);
    } else {
      const auto& b = std::get<BlockPlan>(sp);
      for (const LayerPlan& l : b.pre) count(l);
      for (const LayerPlan& l : b.body) count(l);
      total += static_cast<int>(b.projection.size());
    }
  }
  return total;
}

namespace detail {

template <typename S>
ConvLayer<S> build_conv(const ConvPlan& p, InitKind init, Rng& rng) {
  ConvLayer<S> l;
  l.name = p.name;
  l.stride = p.stride;
  l.has_bias = p.bias;
  l.kernel = Tensor<S>({p.d, p.d, p.c_in, p.c_out});
  if (init == InitKind::XavierUniform)
    xavier_uniform(l.kernel, rng);
  else
    he_normal(l.kernel, rng);
  l.g_kernel = Tensor<S>(l.kernel.shape());
  if (p.bias) {
    l.bias = Tensor<S>({p.c_out});  // zeros
    l.g_bias = Tensor<S>({p.c_out});
  }
  return l;
}

template <typename S>
Layer<S> build_layer(const LayerPlan& lp, InitKind init, Rng& rng) {
  if (const auto* c = std::get_if<ConvPlan>(&lp)) return build_conv<S>(*c, init, rng);
  if (const auto* nm = std::get_if<NormPlan>(&lp)) {
    NormLayer<S> l;
    l.name = nm->name;
    l.gamma = Tensor<S>({nm->c});
    l.gamma.fill(S(1));
    l.beta = Tensor<S>({nm->c});
    l.run_mean = Tensor<S>({nm->c});
    l.run_var = Tensor<S>({nm->c});
    l.run_var.fill(S(1));
    l.g_gamma = Tensor<S>({nm->c});
    l.g_beta = Tensor<S>({nm->c});
    return l;
  }
  if (std::holds_alternative<ReluPlan>(lp)) return ReluLayer<S>{};
  if (const auto* dr = std::get_if<DropoutPlan>(&lp)) return DropoutLayer<S>{dr->rate, {}};
  if (std::holds_alternative<GlobalPoolPlan>(lp)) return GlobalPoolLayer<S>{};
  if (const auto* ap = std::get_if<AvgPoolPlan>(&lp)) return AvgPoolLayer<S>{ap->window, {}};
  const auto& d = std::get<DensePlan>(lp);
  DenseLayer<S> l;
  l.name = d.name;
  l.weight = Tensor<S>({d.f, d.k});
  if (init == InitKind::XavierUniform)
    xavier_uniform(l.weight, rng);
  else
    he_normal(l.weight, rng);
  l.bias = Tensor<S>({d.k});
  l.g_weight = Tensor<S>(l.weight.shape());
  l.g_bias = Tensor<S>({d.k});
  return l;
}

}  // namespace detail

// Materializes the plan; weights are drawn from `rng` in plan order, so one
// seed fixes the whole initialization.
template <typename S>
Network<S> build_network(const NetworkPlan& plan, Rng& rng) {
  Network<S> net;
  for (const StagePlan& sp : plan.stages) {
    if (const auto* lp = std::get_if<LayerPlan>(&sp)) {
      net.stages.emplace_back(detail::build_layer<S>(*lp, plan.init, rng));
    } else {
      const auto& bp = std::get<BlockPlan>(sp);
      ResidualBlock<S> block;
      for (const LayerPlan& l : bp.pre)
        block.pre.emplace_back(detail::build_layer<S>(l, plan.init, rng));
      for (const LayerPlan& l : bp.body)
        block.body.emplace_back(detail::build_layer<S>(l, plan.init, rng));
      if (!bp.projection.empty())
        block.projection = detail::build_conv<S>(bp.projection.front(), plan.init, rng);
      net.stages.emplace_back(std::move(block));
    }
  }
  return net;
}

}  // namespace augb
