#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "augablate/arch/network.hpp"

namespace augb {

// Piecewise-constant decay: at `epoch` and after, the learning rate has been
// multiplied by `multiplier` (multipliers from distinct entries stack).
struct ScheduleEntry {
  int epoch;
  double multiplier;
};

inline double lr_at_epoch(double base_lr, const std::vector<ScheduleEntry>& schedule,
                          int epoch) {
  double lr = base_lr;
  for (const ScheduleEntry& e : schedule)
    if (e.epoch <= epoch) lr *= e.multiplier;
  return lr;
}

// Momentum buffers, one per parameter tensor, plus an instrumentation count
// of how many tensors have had weight decay folded into their gradient.
template <typename S>
struct OptState {
  std::vector<Tensor<S>> velocity;
  std::uint64_t decay_applications = 0;

  template <typename P>
  explicit OptState(const std::vector<P>& params) {
    velocity.reserve(params.size());
    for (const auto& p : params) velocity.emplace_back(p.value->shape());
  }
};

// One SGD step over all parameters. Decay couples into the gradient
// (g~ = g + lambda * w) for ParamClass::Weight only. Classical momentum:
// v <- mu v - lr g~; w += v. Nesterov: v <- mu v - lr g~; w += mu v - lr g~.
template <typename S>
void sgd_step(std::vector<ParamRef<S>>& params, OptState<S>& state, double lr,
              double momentum, bool nesterov, double weight_decay) {
  if (params.size() != state.velocity.size())
    throw std::invalid_argument("sgd_step: " + std::to_string(params.size()) +
                                " params vs " + std::to_string(state.velocity.size()) +
                                " velocity buffers");
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamRef<S>& p = params[i];
    Tensor<S>& v = state.velocity[i];
    const bool decayed = weight_decay != 0.0 && p.cls == ParamClass::Weight;
    if (decayed) ++state.decay_applications;
    const S mu = static_cast<S>(momentum);
    const S eta = static_cast<S>(lr);
    const S lambda = static_cast<S>(weight_decay);
    for (Index j = 0; j < v.size(); ++j) {
      const S g = (*p.grad)[j] + (decayed ? lambda * (*p.value)[j] : S(0));
      v[j] = mu * v[j] - eta * g;
      (*p.value)[j] += nesterov ? mu * v[j] - eta * g : v[j];
    }
  }
}

}  // namespace augb
