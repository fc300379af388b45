#pragma once

#include <cmath>
#include <stdexcept>

#include "augablate/core/rng.hpp"
#include "augablate/core/tensor.hpp"

namespace augb {

// Fan sizes from the tensor shape: rank-4 conv kernels (d, d, c_in, c_out)
// give fan_in = d*d*c_in and fan_out = d*d*c_out; rank-2 weights (f, k) give
// fan_in = f, fan_out = k.
inline std::pair<Index, Index> fan_in_out(const Shape& shape) {
  if (shape.size() == 4)
    return {shape[0] * shape[1] * shape[2], shape[0] * shape[1] * shape[3]};
  if (shape.size() == 2) return {shape[0], shape[1]};
  throw std::invalid_argument("fan_in_out: rank " + std::to_string(shape.size()) +
                              " weight is not supported");
}

// U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); entries drawn in storage order.
template <typename S>
void xavier_uniform(Tensor<S>& w, Rng& rng) {
  const auto [fin, fout] = fan_in_out(w.shape());
  const double a = std::sqrt(6.0 / static_cast<double>(fin + fout));
  for (Index i = 0; i < w.size(); ++i) w[i] = static_cast<S>(rng.uniform(-a, a));
}

// N(0, sqrt(2 / fan_in)); entries drawn in storage order.
template <typename S>
void he_normal(Tensor<S>& w, Rng& rng) {
  const auto [fin, fout] = fan_in_out(w.shape());
  (void)fout;
  const double sd = std::sqrt(2.0 / static_cast<double>(fin));
  for (Index i = 0; i < w.size(); ++i) w[i] = static_cast<S>(rng.normal() * sd);
}

}  // namespace augb
