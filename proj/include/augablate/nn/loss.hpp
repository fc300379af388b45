#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "augablate/core/tensor.hpp"

namespace augb {

// Row-wise softmax with max subtraction; x is (N, K) logits.
template <typename S>
Tensor<S> softmax(const Tensor<S>& x) {
  const Index n = x.dim(0), k = x.dim(1);
  Tensor<S> out(x.shape());
  for (Index i = 0; i < n; ++i) {
    const S* row = x.data() + i * k;
    S* orow = out.data() + i * k;
    S mx = row[0];
    for (Index j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (Index j = 0; j < k; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (Index j = 0; j < k; ++j) orow[j] = static_cast<S>(orow[j] / sum);
  }
  return out;
}

// Mean cross-entropy over the batch. grad_logits, if given, receives
// (softmax - onehot) / N, the gradient of the mean loss w.r.t. the logits.
template <typename S>
double softmax_cross_entropy(const Tensor<S>& logits, const std::vector<int>& labels,
                             Tensor<S>* grad_logits) {
  const Index n = logits.dim(0), k = logits.dim(1);
  if (static_cast<Index>(labels.size()) != n)
    throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(n) + " rows");
  Tensor<S> probs = softmax(logits);
  double loss = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= k)
      throw std::invalid_argument("cross_entropy: label " + std::to_string(y) +
                                  " outside [0, " + std::to_string(k) + ")");
    loss -= std::log(std::max(static_cast<double>(probs[i * k + y]), 1e-30));
  }
  loss /= static_cast<double>(n);
  if (grad_logits) {
    *grad_logits = std::move(probs);
    for (Index i = 0; i < n; ++i) {
      (*grad_logits)[i * k + labels[static_cast<std::size_t>(i)]] -= S(1);
      for (Index j = 0; j < k; ++j) (*grad_logits)[i * k + j] /= static_cast<S>(n);
    }
  }
  return loss;
}

}  // namespace augb
