#pragma once

#include <cstdint>
#include <vector>

#include "augablate/arch/network.hpp"
#include "augablate/augment/scheme.hpp"
#include "augablate/data/dataset.hpp"
#include "augablate/harness/pipeline.hpp"
#include "augablate/nn/loss.hpp"

namespace augb {

struct EvalResult {
  double accuracy = 0;
  double mean_loss = 0;
};

// Plain eval-mode accuracy and mean cross-entropy over the whole set.
EvalResult evaluate(Network<float>& net, const Dataset& ds, int batch);

// Test-time augmentation: the per-image class posterior is the softmax
// averaged over `views` randomized views; prediction is its argmax (lowest
// index on ties). Views are keyed on (seed, image index, view index), so
// batching order cannot change the result. `view` maps
// (image, rng) -> augmented image; the default draws the light scheme.
template <typename ViewFn>
double evaluate_tta_with(Network<float>& net, const Dataset& ds, int batch, int views,
                         std::uint64_t seed, ViewFn&& view) {
  if (views < 1) throw std::invalid_argument("tta needs at least one view");
  const Index k = net.forward(stack_images({ds.images.at(0)}), Mode::Eval).dim(1);
  std::vector<double> posterior(ds.size() * static_cast<std::size_t>(k), 0.0);

  for (int v = 0; v < views; ++v) {
    for (std::size_t lo = 0; lo < ds.size(); lo += static_cast<std::size_t>(batch)) {
      const std::size_t hi = std::min(ds.size(), lo + static_cast<std::size_t>(batch));
      std::vector<Image> batch_imgs;
      batch_imgs.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) {
        Rng rng = Rng::keyed({seed, rng_stream::kTta, static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(v)});
        batch_imgs.push_back(view(ds.images[i], rng));
      }
      Tensor<float> probs = softmax(net.forward(stack_images(batch_imgs), Mode::Eval));
      for (std::size_t i = lo; i < hi; ++i)
        for (Index c = 0; c < k; ++c)
          posterior[i * k + c] += probs[static_cast<Index>(i - lo) * k + c];
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double* row = posterior.data() + i * static_cast<std::size_t>(k);
    Index best = 0;
    for (Index c = 1; c < k; ++c)
      if (row[c] > row[best]) best = c;
    if (static_cast<int>(best) == ds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double evaluate_tta(Network<float>& net, const Dataset& ds, int batch, int views,
                    std::uint64_t seed);

}  // namespace augb
