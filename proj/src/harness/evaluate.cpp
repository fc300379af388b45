#include "augablate/harness/evaluate.hpp"

namespace augb {

EvalResult evaluate(Network<float>& net, const Dataset& ds, int batch) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  double loss_sum = 0;
  std::size_t correct = 0;
  for (std::size_t lo = 0; lo < ds.size(); lo += static_cast<std::size_t>(batch)) {
    const std::size_t hi = std::min(ds.size(), lo + static_cast<std::size_t>(batch));
    std::vector<Image> imgs(ds.images.begin() + static_cast<std::ptrdiff_t>(lo),
                            ds.images.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<int> labels(ds.labels.begin() + static_cast<std::ptrdiff_t>(lo),
                            ds.labels.begin() + static_cast<std::ptrdiff_t>(hi));
    Tensor<float> logits = net.forward(stack_images(imgs), Mode::Eval);
    loss_sum += softmax_cross_entropy<float>(logits, labels, nullptr) *
                static_cast<double>(hi - lo);
    const Index k = logits.dim(1);
    for (std::size_t i = 0; i < hi - lo; ++i) {
      const float* row = logits.data() + static_cast<Index>(i) * k;
      Index best = 0;
      for (Index c = 1; c < k; ++c)
        if (row[c] > row[best]) best = c;
      if (static_cast<int>(best) == labels[i]) ++correct;
    }
  }
  return {static_cast<double>(correct) / static_cast<double>(ds.size()),
          loss_sum / static_cast<double>(ds.size())};
}

double evaluate_tta(Network<float>& net, const Dataset& ds, int batch, int views,
                    std::uint64_t seed) {
  const Scheme light{SchemeKind::Light, std::nullopt};
  return evaluate_tta_with(net, ds, batch, views, seed,
                           [&](const Image& img, Rng& rng) {
                             return apply_scheme(img, light, rng);
                           });
}

}  // namespace augb
