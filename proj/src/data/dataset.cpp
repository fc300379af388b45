#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "augablate/core/rng.hpp"
#include "augablate/data/dataset.hpp"

namespace augb {

void Dataset::push(Image img, int label) {
  images.push_back(std::move(img));
  labels.push_back(label);
}

void Dataset::validate() const {
  if (images.size() != labels.size())
    throw std::logic_error("dataset: " + std::to_string(images.size()) + " images vs " +
                           std::to_string(labels.size()) + " labels");
  if (classes < 2) throw std::logic_error("dataset: class count not set");
  for (int l : labels)
    if (l < 0 || l >= classes)
      throw std::logic_error("dataset: label " + std::to_string(l) + " outside [0, " +
                             std::to_string(classes) + ")");
}

Dataset balanced_subset(const Dataset& ds, int per_class, std::uint64_t seed) {
  ds.validate();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.classes));
  for (std::size_t i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(per_class) * ds.classes);
  for (int c = 0; c < ds.classes; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    if (pool.size() < static_cast<std::size_t>(per_class))
      throw std::runtime_error("balanced_subset: class " + std::to_string(c) + " has " +
                               std::to_string(pool.size()) + " examples, need " +
                               std::to_string(per_class));
    Rng rng = Rng::keyed({seed, rng_stream::kSubset, static_cast<std::uint64_t>(c)});
    // Fisher-Yates, then keep the head of the permutation.
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i + 1));
      std::swap(pool[i], pool[j]);
    }
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + per_class);
  }
  std::sort(chosen.begin(), chosen.end());

  Dataset out;
  out.classes = ds.classes;
  for (std::size_t i : chosen) out.push(ds.images[i], ds.labels[i]);
  return out;
}

Dataset head_subset(const Dataset& ds, std::size_t limit) {
  if (limit == 0 || limit >= ds.size()) return ds;
  Dataset out;
  out.classes = ds.classes;
  for (std::size_t i = 0; i < limit; ++i) out.push(ds.images[i], ds.labels[i]);
  return out;
}

Dataset synthetic_blobs(std::size_t count, int classes, int height, int width,
                        int channels, std::uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("synthetic_blobs: need at least 2 classes");
  Dataset out;
  out.classes = classes;
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    Rng rng = Rng::keyed({seed, rng_stream::kBlobs, static_cast<std::uint64_t>(i)});
    // Angles stay inside [0, pi/2) so a horizontal flip (angle -> pi - angle)
    // never lands on another class's orientation.
    const double angle = 0.5 * std::numbers::pi * label / classes;
    const double freq = 2.0 * std::numbers::pi * (2 + label % 3) / width;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double ca = std::cos(angle), sa = std::sin(angle);
    Image img(height, width, channels);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double t = freq * (x * ca + y * sa) + phase;
        for (int c = 0; c < channels; ++c) {
          const double v = 0.5 + 0.35 * std::sin(t + c * 0.7) + 0.08 * (rng.uniform() - 0.5);
          img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
      }
    out.push(std::move(img), label);
  }
  return out;
}

Tensor<float> stack_images(const std::vector<Image>& images) {
  if (images.empty()) throw std::invalid_argument("stack_images: empty batch");
  const Image& first = images.front();
  Tensor<float> out({static_cast<Index>(images.size()), first.height, first.width,
                     first.channels});
  const std::size_t stride = first.data.size();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(first))
      throw std::invalid_argument("stack_images: image " + std::to_string(i) +
                                  " shape differs from image 0");
    std::copy(images[i].data.begin(), images[i].data.end(), out.data() + i * stride);
  }
  return out;
}

}  // namespace augb
