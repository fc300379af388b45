#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augablate/augment/image.hpp"
#include "augablate/core/tensor.hpp"

namespace augb {

struct Dataset {
  std::vector<Image> images;  // float pixels in [0,1]
  std::vector<int> labels;
  int classes = 0;

  std::size_t size() const { return images.size(); }
  void push(Image img, int label);
  void validate() const;  // sizes agree, labels in range
};

// Class-balanced subsample: `per_class` examples of every class, chosen by a
// seeded per-class shuffle, returned in ascending original order. Throws if
// any class has fewer than `per_class` examples.
Dataset balanced_subset(const Dataset& ds, int per_class, std::uint64_t seed);

// First `limit` examples (0 = everything).
Dataset head_subset(const Dataset& ds, std::size_t limit);

// Synthetic stand-in data: oriented sinusoidal stripes whose angle and
// frequency depend on the label, plus seeded pixel noise. Labels cycle
// round-robin, so any prefix is near-balanced. Learnable by a small conv
// net in a few epochs, which is all the harness needs from it.
Dataset synthetic_blobs(std::size_t count, int classes, int height, int width,
                        int channels, std::uint64_t seed);

// Stacks same-shaped images into an NHWC float tensor.
Tensor<float> stack_images(const std::vector<Image>& images);

}  // namespace augb
