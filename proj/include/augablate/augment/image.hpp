#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace augb {

/// One image: unit-interval float32 intensities, row-major, channel-last.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w, int c) : height(h), width(w), channels(c) {
    if (h < 1 || w < 1 || c < 1) throw std::invalid_argument("image: extents must be >= 1");
    data.assign(static_cast<std::size_t>(h) * w * c, 0.0f);
  }

  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t size() const { return data.size(); }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

}  // namespace augb
