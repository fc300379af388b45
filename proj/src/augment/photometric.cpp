#include <algorithm>
#include <cstddef>

#include "augablate/augment/ops.hpp"

namespace augb {

Image adjust_contrast(const Image& img, double gamma) {
  if (gamma == 1.0) return img;  // bitwise no-op
  double sum = 0.0;
  for (float v : img.data) sum += v;
  const double mean = sum / static_cast<double>(img.data.size());
  Image out(img.height, img.width, img.channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = gamma * (img.data[i] - mean) + mean;
    out.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

Image adjust_brightness(const Image& img, double delta) {
  if (delta == 0.0) return img;  // bitwise no-op
  Image out(img.height, img.width, img.channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = img.data[i] + delta;
    out.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

}  // namespace augb
