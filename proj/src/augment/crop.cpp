#include <stdexcept>

#include "augablate/augment/ops.hpp"

namespace augb {

Image crop(const Image& img, CropMode mode, int out_h, int out_w, Rng& rng) {
  if (out_h < 1 || out_w < 1 || out_h > img.height || out_w > img.width) {
    throw std::invalid_argument("crop: target " + std::to_string(out_h) + "x" +
                                std::to_string(out_w) + " does not fit in " +
                                std::to_string(img.height) + "x" +
                                std::to_string(img.width));
  }
  int y0, x0;
  if (mode == CropMode::Random) {
    y0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.height - out_h + 1)));
    x0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.width - out_w + 1)));
  } else {
    y0 = (img.height - out_h) / 2;
    x0 = (img.width - out_w) / 2;
  }
  Image out(out_h, out_w, img.channels);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
  return out;
}

}  // namespace augb
