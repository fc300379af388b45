#pragma once

#include <string>

#include "augablate/augment/image.hpp"

namespace augb {

// Loads an 8-bit PNG as float pixels in [0,1] (value / 255). Grayscale stays
// single-channel; palette and RGBA inputs are expanded/flattened to RGB.
Image load_png(const std::string& path);

// Writes a 1- or 3-channel image as an 8-bit PNG. Pixels are clipped to [0,1]
// and quantized round-half-up: floor(v * 255 + 0.5).
void save_png(const Image& img, const std::string& path);

}  // namespace augb
