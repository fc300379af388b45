#pragma once

#include <cstdint>

#include "augablate/augment/affine.hpp"
#include "augablate/augment/image.hpp"
#include "augablate/core/rng.hpp"

namespace augb {

/// Inverse-mapped warp: each output pixel samples the input at t^-1 (x', y')
/// with bilinear interpolation; out-of-range coordinates reflect at the
/// border (index -1 mirrors to 0, -2 to 1, n to n-1, ...). Output has the
/// input's shape and stays inside [0, 1]. Throws on a singular transform.
Image warp(const Image& img, const AffineTransform& t);

/// x' = gamma (x - mean) + mean with one scalar mean over all pixels and
/// channels, clipped to [0, 1]. gamma = 1 returns the input bitwise.
Image adjust_contrast(const Image& img, double gamma);

/// x' = x + delta, clipped to [0, 1]. delta = 0 returns the input bitwise.
Image adjust_brightness(const Image& img, double delta);

enum class CropMode { Random, Center };

/// Contiguous h x w window. Random mode draws the top-left corner uniformly
/// over valid positions; center mode uses floor((H-h)/2), floor((W-w)/2).
/// Throws if the target exceeds the source.
Image crop(const Image& img, CropMode mode, int h, int w, Rng& rng);

}  // namespace augb
