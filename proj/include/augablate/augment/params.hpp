#pragma once

#include <numbers>

namespace augb {

/// One sampled set of augmentation parameters. Translations are fractions of
/// image width/height; angles are radians. identity() leaves any image
/// unchanged through the whole pipeline.
struct AugmentParams {
  double flip = 1.0;        // f_h in {-1, +1}
  double t_x = 0.0;         // horizontal translation, fraction of width
  double t_y = 0.0;         // vertical translation, fraction of height
  double z_x = 1.0;         // horizontal scale
  double z_y = 1.0;         // vertical scale
  double theta = 0.0;       // rotation angle
  double phi = 0.0;         // shear angle
  double contrast = 1.0;    // gamma
  double brightness = 0.0;  // delta

  static AugmentParams identity() { return {}; }

  bool operator==(const AugmentParams&) const = default;
};

/// Sampling ranges of the heavier scheme.
namespace heavier_range {
inline constexpr double kTranslate = 0.1;
inline constexpr double kScaleLo = 0.85;
inline constexpr double kScaleHi = 1.15;
inline constexpr double kRotateDeg = 22.5;
inline constexpr double kShear = 0.15;
inline constexpr double kContrastLo = 0.5;
inline constexpr double kContrastHi = 1.5;
inline constexpr double kBrightness = 0.25;
}  // namespace heavier_range

/// Full affine + photometric draw. Fields are drawn in declaration order
/// (flip, t_x, t_y, z_x, z_y, theta, phi, contrast, brightness), each from
/// its own distribution: f_h = 1 - 2 B(0.5), t ~ U(-0.1, 0.1),
/// z ~ U(0.85, 1.15), theta ~ U(+-22.5 deg), phi ~ U(-0.15, 0.15),
/// gamma ~ U(0.5, 1.5), delta ~ U(-0.25, 0.25).
template <typename RngT>
AugmentParams sample_heavier(RngT& rng) {
  namespace hr = heavier_range;
  constexpr double kRotate = hr::kRotateDeg * std::numbers::pi / 180.0;
  AugmentParams p;
  p.flip = rng.bernoulli(0.5) ? -1.0 : 1.0;
  p.t_x = rng.uniform(-hr::kTranslate, hr::kTranslate);
  p.t_y = rng.uniform(-hr::kTranslate, hr::kTranslate);
  p.z_x = rng.uniform(hr::kScaleLo, hr::kScaleHi);
  p.z_y = rng.uniform(hr::kScaleLo, hr::kScaleHi);
  p.theta = rng.uniform(-kRotate, kRotate);
  p.phi = rng.uniform(-hr::kShear, hr::kShear);
  p.contrast = rng.uniform(hr::kContrastLo, hr::kContrastHi);
  p.brightness = rng.uniform(-hr::kBrightness, hr::kBrightness);
  return p;
}

/// Horizontal flips plus sub-pixel translations of up to 10% of the image
/// size; everything else stays at identity.
template <typename RngT>
AugmentParams sample_light(RngT& rng) {
  namespace hr = heavier_range;
  AugmentParams p;
  p.flip = rng.bernoulli(0.5) ? -1.0 : 1.0;
  p.t_x = rng.uniform(-hr::kTranslate, hr::kTranslate);
  p.t_y = rng.uniform(-hr::kTranslate, hr::kTranslate);
  return p;
}

}  // namespace augb
