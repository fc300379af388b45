#include <stdexcept>

#include "augablate/augment/scheme.hpp"
#include "augablate/augment/affine.hpp"
#include "augablate/augment/ops.hpp"
#include "augablate/augment/params.hpp"

namespace augb {

Image apply_scheme(const Image& img, const Scheme& scheme, Rng& rng) {
  if (scheme.kind == SchemeKind::None) {
    // No parameters are drawn; an optional crop degrades to a deterministic
    // center crop so that eval-style pipelines stay reproducible.
    if (scheme.crop)
      return crop(img, CropMode::Center, scheme.crop->height, scheme.crop->width, rng);
    return img;
  }

  const AugmentParams p = scheme.kind == SchemeKind::Light ? sample_light(rng)
                                                           : sample_heavier(rng);
  Image out = warp(img, build_affine(p, img.width, img.height));
  if (scheme.kind == SchemeKind::Heavier) {
    out = adjust_contrast(out, p.contrast);
    out = adjust_brightness(out, p.brightness);
  }
  if (scheme.crop)
    out = crop(out, scheme.crop->mode, scheme.crop->height, scheme.crop->width, rng);
  return out;
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::None: return "none";
    case SchemeKind::Light: return "light";
    case SchemeKind::Heavier: return "heavier";
  }
  throw std::logic_error("scheme_name: bad kind");
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "none") return SchemeKind::None;
  if (name == "light") return SchemeKind::Light;
  if (name == "heavier") return SchemeKind::Heavier;
  throw std::invalid_argument("unknown augmentation scheme '" + name +
                              "' (expected none, light, or heavier)");
}

}  // namespace augb
