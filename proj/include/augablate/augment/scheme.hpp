#pragma once

#include <optional>
#include <string>

#include "augablate/augment/ops.hpp"
#include "augablate/augment/params.hpp"

namespace augb {

enum class SchemeKind { None, Light, Heavier };

struct CropSpec {
  CropMode mode = CropMode::Random;
  int height = 0;
  int width = 0;
};

/// An augmentation scheme: one of the two sampled pipelines or no
/// augmentation, plus an optional crop stage.
struct Scheme {
  SchemeKind kind = SchemeKind::None;
  std::optional<CropSpec> crop;
};

/// One augmentation draw. None applies at most a center crop. Light warps by
/// a sampled flip+translation. Heavier warps by a full affine draw, then
/// adjusts contrast and brightness, in that order. The optional crop runs
/// last (random for sampled schemes).
Image apply_scheme(const Image& img, const Scheme& s, Rng& rng);

std::string scheme_name(SchemeKind k);
SchemeKind scheme_from_name(const std::string& name);

}  // namespace augb
