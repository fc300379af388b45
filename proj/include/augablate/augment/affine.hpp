#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "augablate/augment/params.hpp"

namespace augb {

/// 2-d affine map in homogeneous pixel coordinates. Bottom row is [0, 0, 1].
struct AffineTransform {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  AffineTransform inverse() const {
    double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (std::abs(det) < 1e-12) throw std::invalid_argument("affine: singular transform");
    AffineTransform t;
    t.m = m.inverse();
    t.m.row(2) << 0.0, 0.0, 1.0;
    return t;
  }

  AffineTransform compose(const AffineTransform& o) const {
    AffineTransform t;
    t.m = m * o.m;
    return t;
  }
};

/// The raw parameter matrix, translations placed verbatim:
///   [ f z_x cos(theta)   -z_y sin(theta+phi)   t_x ]
///   [   z_x sin(theta)    z_y cos(theta+phi)   t_y ]
///   [   0                 0                    1   ]
inline AffineTransform affine_matrix(const AugmentParams& p) {
  AffineTransform t;
  t.m << p.flip * p.z_x * std::cos(p.theta), -p.z_y * std::sin(p.theta + p.phi), p.t_x,
      p.z_x * std::sin(p.theta), p.z_y * std::cos(p.theta + p.phi), p.t_y,
      0.0, 0.0, 1.0;
  return t;
}

/// The transform actually applied to a width x height image: the parameter
/// matrix with its linear part conjugated to act about the image center
/// ((w-1)/2, (h-1)/2) and translations scaled to pixels (t_x by width, t_y
/// by height). Identity parameters give the exact identity matrix.
inline AffineTransform build_affine(const AugmentParams& p, int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("affine: extents must be >= 1");
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  AffineTransform t = affine_matrix(p);
  const double tx = p.t_x * width;
  const double ty = p.t_y * height;
  t.m(0, 2) = cx + tx - t.m(0, 0) * cx - t.m(0, 1) * cy;
  t.m(1, 2) = cy + ty - t.m(1, 0) * cx - t.m(1, 1) * cy;
  return t;
}

}  // namespace augb
