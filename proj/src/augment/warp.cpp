#include <algorithm>
#include <cmath>

#include "augablate/augment/ops.hpp"

namespace augb {

namespace {

// Symmetric border reflection: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
int reflect_index(long i, int n) {
  if (n == 1) return 0;
  const long period = 2L * n;
  long j = i % period;
  if (j < 0) j += period;
  return static_cast<int>(j < n ? j : period - 1 - j);
}

}  // namespace

Image warp(const Image& img, const AffineTransform& t) {
  const AffineTransform inv = t.inverse();
  const double m00 = inv.m(0, 0), m01 = inv.m(0, 1), m02 = inv.m(0, 2);
  const double m10 = inv.m(1, 0), m11 = inv.m(1, 1), m12 = inv.m(1, 2);

  Image out(img.height, img.width, img.channels);
  const int c_n = img.channels;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double sx = m00 * x + m01 * y + m02;
      const double sy = m10 * x + m11 * y + m12;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const float ax = static_cast<float>(sx - fx);
      const float ay = static_cast<float>(sy - fy);
      const int x0 = reflect_index(static_cast<long>(fx), img.width);
      const int x1 = reflect_index(static_cast<long>(fx) + 1, img.width);
      const int y0 = reflect_index(static_cast<long>(fy), img.height);
      const int y1 = reflect_index(static_cast<long>(fy) + 1, img.height);
      const float w00 = (1.0f - ay) * (1.0f - ax);
      const float w01 = (1.0f - ay) * ax;
      const float w10 = ay * (1.0f - ax);
      const float w11 = ay * ax;
      for (int c = 0; c < c_n; ++c) {
        const float v = w00 * img.at(y0, x0, c) + w01 * img.at(y0, x1, c) +
                        w10 * img.at(y1, x0, c) + w11 * img.at(y1, x1, c);
        out.at(y, x, c) = std::clamp(v, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

}  // namespace augb
