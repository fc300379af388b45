#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "augablate/core/rng.hpp"
#include "augablate/core/tensor.hpp"

// Layer primitives on NHWC tensors. Every function is templated on the scalar
// so the float training path and the double finite-difference path run the
// exact same code.

namespace augb {

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.99;

// ---------------------------------------------------------------------------
// Convolution, SAME padding, kernel layout (D, D, C_in, C_out).

struct ConvGeometry {
  Index out_h, out_w;
  Index pad_top, pad_left;
};

// out = ceil(in / stride); total padding max((out-1)*stride + d - in, 0),
// split with the smaller half leading.
inline ConvGeometry conv_geometry(Index in_h, Index in_w, Index d, Index stride) {
  ConvGeometry g;
  g.out_h = (in_h + stride - 1) / stride;
  g.out_w = (in_w + stride - 1) / stride;
  const Index pad_h = std::max<Index>((g.out_h - 1) * stride + d - in_h, 0);
  const Index pad_w = std::max<Index>((g.out_w - 1) * stride + d - in_w, 0);
  g.pad_top = pad_h / 2;
  g.pad_left = pad_w / 2;
  return g;
}

namespace detail {

// Writes patch rows for images [n0, n1) into `cols`, one row per output
// pixel, laid out (kh, kw, c). Out-of-bounds taps are zeros.
template <typename S>
void im2col(const Tensor<S>& x, Index n0, Index n1, Index d, Index stride,
            const ConvGeometry& g, MatrixR<S>& cols) {
  const Index h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const Index patch = d * d * c;
  cols.setZero((n1 - n0) * g.out_h * g.out_w, patch);
  for (Index n = n0; n < n1; ++n) {
    const S* img = x.data() + n * h * w * c;
    for (Index oh = 0; oh < g.out_h; ++oh) {
      for (Index ow = 0; ow < g.out_w; ++ow) {
        S* row = cols.data() + (((n - n0) * g.out_h + oh) * g.out_w + ow) * patch;
        for (Index kh = 0; kh < d; ++kh) {
          const Index iy = oh * stride - g.pad_top + kh;
          if (iy < 0 || iy >= h) continue;
          for (Index kw = 0; kw < d; ++kw) {
            const Index ix = ow * stride - g.pad_left + kw;
            if (ix < 0 || ix >= w) continue;
            std::memcpy(row + (kh * d + kw) * c, img + (iy * w + ix) * c,
                        sizeof(S) * c);
          }
        }
      }
    }
  }
}

// Transpose of im2col: accumulates patch-row gradients back into grad_x.
template <typename S>
void col2im_add(const MatrixR<S>& cols, Index n0, Index n1, Index d, Index stride,
                const ConvGeometry& g, Tensor<S>& grad_x) {
  const Index h = grad_x.dim(1), w = grad_x.dim(2), c = grad_x.dim(3);
  const Index patch = d * d * c;
  for (Index n = n0; n < n1; ++n) {
    S* img = grad_x.data() + n * h * w * c;
    for (Index oh = 0; oh < g.out_h; ++oh) {
      for (Index ow = 0; ow < g.out_w; ++ow) {
        const S* row = cols.data() + (((n - n0) * g.out_h + oh) * g.out_w + ow) * patch;
        for (Index kh = 0; kh < d; ++kh) {
          const Index iy = oh * stride - g.pad_top + kh;
          if (iy < 0 || iy >= h) continue;
          for (Index kw = 0; kw < d; ++kw) {
            const Index ix = ow * stride - g.pad_left + kw;
            if (ix < 0 || ix >= w) continue;
            S* dst = img + (iy * w + ix) * c;
            const S* src = row + (kh * d + kw) * c;
            for (Index ch = 0; ch < c; ++ch) dst[ch] += src[ch];
          }
        }
      }
    }
  }
}

inline constexpr Index kConvChunk = 16;  // images per im2col buffer

}  // namespace detail

template <typename S>
Tensor<S> conv2d_forward(const Tensor<S>& x, const Tensor<S>& kernel,
                         const Tensor<S>* bias, Index stride) {
  if (x.rank() != 4 || kernel.rank() != 4)
    throw std::invalid_argument("conv2d: need rank-4 input and kernel");
  if (kernel.dim(0) != kernel.dim(1))
    throw std::invalid_argument("conv2d: kernel must be square");
  if (x.dim(3) != kernel.dim(2))
    throw std::invalid_argument("conv2d: input has " + std::to_string(x.dim(3)) +
                                " channels, kernel expects " + std::to_string(kernel.dim(2)));
  const Index n = x.dim(0), d = kernel.dim(0), c = kernel.dim(2), k = kernel.dim(3);
  const ConvGeometry g = conv_geometry(x.dim(1), x.dim(2), d, stride);

  Tensor<S> out({n, g.out_h, g.out_w, k});
  const auto kmat = Eigen::Map<const MatrixR<S>>(kernel.data(), d * d * c, k);
  MatrixR<S> cols;
  for (Index n0 = 0; n0 < n; n0 += detail::kConvChunk) {
    const Index n1 = std::min(n, n0 + detail::kConvChunk);
    detail::im2col(x, n0, n1, d, stride, g, cols);
    auto rows = Eigen::Map<MatrixR<S>>(out.data() + n0 * g.out_h * g.out_w * k,
                                       (n1 - n0) * g.out_h * g.out_w, k);
    rows.noalias() = cols * kmat;
    if (bias)
      rows.rowwise() += Eigen::Map<const Eigen::RowVector<S, Eigen::Dynamic>>(bias->data(), k);
  }
  return out;
}

// Recomputes im2col rather than caching it; at these sizes the rebuild is
// cheaper than holding every layer's patch matrix across the backward pass.
template <typename S>
void conv2d_backward(const Tensor<S>& x, const Tensor<S>& kernel, Index stride,
                     const Tensor<S>& grad_out, Tensor<S>& grad_x,
                     Tensor<S>& grad_kernel, Tensor<S>* grad_bias) {
  const Index n = x.dim(0), d = kernel.dim(0), c = kernel.dim(2), k = kernel.dim(3);
  const ConvGeometry g = conv_geometry(x.dim(1), x.dim(2), d, stride);
  if (grad_out.dim(1) != g.out_h || grad_out.dim(2) != g.out_w || grad_out.dim(3) != k)
    throw std::invalid_argument("conv2d_backward: upstream gradient shape mismatch");

  grad_x = Tensor<S>(x.shape());
  grad_kernel = Tensor<S>(kernel.shape());
  auto gkmat = Eigen::Map<MatrixR<S>>(grad_kernel.data(), d * d * c, k);
  const auto kmat = Eigen::Map<const MatrixR<S>>(kernel.data(), d * d * c, k);

  MatrixR<S> cols, gcols;
  for (Index n0 = 0; n0 < n; n0 += detail::kConvChunk) {
    const Index n1 = std::min(n, n0 + detail::kConvChunk);
    detail::im2col(x, n0, n1, d, stride, g, cols);
    const auto grows = Eigen::Map<const MatrixR<S>>(
        grad_out.data() + n0 * g.out_h * g.out_w * k, (n1 - n0) * g.out_h * g.out_w, k);
    gkmat.noalias() += cols.transpose() * grows;
    gcols.noalias() = grows * kmat.transpose();
    detail::col2im_add(gcols, n0, n1, d, stride, g, grad_x);
  }
  if (grad_bias) {
    *grad_bias = Tensor<S>({k});
    auto gb = Eigen::Map<Eigen::RowVector<S, Eigen::Dynamic>>(grad_bias->data(), k);
    const auto grows = Eigen::Map<const MatrixR<S>>(grad_out.data(),
                                                    n * g.out_h * g.out_w, k);
    gb = grows.colwise().sum();
  }
}

// ---------------------------------------------------------------------------
// Batch normalization over N*H*W per channel, biased variance.

template <typename S>
struct BatchNormCache {
  Tensor<S> x_hat;
  Tensor<S> inv_std;  // rank-1, per channel
};

// Training mode computes batch statistics with double accumulators (two-pass)
// and folds them into the running estimates: r <- 0.99 r + 0.01 batch.
// Eval mode normalizes with the running estimates and leaves them untouched.
template <typename S>
Tensor<S> batchnorm_forward(const Tensor<S>& x, const Tensor<S>& gamma,
                            const Tensor<S>& beta, Tensor<S>& running_mean,
                            Tensor<S>& running_var, bool training,
                            BatchNormCache<S>* cache) {
  if (x.rank() != 4) throw std::invalid_argument("batchnorm: need rank-4 input");
  const Index c = x.dim(3);
  const Index rows = x.size() / c;
  Tensor<S> out(x.shape());

  std::vector<double> mean(c), var(c);
  if (training) {
    if (rows < 2)
      throw std::runtime_error("batchnorm: batch reduces to " + std::to_string(rows) +
                               " sample(s) per channel; need at least 2 in training mode");
    std::vector<double> sum(c, 0.0);
    const S* p = x.data();
    for (Index r = 0; r < rows; ++r)
      for (Index ch = 0; ch < c; ++ch) sum[ch] += p[r * c + ch];
    for (Index ch = 0; ch < c; ++ch) mean[ch] = sum[ch] / rows;
    std::vector<double> sq(c, 0.0);
    for (Index r = 0; r < rows; ++r)
      for (Index ch = 0; ch < c; ++ch) {
        const double dlt = p[r * c + ch] - mean[ch];
        sq[ch] += dlt * dlt;
      }
    for (Index ch = 0; ch < c; ++ch) var[ch] = sq[ch] / rows;
    for (Index ch = 0; ch < c; ++ch) {
      running_mean[ch] = static_cast<S>(kBnMomentum * running_mean[ch] +
                                        (1.0 - kBnMomentum) * mean[ch]);
      running_var[ch] = static_cast<S>(kBnMomentum * running_var[ch] +
                                       (1.0 - kBnMomentum) * var[ch]);
    }
  } else {
    for (Index ch = 0; ch < c; ++ch) {
      mean[ch] = running_mean[ch];
      var[ch] = running_var[ch];
    }
  }

  std::vector<S> inv_std(c);
  for (Index ch = 0; ch < c; ++ch)
    inv_std[ch] = static_cast<S>(1.0 / std::sqrt(var[ch] + kBnEps));

  if (cache) {
    cache->x_hat = Tensor<S>(x.shape());
    cache->inv_std = Tensor<S>({c}, inv_std);
  }
  const S* p = x.data();
  S* q = out.data();
  S* xh = cache ? cache->x_hat.data() : nullptr;
  for (Index r = 0; r < rows; ++r)
    for (Index ch = 0; ch < c; ++ch) {
      const S hat = static_cast<S>((p[r * c + ch] - mean[ch]) * inv_std[ch]);
      if (xh) xh[r * c + ch] = hat;
      q[r * c + ch] = gamma[ch] * hat + beta[ch];
    }
  return out;
}

// gx = gamma * inv_std * (g - mean(g) - x_hat * mean(g * x_hat)), channelwise.
template <typename S>
Tensor<S> batchnorm_backward(const Tensor<S>& grad_out, const BatchNormCache<S>& cache,
                             const Tensor<S>& gamma, Tensor<S>& grad_gamma,
                             Tensor<S>& grad_beta) {
  const Index c = grad_out.dim(3);
  const Index rows = grad_out.size() / c;
  grad_gamma = Tensor<S>({c});
  grad_beta = Tensor<S>({c});

  std::vector<double> sum_g(c, 0.0), sum_gx(c, 0.0);
  const S* g = grad_out.data();
  const S* xh = cache.x_hat.data();
  for (Index r = 0; r < rows; ++r)
    for (Index ch = 0; ch < c; ++ch) {
      sum_g[ch] += g[r * c + ch];
      sum_gx[ch] += static_cast<double>(g[r * c + ch]) * xh[r * c + ch];
    }
  for (Index ch = 0; ch < c; ++ch) {
    grad_gamma[ch] = static_cast<S>(sum_gx[ch]);
    grad_beta[ch] = static_cast<S>(sum_g[ch]);
  }

  Tensor<S> grad_x(grad_out.shape());
  S* gx = grad_x.data();
  for (Index r = 0; r < rows; ++r)
    for (Index ch = 0; ch < c; ++ch) {
      const double centered = g[r * c + ch] - sum_g[ch] / rows -
                              static_cast<double>(xh[r * c + ch]) * (sum_gx[ch] / rows);
      gx[r * c + ch] = static_cast<S>(gamma[ch] * cache.inv_std[ch] * centered);
    }
  return grad_x;
}

// ---------------------------------------------------------------------------
// Pointwise and pooling pieces.

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& x) {
  Tensor<S> out(x.shape());
  for (Index i = 0; i < x.size(); ++i) out[i] = x[i] > S(0) ? x[i] : S(0);
  return out;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& x, const Tensor<S>& grad_out) {
  Tensor<S> gx(x.shape());
  for (Index i = 0; i < x.size(); ++i) gx[i] = x[i] > S(0) ? grad_out[i] : S(0);
  return gx;
}

// Inverted dropout. Eval mode and rate 0 return the input bitwise unchanged
// and consume no randomness (rng may then be null); `mask_draws`, when given,
// counts every uniform actually drawn so tests can pin the no-op guarantee.
template <typename S>
Tensor<S> dropout_forward(const Tensor<S>& x, double rate, bool training, Rng* rng,
                          Tensor<S>* mask, std::uint64_t* mask_draws) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) {
    if (mask) *mask = Tensor<S>();
    return x;
  }
  if (!rng) throw std::logic_error("dropout needs an rng in training mode");
  const S scale = static_cast<S>(1.0 / (1.0 - rate));
  Tensor<S> out(x.shape());
  Tensor<S> m(x.shape());
  for (Index i = 0; i < x.size(); ++i) {
    const bool keep = rng->bernoulli(1.0 - rate);
    if (mask_draws) ++*mask_draws;
    m[i] = keep ? scale : S(0);
    out[i] = x[i] * m[i];
  }
  if (mask) *mask = std::move(m);
  return out;
}

template <typename S>
Tensor<S> dropout_backward(const Tensor<S>& grad_out, const Tensor<S>& mask) {
  if (mask.empty()) return grad_out;  // forward was a no-op
  Tensor<S> gx(grad_out.shape());
  for (Index i = 0; i < grad_out.size(); ++i) gx[i] = grad_out[i] * mask[i];
  return gx;
}

// (N, H, W, C) -> (N, C), mean over the spatial extent.
template <typename S>
Tensor<S> global_avg_pool_forward(const Tensor<S>& x) {
  const Index n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  Tensor<S> out({n, c});
  for (Index i = 0; i < n; ++i) {
    const S* p = x.data() + i * hw * c;
    for (Index j = 0; j < hw; ++j)
      for (Index ch = 0; ch < c; ++ch) out[i * c + ch] += p[j * c + ch];
    for (Index ch = 0; ch < c; ++ch) out[i * c + ch] /= static_cast<S>(hw);
  }
  return out;
}

template <typename S>
Tensor<S> global_avg_pool_backward(const Shape& in_shape, const Tensor<S>& grad_out) {
  const Index n = in_shape[0], hw = in_shape[1] * in_shape[2], c = in_shape[3];
  Tensor<S> gx(in_shape);
  for (Index i = 0; i < n; ++i) {
    S* p = gx.data() + i * hw * c;
    for (Index j = 0; j < hw; ++j)
      for (Index ch = 0; ch < c; ++ch)
        p[j * c + ch] = grad_out[i * c + ch] / static_cast<S>(hw);
  }
  return gx;
}

// Non-overlapping window average (stride == window); spatial dims must divide.
template <typename S>
Tensor<S> spatial_avg_pool_forward(const Tensor<S>& x, Index window) {
  const Index n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  if (h % window != 0 || w % window != 0)
    throw std::invalid_argument("avg pool window " + std::to_string(window) +
                                " does not divide " + std::to_string(h) + "x" +
                                std::to_string(w));
  const Index oh = h / window, ow = w / window;
  Tensor<S> out({n, oh, ow, c});
  const S norm = static_cast<S>(1.0 / (window * window));
  for (Index i = 0; i < n; ++i)
    for (Index y = 0; y < oh; ++y)
      for (Index x2 = 0; x2 < ow; ++x2)
        for (Index ky = 0; ky < window; ++ky)
          for (Index kx = 0; kx < window; ++kx)
            for (Index ch = 0; ch < c; ++ch)
              out.at4(i, y, x2, ch) += x.at4(i, y * window + ky, x2 * window + kx, ch) * norm;
  return out;
}

template <typename S>
Tensor<S> spatial_avg_pool_backward(const Shape& in_shape, Index window,
                                    const Tensor<S>& grad_out) {
  Tensor<S> gx(in_shape);
  const Index n = in_shape[0], c = in_shape[3];
  const Index oh = in_shape[1] / window, ow = in_shape[2] / window;
  const S norm = static_cast<S>(1.0 / (window * window));
  for (Index i = 0; i < n; ++i)
    for (Index y = 0; y < oh; ++y)
      for (Index x2 = 0; x2 < ow; ++x2)
        for (Index ky = 0; ky < window; ++ky)
          for (Index kx = 0; kx < window; ++kx)
            for (Index ch = 0; ch < c; ++ch)
              gx.at4(i, y * window + ky, x2 * window + kx, ch) =
                  grad_out.at4(i, y, x2, ch) * norm;
  return gx;
}

// x: (N, F), weight: (F, K), bias: (K).
template <typename S>
Tensor<S> fully_connected_forward(const Tensor<S>& x, const Tensor<S>& weight,
                                  const Tensor<S>& bias) {
  const Index n = x.dim(0), f = x.dim(1), k = weight.dim(1);
  if (weight.dim(0) != f)
    throw std::invalid_argument("fully_connected: feature size mismatch");
  Tensor<S> out({n, k});
  auto xm = Eigen::Map<const MatrixR<S>>(x.data(), n, f);
  auto wm = Eigen::Map<const MatrixR<S>>(weight.data(), f, k);
  auto om = Eigen::Map<MatrixR<S>>(out.data(), n, k);
  om.noalias() = xm * wm;
  om.rowwise() += Eigen::Map<const Eigen::RowVector<S, Eigen::Dynamic>>(bias.data(), k);
  return out;
}

template <typename S>
void fully_connected_backward(const Tensor<S>& x, const Tensor<S>& weight,
                              const Tensor<S>& grad_out, Tensor<S>& grad_x,
                              Tensor<S>& grad_weight, Tensor<S>& grad_bias) {
  const Index n = x.dim(0), f = x.dim(1), k = weight.dim(1);
  grad_x = Tensor<S>({n, f});
  grad_weight = Tensor<S>({f, k});
  grad_bias = Tensor<S>({k});
  auto xm = Eigen::Map<const MatrixR<S>>(x.data(), n, f);
  auto wm = Eigen::Map<const MatrixR<S>>(weight.data(), f, k);
  auto gm = Eigen::Map<const MatrixR<S>>(grad_out.data(), n, k);
  Eigen::Map<MatrixR<S>>(grad_x.data(), n, f).noalias() = gm * wm.transpose();
  Eigen::Map<MatrixR<S>>(grad_weight.data(), f, k).noalias() = xm.transpose() * gm;
  Eigen::Map<Eigen::RowVector<S, Eigen::Dynamic>>(grad_bias.data(), k) = gm.colwise().sum();
}

}  // namespace augb
