#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "augablate/core/rng.hpp"
#include "augablate/core/tensor.hpp"
#include "augablate/nn/layers.hpp"
#include "augablate/nn/loss.hpp"

using namespace augb;

namespace {

Tensor<double> random_tensor(const Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(s);
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Direct six-loop convolution used as the oracle for the GEMM path.
Tensor<double> conv_naive(const Tensor<double>& x, const Tensor<double>& k,
                          const Tensor<double>* bias, Index stride) {
  const Index n = x.dim(0), h = x.dim(1), w = x.dim(2), ci = x.dim(3);
  const Index d = k.dim(0), co = k.dim(3);
  const ConvGeometry g = conv_geometry(h, w, d, stride);
  Tensor<double> out({n, g.out_h, g.out_w, co});
  for (Index i = 0; i < n; ++i)
    for (Index oy = 0; oy < g.out_h; ++oy)
      for (Index ox = 0; ox < g.out_w; ++ox)
        for (Index f = 0; f < co; ++f) {
          double acc = bias ? (*bias)[f] : 0.0;
          for (Index ky = 0; ky < d; ++ky)
            for (Index kx = 0; kx < d; ++kx) {
              const Index iy = oy * stride - g.pad_top + ky;
              const Index ix = ox * stride - g.pad_left + kx;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              for (Index ch = 0; ch < ci; ++ch)
                acc += x.at4(i, iy, ix, ch) * k.at4(ky, kx, ch, f);
            }
          out.at4(i, oy, ox, f) = acc;
        }
  return out;
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Central difference of scalar() with respect to one tensor entry.
double fd_slot(double& slot, const std::function<double()>& scalar, double h = 1e-5) {
  const double orig = slot;
  slot = orig + h;
  const double hi = scalar();
  slot = orig - h;
  const double lo = scalar();
  slot = orig;
  return (hi - lo) / (2.0 * h);
}

void check_grad(Tensor<double>& arg, const Tensor<double>& analytic,
                const std::function<double()>& scalar, double tol = 1e-6) {
  REQUIRE(analytic.size() == arg.size());
  for (Index i = 0; i < arg.size(); ++i) {
    const double fd = fd_slot(arg[i], scalar);
    const double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(fd));
    if (err > tol) {
      CAPTURE(i);
      CAPTURE(analytic[i]);
      CAPTURE(fd);
    }
    REQUIRE(err <= tol);
  }
}

}  // namespace

TEST_CASE("same-padding geometry matches the ceil/split rules") {
  auto g = conv_geometry(32, 32, 3, 1);
  CHECK(g.out_h == 32);
  CHECK(g.out_w == 32);
  CHECK(g.pad_top == 1);
  CHECK(g.pad_left == 1);

  g = conv_geometry(32, 32, 3, 2);  // total pad 1: leading side gets the smaller half
  CHECK(g.out_h == 16);
  CHECK(g.pad_top == 0);

  g = conv_geometry(224, 224, 11, 2);  // total pad 9
  CHECK(g.out_h == 112);
  CHECK(g.pad_top == 4);

  g = conv_geometry(8, 8, 1, 1);
  CHECK(g.out_h == 8);
  CHECK(g.pad_top == 0);

  g = conv_geometry(7, 5, 3, 2);  // odd extents
  CHECK(g.out_h == 4);
  CHECK(g.out_w == 3);
  CHECK(g.pad_top == (3 * 2 + 3 - 7) / 2);
  CHECK(g.pad_left == (2 * 2 + 3 - 5) / 2);
}

TEST_CASE("convolution matches the naive reference") {
  Rng rng(60);
  for (Index stride : {Index(1), Index(2)}) {
    for (bool with_bias : {false, true}) {
      const Tensor<double> x = random_tensor({3, 6, 5, 3}, rng);
      const Tensor<double> k = random_tensor({3, 3, 3, 4}, rng);
      const Tensor<double> b = random_tensor({4}, rng);
      const Tensor<double> got = conv2d_forward(x, k, with_bias ? &b : nullptr, stride);
      const Tensor<double> want = conv_naive(x, k, with_bias ? &b : nullptr, stride);
      REQUIRE(got.shape() == want.shape());
      for (Index i = 0; i < got.size(); ++i)
        REQUIRE(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("convolution handles batches larger than one im2col chunk") {
  Rng rng(61);
  const Index n = detail::kConvChunk + 2;
  const Tensor<double> x = random_tensor({n, 5, 5, 2}, rng);
  const Tensor<double> k = random_tensor({3, 3, 2, 3}, rng);
  const Tensor<double> got = conv2d_forward<double>(x, k, nullptr, 1);
  const Tensor<double> want = conv_naive(x, k, nullptr, 1);
  for (Index i = 0; i < got.size(); ++i)
    REQUIRE(got[i] == doctest::Approx(want[i]).epsilon(1e-10));

  // Kernel gradients accumulate across chunks: whole-batch result equals the
  // sum over single-image calls.
  const Tensor<double> w = random_tensor(got.shape(), rng);
  Tensor<double> gx, gk;
  conv2d_backward(x, k, Index(1), w, gx, gk, static_cast<Tensor<double>*>(nullptr));
  Tensor<double> gk_sum({3, 3, 2, 3});
  for (Index i = 0; i < n; ++i) {
    Tensor<double> xi({1, 5, 5, 2}), wi({1, w.dim(1), w.dim(2), 3});
    std::copy_n(x.data() + i * 50, 50, xi.data());
    std::copy_n(w.data() + i * w.dim(1) * w.dim(2) * 3, w.dim(1) * w.dim(2) * 3, wi.data());
    Tensor<double> gxi, gki;
    conv2d_backward(xi, k, Index(1), wi, gxi, gki, static_cast<Tensor<double>*>(nullptr));
    for (Index j = 0; j < gk_sum.size(); ++j) gk_sum[j] += gki[j];
    for (Index j = 0; j < gxi.size(); ++j)
      REQUIRE(gx[i * 50 + j] == doctest::Approx(gxi[j]).epsilon(1e-10));
  }
  for (Index j = 0; j < gk.size(); ++j)
    REQUIRE(gk[j] == doctest::Approx(gk_sum[j]).epsilon(1e-10));
}

TEST_CASE("convolution gradients agree with finite differences") {
  Rng rng(62);
  for (Index stride : {Index(1), Index(2)}) {
    Tensor<double> x = random_tensor({2, 5, 5, 3}, rng);
    Tensor<double> k = random_tensor({3, 3, 3, 4}, rng);
    Tensor<double> b = random_tensor({4}, rng);
    const ConvGeometry g = conv_geometry(5, 5, 3, stride);
    const Tensor<double> w = random_tensor({2, g.out_h, g.out_w, 4}, rng);

    const auto scalar = [&] { return dot(conv2d_forward(x, k, &b, stride), w); };
    Tensor<double> gx, gk, gb;
    conv2d_backward(x, k, stride, w, gx, gk, &gb);
    check_grad(x, gx, scalar);
    check_grad(k, gk, scalar);
    check_grad(b, gb, scalar);
  }
}

TEST_CASE("convolution rejects malformed arguments") {
  Rng rng(63);
  const Tensor<double> x = random_tensor({1, 4, 4, 3}, rng);
  const Tensor<double> bad_channels = random_tensor({3, 3, 2, 4}, rng);
  CHECK_THROWS_AS(conv2d_forward<double>(x, bad_channels, nullptr, 1), std::invalid_argument);
  const Tensor<double> rect = random_tensor({3, 2, 3, 4}, rng);
  CHECK_THROWS_AS(conv2d_forward<double>(x, rect, nullptr, 1), std::invalid_argument);
  const Tensor<double> flat = random_tensor({4, 4, 3}, rng);
  CHECK_THROWS_AS(conv2d_forward<double>(flat, bad_channels, nullptr, 1), std::invalid_argument);
}

TEST_CASE("batchnorm training output matches hand-computed statistics") {
  // Channel 0 holds {1,2,3,4}, channel 1 holds {0,10,20,30}.
  Tensor<double> x({4, 1, 1, 2});
  const double c0[] = {1, 2, 3, 4}, c1[] = {0, 10, 20, 30};
  for (Index i = 0; i < 4; ++i) {
    x.at4(i, 0, 0, 0) = c0[i];
    x.at4(i, 0, 0, 1) = c1[i];
  }
  Tensor<double> gamma({2}), beta({2}), rmean({2}), rvar({2});
  gamma[0] = 2.0;
  gamma[1] = 0.5;
  beta[0] = -1.0;
  beta[1] = 3.0;
  rmean.fill(0.25);
  rvar.fill(1.5);

  BatchNormCache<double> cache;
  const Tensor<double> out = batchnorm_forward(x, gamma, beta, rmean, rvar, true, &cache);

  const double m0 = 2.5, v0 = (2.25 + 0.25 + 0.25 + 2.25) / 4.0;  // biased
  const double m1 = 15.0, v1 = (225 + 25 + 25 + 225) / 4.0;
  for (Index i = 0; i < 4; ++i) {
    CHECK(out.at4(i, 0, 0, 0) ==
          doctest::Approx(2.0 * (c0[i] - m0) / std::sqrt(v0 + kBnEps) - 1.0).epsilon(1e-12));
    CHECK(out.at4(i, 0, 0, 1) ==
          doctest::Approx(0.5 * (c1[i] - m1) / std::sqrt(v1 + kBnEps) + 3.0).epsilon(1e-12));
  }
  CHECK(rmean[0] == doctest::Approx(0.99 * 0.25 + 0.01 * m0).epsilon(1e-12));
  CHECK(rvar[1] == doctest::Approx(0.99 * 1.5 + 0.01 * v1).epsilon(1e-12));
  CHECK(cache.inv_std[0] == doctest::Approx(1.0 / std::sqrt(v0 + kBnEps)).epsilon(1e-12));
}

TEST_CASE("batchnorm eval mode normalizes by running statistics, untouched") {
  Rng rng(64);
  const Tensor<double> x = random_tensor({3, 2, 2, 3}, rng);
  Tensor<double> gamma({3}), beta({3}), rmean({3}), rvar({3});
  gamma.fill(1.5);
  beta.fill(0.25);
  for (Index ch = 0; ch < 3; ++ch) {
    rmean[ch] = 0.1 * static_cast<double>(ch);
    rvar[ch] = 1.0 + 0.5 * static_cast<double>(ch);
  }
  const Tensor<double> rmean_before = rmean, rvar_before = rvar;
  const Tensor<double> out = batchnorm_forward<double>(x, gamma, beta, rmean, rvar, false, nullptr);
  for (Index i = 0; i < x.size(); ++i) {
    const Index ch = i % 3;
    const double want = 1.5 * (x[i] - rmean[ch]) / std::sqrt(rvar[ch] + kBnEps) + 0.25;
    REQUIRE(out[i] == doctest::Approx(want).epsilon(1e-12));
  }
  for (Index ch = 0; ch < 3; ++ch) {
    CHECK(rmean[ch] == rmean_before[ch]);
    CHECK(rvar[ch] == rvar_before[ch]);
  }
}

TEST_CASE("batchnorm refuses training batches with one sample per channel") {
  Tensor<double> x({1, 1, 1, 4});
  Tensor<double> gamma({4}), beta({4}), rmean({4}), rvar({4});
  gamma.fill(1.0);
  rvar.fill(1.0);
  CHECK_THROWS_AS(batchnorm_forward<double>(x, gamma, beta, rmean, rvar, true, nullptr),
                  std::runtime_error);
  // Eval mode is fine with a single sample.
  CHECK_NOTHROW(batchnorm_forward<double>(x, gamma, beta, rmean, rvar, false, nullptr));
}

TEST_CASE("batchnorm gradients agree with finite differences") {
  Rng rng(65);
  Tensor<double> x = random_tensor({4, 3, 3, 2}, rng);
  Tensor<double> gamma = random_tensor({2}, rng, 0.5, 1.5);
  Tensor<double> beta = random_tensor({2}, rng);
  Tensor<double> rmean({2}), rvar({2});
  rvar.fill(1.0);
  const Tensor<double> w = random_tensor(x.shape(), rng);

  const auto scalar = [&] {
    Tensor<double> rm = rmean, rv = rvar;  // keep running stats out of the picture
    return dot(batchnorm_forward<double>(x, gamma, beta, rm, rv, true, nullptr), w);
  };
  BatchNormCache<double> cache;
  {
    Tensor<double> rm = rmean, rv = rvar;
    batchnorm_forward(x, gamma, beta, rm, rv, true, &cache);
  }
  Tensor<double> ggamma, gbeta;
  const Tensor<double> gx = batchnorm_backward(w, cache, gamma, ggamma, gbeta);
  check_grad(x, gx, scalar);
  check_grad(gamma, ggamma, scalar);
  check_grad(beta, gbeta, scalar);
}

TEST_CASE("relu forward clamps and backward gates, matching finite differences") {
  Rng rng(66);
  Tensor<double> x({2, 3, 3, 2});
  for (Index i = 0; i < x.size(); ++i) {
    const double mag = rng.uniform(0.1, 1.1);  // keep away from the kink
    x[i] = rng.bernoulli(0.5) ? mag : -mag;
  }
  const Tensor<double> y = relu_forward(x);
  for (Index i = 0; i < x.size(); ++i) REQUIRE(y[i] == (x[i] > 0 ? x[i] : 0.0));

  const Tensor<double> w = random_tensor(x.shape(), rng);
  const Tensor<double> gx = relu_backward(x, w);
  check_grad(x, gx, [&] { return dot(relu_forward(x), w); });
}

TEST_CASE("dropout is a bitwise no-op in eval mode and at rate zero") {
  Rng rng(67);
  const Tensor<float> x = random_tensor({2, 4, 4, 3}, rng).cast<float>();
  std::uint64_t draws = 0;
  Tensor<float> mask;

  Tensor<float> out = dropout_forward(x, 0.5, false, nullptr, &mask, &draws);
  CHECK(out.shape() == x.shape());
  CHECK(std::equal(out.data(), out.data() + out.size(), x.data()));
  CHECK(mask.empty());
  CHECK(draws == 0);

  out = dropout_forward(x, 0.0, true, nullptr, &mask, &draws);
  CHECK(std::equal(out.data(), out.data() + out.size(), x.data()));
  CHECK(mask.empty());
  CHECK(draws == 0);

  // Backward through an empty mask passes gradients straight through.
  const Tensor<float> g = random_tensor({2, 4, 4, 3}, rng).cast<float>();
  const Tensor<float> gx = dropout_backward(g, mask);
  CHECK(std::equal(gx.data(), gx.data() + gx.size(), g.data()));
}

TEST_CASE("dropout keeps roughly 1-rate of entries, scaled to preserve the mean") {
  const double rate = 0.3;
  Tensor<float> x({20000});
  x.fill(1.0f);
  Rng rng = Rng::keyed({7, rng_stream::kDropout, 0});
  std::uint64_t draws = 0;
  Tensor<float> mask;
  const Tensor<float> out = dropout_forward(x, rate, true, &rng, &mask, &draws);
  CHECK(draws == 20000);
  REQUIRE(mask.size() == 20000);

  const float scale = 1.0f / 0.7f;
  Index kept = 0;
  for (Index i = 0; i < out.size(); ++i) {
    REQUIRE((out[i] == 0.0f || out[i] == scale));
    REQUIRE(mask[i] == (out[i] == 0.0f ? 0.0f : scale));
    kept += out[i] != 0.0f;
  }
  CHECK(std::abs(static_cast<double>(kept) / 20000.0 - 0.7) < 0.015);

  // Backward multiplies by the saved mask.
  Rng grng(68);
  const Tensor<float> g = random_tensor({20000}, grng).cast<float>();
  const Tensor<float> gx = dropout_backward(g, mask);
  for (Index i = 0; i < g.size(); ++i) REQUIRE(gx[i] == g[i] * mask[i]);
}

TEST_CASE("dropout argument validation") {
  Tensor<float> x({4});
  CHECK_THROWS_AS(
      dropout_forward(x, -0.1, true, nullptr, static_cast<Tensor<float>*>(nullptr), nullptr),
      std::invalid_argument);
  CHECK_THROWS_AS(
      dropout_forward(x, 1.0, true, nullptr, static_cast<Tensor<float>*>(nullptr), nullptr),
      std::invalid_argument);
  CHECK_THROWS_AS(
      dropout_forward(x, 0.5, true, nullptr, static_cast<Tensor<float>*>(nullptr), nullptr),
      std::logic_error);
}

TEST_CASE("global average pool averages the spatial extent; gradients check out") {
  Rng rng(69);
  Tensor<double> x = random_tensor({2, 3, 4, 5}, rng);
  const Tensor<double> y = global_avg_pool_forward(x);
  REQUIRE(y.shape() == Shape{2, 5});
  for (Index n = 0; n < 2; ++n)
    for (Index c = 0; c < 5; ++c) {
      double sum = 0.0;
      for (Index h = 0; h < 3; ++h)
        for (Index w = 0; w < 4; ++w) sum += x.at4(n, h, w, c);
      REQUIRE(y[n * 5 + c] == doctest::Approx(sum / 12.0).epsilon(1e-12));
    }

  const Tensor<double> w = random_tensor({2, 5}, rng);
  const Tensor<double> gx = global_avg_pool_backward(x.shape(), w);
  check_grad(x, gx, [&] { return dot(global_avg_pool_forward(x), w); });
}

TEST_CASE("spatial average pool handles dividing windows and rejects others") {
  Rng rng(70);
  Tensor<double> x = random_tensor({2, 4, 4, 3}, rng);
  const Tensor<double> y = spatial_avg_pool_forward(x, 2);
  REQUIRE(y.shape() == Shape{2, 2, 2, 3});
  for (Index n = 0; n < 2; ++n)
    for (Index c = 0; c < 3; ++c) {
      const double want = (x.at4(n, 0, 0, c) + x.at4(n, 0, 1, c) + x.at4(n, 1, 0, c) +
                           x.at4(n, 1, 1, c)) /
                          4.0;
      REQUIRE(y.at4(n, 0, 0, c) == doctest::Approx(want).epsilon(1e-12));
    }

  const Tensor<double> w = random_tensor({2, 2, 2, 3}, rng);
  const Tensor<double> gx = spatial_avg_pool_backward(x.shape(), 2, w);
  check_grad(x, gx, [&] { return dot(spatial_avg_pool_forward(x, 2), w); });

  CHECK_THROWS_AS(spatial_avg_pool_forward(x, 3), std::invalid_argument);
}

TEST_CASE("fully connected layer matches a hand-computed product") {
  Tensor<double> x({2, 2}, {1, 2, 3, 4});
  Tensor<double> w({2, 2}, {5, 6, 7, 8});
  Tensor<double> b({2}, {0.5, -1.0});
  const Tensor<double> y = fully_connected_forward(x, w, b);
  CHECK(y[0] == doctest::Approx(19.5));
  CHECK(y[1] == doctest::Approx(21.0));
  CHECK(y[2] == doctest::Approx(43.5));
  CHECK(y[3] == doctest::Approx(49.0));

  Tensor<double> wrong({3, 2});
  CHECK_THROWS_AS(fully_connected_forward(x, wrong, b), std::invalid_argument);
}

TEST_CASE("fully connected gradients agree with finite differences") {
  Rng rng(71);
  Tensor<double> x = random_tensor({3, 7}, rng);
  Tensor<double> w = random_tensor({7, 4}, rng);
  Tensor<double> b = random_tensor({4}, rng);
  const Tensor<double> probe = random_tensor({3, 4}, rng);

  const auto scalar = [&] { return dot(fully_connected_forward(x, w, b), probe); };
  Tensor<double> gx, gw, gb;
  fully_connected_backward(x, w, probe, gx, gw, gb);
  check_grad(x, gx, scalar);
  check_grad(w, gw, scalar);
  check_grad(b, gb, scalar);
}

TEST_CASE("softmax rows are simplex points and match a closed form") {
  Tensor<double> two({1, 2}, {0.0, std::log(3.0)});
  const Tensor<double> p = softmax(two);
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));

  Rng rng(72);
  const Tensor<double> x = random_tensor({5, 9}, rng, -30.0, 30.0);
  const Tensor<double> q = softmax(x);
  for (Index i = 0; i < 5; ++i) {
    double sum = 0.0;
    for (Index j = 0; j < 9; ++j) {
      REQUIRE(q[i * 9 + j] > 0.0);
      sum += q[i * 9 + j];
    }
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Large logits stay finite thanks to max subtraction.
  Tensor<double> big({1, 3}, {1000.0, 999.0, -1000.0});
  const Tensor<double> pb = softmax(big);
  CHECK(pb.all_finite());
  CHECK(pb[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("cross entropy matches an independent computation and its gradient") {
  Rng rng(73);
  Tensor<double> logits = random_tensor({4, 6}, rng, -2.0, 2.0);
  const std::vector<int> labels = {3, 0, 5, 2};

  double want = 0.0;
  for (Index i = 0; i < 4; ++i) {
    double mx = logits[i * 6];
    for (Index j = 1; j < 6; ++j) mx = std::max(mx, logits[i * 6 + j]);
    double z = 0.0;
    for (Index j = 0; j < 6; ++j) z += std::exp(logits[i * 6 + j] - mx);
    want -= logits[i * 6 + labels[static_cast<std::size_t>(i)]] - mx - std::log(z);
  }
  want /= 4.0;

  Tensor<double> grad;
  const double loss = softmax_cross_entropy(logits, labels, &grad);
  CHECK(loss == doctest::Approx(want).epsilon(1e-12));

  check_grad(logits, grad,
             [&] { return softmax_cross_entropy<double>(logits, labels, nullptr); }, 1e-7);

  CHECK_THROWS_AS(softmax_cross_entropy(logits, {3, 0}, &grad), std::invalid_argument);
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {3, 0, 9, 2}, &grad), std::invalid_argument);
}
