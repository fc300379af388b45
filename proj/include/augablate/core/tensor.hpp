#pragma once

#include <Eigen/Dense>

#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace augb {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using MatrixR = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorC = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline Index shape_count(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), Index{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

/// Dense row-major n-d array templated on scalar (float for training,
/// double for gradient-check mode). Activations are rank-4
/// (batch, height, width, channels); conv kernels are rank-4
/// (kh, kw, in_channels, out_channels).
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape)
      : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_count(shape_)), Scalar(0)) {}
  Tensor(Shape shape, std::vector<Scalar> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_count(shape_) != static_cast<Index>(data_.size()))
      throw std::invalid_argument("tensor: value count does not match shape " + shape_str(shape_));
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_.at(static_cast<std::size_t>(i)); }
  Index size() const { return static_cast<Index>(data_.size()); }
  bool empty() const { return data_.empty(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  const Scalar& operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }

  /// Rank-4 accessor, (n, h, w, c) with channel-last layout.
  Scalar& at4(Index n, Index h, Index w, Index c) {
    return data_[static_cast<std::size_t>(((n * shape_[1] + h) * shape_[2] + w) * shape_[3] + c)];
  }
  const Scalar& at4(Index n, Index h, Index w, Index c) const {
    return data_[static_cast<std::size_t>(((n * shape_[1] + h) * shape_[2] + w) * shape_[3] + c)];
  }

  /// Whole buffer viewed as a rows x cols row-major Eigen matrix.
  Eigen::Map<MatrixR<Scalar>> mat(Index rows, Index cols) {
    check_view(rows * cols);
    return {data_.data(), rows, cols};
  }
  Eigen::Map<const MatrixR<Scalar>> mat(Index rows, Index cols) const {
    check_view(rows * cols);
    return {data_.data(), rows, cols};
  }

  Eigen::Map<VectorC<Scalar>> vec() { return {data_.data(), size()}; }
  Eigen::Map<const VectorC<Scalar>> vec() const { return {data_.data(), size()}; }

  Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> array() { return {data_.data(), size()}; }
  Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> array() const {
    return {data_.data(), size()};
  }

  void fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }
  void set_zero() { fill(Scalar(0)); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  /// Reinterpret with a new shape of identical element count.
  Tensor reshaped(Shape s) const {
    if (shape_count(s) != size())
      throw std::invalid_argument("tensor: reshape " + shape_str(shape_) + " -> " + shape_str(s));
    Tensor t;
    t.shape_ = std::move(s);
    t.data_ = data_;
    return t;
  }

  /// All entries finite (used by divergence checks).
  bool all_finite() const {
    for (const Scalar& v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> t{shape_};
    for (Index i = 0; i < size(); ++i) t[i] = static_cast<Other>(data_[static_cast<std::size_t>(i)]);
    return t;
  }

 private:
  void check_view(Index n) const {
    if (n != size())
      throw std::invalid_argument("tensor: view of " + std::to_string(n) + " elements over " +
                                  std::to_string(size()));
  }

  Shape shape_;
  std::vector<Scalar> data_;
};

}  // namespace augb
