#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pankit {

using Shape = std::vector<int>;

std::string to_string(const Shape& shape);

inline std::size_t shape_size(const Shape& shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

/// Dense channels-first tensor (C x H x W or N x C x H x W), row-major.
///
/// The storage is a flat Eigen vector so that planes and channel blocks can
/// be exposed as Eigen maps without copying.
template <typename Scalar>
class BasicTensor {
public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using PlaneMap = Eigen::Map<RowMatrix>;
  using ConstPlaneMap = Eigen::Map<const RowMatrix>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape))
  {
    check_shape(shape_);
    data_ = Vector::Constant(static_cast<Eigen::Index>(shape_size(shape_)), fill);
  }

  BasicTensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data))
  {
    check_shape(shape_);
    if (static_cast<std::size_t>(data_.size()) != shape_size(shape_))
      throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                  " does not match shape " + to_string(shape_));
  }

  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i < 0 ? ndim() + i : i)); }
  Eigen::Index size() const { return data_.size(); }
  bool empty() const { return shape_.empty(); }

  // Channels-first accessors; valid for 3-d tensors.
  int channels() const { return dim(-3); }
  int height() const { return dim(-2); }
  int width() const { return dim(-1); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }
  std::span<Scalar> span() { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<const Scalar> span() const { return {data_.data(), static_cast<std::size_t>(data_.size())}; }

  Scalar& operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
  Scalar operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }

  /// H x W view of channel `c`.
  PlaneMap plane(int c) { return {data_.data() + plane_offset(c), height(), width()}; }
  ConstPlaneMap plane(int c) const { return {data_.data() + plane_offset(c), height(), width()}; }

  /// C x (H*W) view, one row per channel.
  PlaneMap channel_matrix() { return {data_.data(), channels(), height() * width()}; }
  ConstPlaneMap channel_matrix() const { return {data_.data(), channels(), height() * width()}; }

  template <typename Other>
  BasicTensor<Other> cast() const
  {
    return BasicTensor<Other>(shape_, data_.template cast<Other>());
  }

  bool operator==(const BasicTensor& other) const
  {
    return shape_ == other.shape_ && data_ == other.data_;
  }

private:
  static void check_shape(const Shape& shape)
  {
    for (int d : shape)
      if (d < 1)
        throw std::invalid_argument("tensor dimensions must be >= 1, got " + to_string(shape));
  }

  Eigen::Index plane_offset(int c) const
  {
    return static_cast<Eigen::Index>(c) * height() * width();
  }

  Eigen::Index index(int c, int y, int x) const
  {
    return (static_cast<Eigen::Index>(c) * height() + y) * width() + x;
  }

  Shape shape_;
  Vector data_;
};

using Tensor = BasicTensor<float>;

/// Inference-mode normalization statistics and affine parameters.
struct BatchNormParams {
  Eigen::VectorXf mean;
  Eigen::VectorXf var;
  Eigen::VectorXf gamma;
  Eigen::VectorXf beta;
  float eps = 1e-5f;
};

// Direct convolution over a C_in x H x W input with C_out x (C_in/groups) x k x k
// weights. groups == C_in gives a depthwise convolution.
Tensor conv2d(const Tensor& input, const Tensor& weights, const std::optional<Eigen::VectorXf>& bias,
              int stride, int padding, int groups = 1);

Tensor batch_norm_relu(const Tensor& input, const BatchNormParams& bn, bool apply_relu);

// Half-pixel-centre bilinear upsampling with edge clamping:
// src = (dst + 0.5) / factor - 0.5.
Tensor upsample_bilinear(const Tensor& input, int factor);

Tensor add(const Tensor& a, const Tensor& b);
Tensor concat(const Tensor& a, const Tensor& b);
Tensor concat(std::span<const Tensor> parts);

Tensor sigmoid(const Tensor& input);

/// Thrown by finite_diff_grad when the function returns a non-finite value.
class NonFiniteError : public std::runtime_error {
public:
  NonFiniteError(Eigen::Index index, const std::string& what)
      : std::runtime_error(what), index_(index)
  {
  }
  Eigen::Index index() const { return index_; }

private:
  Eigen::Index index_;
};

/// Central finite differences of a scalar function over every element of `x`.
template <typename Scalar>
BasicTensor<Scalar> finite_diff_grad(const std::function<Scalar(const BasicTensor<Scalar>&)>& f,
                                     const BasicTensor<Scalar>& x, Scalar eps)
{
  if (!(eps > Scalar(0)))
    throw std::invalid_argument("finite_diff_grad: eps must be positive");
  BasicTensor<Scalar> grad(x.shape());
  BasicTensor<Scalar> probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar orig = probe.data()[i];
    probe.data()[i] = orig + eps;
    const Scalar hi = f(probe);
    probe.data()[i] = orig - eps;
    const Scalar lo = f(probe);
    probe.data()[i] = orig;
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      std::ostringstream msg;
      msg << "finite_diff_grad: non-finite function value at element " << i;
      throw NonFiniteError(i, msg.str());
    }
    grad.data()[i] = (hi - lo) / (Scalar(2) * eps);
  }
  return grad;
}

} // namespace pankit
