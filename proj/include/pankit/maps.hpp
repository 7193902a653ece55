#pragma once

#include "pankit/tensor.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace pankit {

inline constexpr int kSimilarityDim = 4;

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using LabelMap = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-pixel similarity vectors; column p holds F at raster index p.
/// Row-major storage makes the layout identical to a 4 x h x w tensor.
template <typename Scalar>
using SimilarityField = Eigen::Matrix<Scalar, kSimilarityDim, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using SimilarityVector = Eigen::Matrix<Scalar, kSimilarityDim, 1>;

/// Network outputs at stride 4: text scores, kernel scores, similarity field.
template <typename Scalar>
struct PredictionMaps {
  Plane<Scalar> text;
  Plane<Scalar> kernel;
  SimilarityField<Scalar> similarity;

  PredictionMaps() = default;
  PredictionMaps(int h, int w)
      : text(Plane<Scalar>::Zero(h, w)), kernel(Plane<Scalar>::Zero(h, w)),
        similarity(SimilarityField<Scalar>::Zero(kSimilarityDim, static_cast<Eigen::Index>(h) * w))
  {
  }

  int height() const { return static_cast<int>(text.rows()); }
  int width() const { return static_cast<int>(text.cols()); }

  void check() const
  {
    if (kernel.rows() != text.rows() || kernel.cols() != text.cols() ||
        similarity.cols() != text.size())
      throw std::invalid_argument("prediction maps: text, kernel and similarity dims disagree");
  }

  template <typename Other>
  PredictionMaps<Other> cast() const
  {
    PredictionMaps<Other> out;
    out.text = text.template cast<Other>();
    out.kernel = kernel.template cast<Other>();
    out.similarity = similarity.template cast<Other>();
    return out;
  }
};

/// 6 x h x w tensor: [P_tex, P_ker, F_0..F_3].
PredictionMaps<float> maps_from_tensor(const Tensor& t);
Tensor maps_to_tensor(const PredictionMaps<float>& maps);

} // namespace pankit
