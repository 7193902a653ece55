#pragma once

#include "pankit/io.hpp"
#include "pankit/pa.hpp"

namespace pankit {

/// Principal axes of the similarity vectors under `mask`, columns sorted by
/// decreasing variance. Each column is sign-fixed so that its largest
/// magnitude entry is positive.
struct Pca {
  SimilarityVector<double> mean = SimilarityVector<double>::Zero();
  Eigen::Matrix<double, kSimilarityDim, kSimilarityDim> axes = Eigen::Matrix4d::Identity();
  SimilarityVector<double> variance = SimilarityVector<double>::Zero();
};

Pca similarity_pca(const SimilarityField<float>& field, const Mask& mask);

/// Text region tinted, kernel boundaries outlined, instance polygons drawn in
/// per-instance colours. Output is the image-resolution canvas (grid * stride);
/// `base` (3 x H x W in [0, 1]) is used as the backdrop when given.
RgbImage render_overlay(const PredictionMaps<float>& maps, std::span<const TextInstance> instances,
                        const PAConfig& cfg, const Tensor* base = nullptr);

/// First three principal components of F over text pixels mapped to RGB;
/// non-text pixels are black. One output pixel per grid pixel, scaled by `zoom`.
RgbImage render_similarity(const PredictionMaps<float>& maps, const PAConfig& cfg, int zoom = 1);

} // namespace pankit
