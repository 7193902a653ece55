#pragma once

#include "pankit/gt.hpp"
#include "pankit/maps.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pankit {

/// Loss weights and margins. Defaults: alpha 0.5, beta 0.25, aggregation
/// margin 0.5, discrimination margin 3, OHEM negative:positive ratio 3.
struct LossConfig {
  double alpha = 0.5;
  double beta = 0.25;
  double delta_agg = 0.5;
  double delta_dis = 3.0;
  int ohem_ratio = 3;

  void validate() const
  {
    if (!(alpha > 0 && beta > 0 && delta_agg > 0 && delta_dis > 0) || ohem_ratio < 1)
      throw std::invalid_argument("LossConfig: weights and margins must be positive, ratio >= 1");
  }
};

/// Raster-index pixel sets T_i and K_i per instance, DO-NOT-CARE pixels removed.
struct InstanceSets {
  std::vector<std::vector<Eigen::Index>> text;
  std::vector<std::vector<Eigen::Index>> kernel;

  std::size_t size() const { return text.size(); }
};

/// Throws std::invalid_argument when an instance has an empty text or kernel set.
InstanceSets instance_sets(const GroundTruth& gt);

template <typename Scalar>
struct PlaneLoss {
  Scalar value = 0;
  Plane<Scalar> grad;
};

template <typename Scalar>
struct FieldLoss {
  Scalar value = 0;
  SimilarityField<Scalar> grad;
};

template <typename Scalar>
struct LossBreakdown {
  Scalar l_tex = 0;
  Scalar l_ker = 0;
  Scalar l_agg = 0;
  Scalar l_dis = 0;
  Scalar total = 0;
  Plane<Scalar> d_text;
  Plane<Scalar> d_kernel;
  SimilarityField<Scalar> d_similarity;
};

/// Mean similarity vector over a kernel's pixels.
template <typename Scalar>
SimilarityVector<Scalar> kernel_mean(const SimilarityField<Scalar>& field,
                                     std::span<const Eigen::Index> pixels)
{
  if (pixels.empty())
    throw std::invalid_argument("kernel_mean: empty kernel");
  SimilarityVector<Scalar> acc = SimilarityVector<Scalar>::Zero();
  for (Eigen::Index p : pixels)
    acc += field.col(p);
  return acc / static_cast<Scalar>(pixels.size());
}

/// Aggregation loss: mean over instances of the mean over text pixels of
/// ln(max(|F(p) - G(K_i)| - delta, 0)^2 + 1). The gradient includes the
/// path through the kernel mean.
template <typename Scalar>
FieldLoss<Scalar> loss_agg(const SimilarityField<Scalar>& field, const InstanceSets& sets, Scalar delta)
{
  FieldLoss<Scalar> out{Scalar(0), SimilarityField<Scalar>::Zero(kSimilarityDim, field.cols())};
  const std::size_t n = sets.size();
  if (n == 0)
    return out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& text = sets.text[i];
    const auto& kernel = sets.kernel[i];
    if (text.empty() || kernel.empty())
      throw std::invalid_argument("loss_agg: instance with empty text or kernel set");
    const SimilarityVector<Scalar> center = kernel_mean<Scalar>(field, kernel);
    const Scalar weight = Scalar(1) / (static_cast<Scalar>(n) * static_cast<Scalar>(text.size()));
    Scalar sum = 0;
    SimilarityVector<Scalar> center_grad = SimilarityVector<Scalar>::Zero();
    for (Eigen::Index p : text) {
      const SimilarityVector<Scalar> u = field.col(p) - center;
      const Scalar dist = u.norm();
      const Scalar h = dist - delta;
      if (!(h > Scalar(0)))
        continue;
      sum += std::log1p(h * h);
      const SimilarityVector<Scalar> g = (weight * Scalar(2) * h / ((Scalar(1) + h * h) * dist)) * u;
      out.grad.col(p) += g;
      center_grad -= g;
    }
    out.value += sum / static_cast<Scalar>(text.size());
    const SimilarityVector<Scalar> share = center_grad / static_cast<Scalar>(kernel.size());
    for (Eigen::Index q : kernel)
      out.grad.col(q) += share;
  }
  out.value /= static_cast<Scalar>(n);
  return out;
}

/// Discrimination loss over ordered kernel pairs:
/// ln(max(delta - |G(K_i) - G(K_j)|, 0)^2 + 1) / (N (N - 1)); zero for N <= 1.
template <typename Scalar>
FieldLoss<Scalar> loss_dis(const SimilarityField<Scalar>& field, const InstanceSets& sets, Scalar delta)
{
  FieldLoss<Scalar> out{Scalar(0), SimilarityField<Scalar>::Zero(kSimilarityDim, field.cols())};
  const std::size_t n = sets.size();
  if (n <= 1)
    return out;
  std::vector<SimilarityVector<Scalar>> centers(n);
  for (std::size_t i = 0; i < n; ++i)
    centers[i] = kernel_mean<Scalar>(field, sets.kernel[i]);

  const Scalar scale = Scalar(1) / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
  std::vector<SimilarityVector<Scalar>> center_grad(n, SimilarityVector<Scalar>::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const SimilarityVector<Scalar> v = centers[i] - centers[j];
      const Scalar dist = v.norm();
      const Scalar h = delta - dist;
      if (!(h > Scalar(0)))
        continue;
      out.value += std::log1p(h * h);
      if (dist > Scalar(0)) {
        const SimilarityVector<Scalar> g = (-scale * Scalar(2) * h / ((Scalar(1) + h * h) * dist)) * v;
        center_grad[i] += g;
        center_grad[j] -= g;
      }
    }
  }
  out.value *= scale;
  for (std::size_t i = 0; i < n; ++i) {
    const SimilarityVector<Scalar> share = center_grad[i] / static_cast<Scalar>(sets.kernel[i].size());
    for (Eigen::Index q : sets.kernel[i])
      out.grad.col(q) += share;
  }
  return out;
}

/// Dice loss 1 - 2 sum(PG) / (sum P^2 + sum G^2) over pixels where `mask`
/// is set. Degenerate masks (empty, or zero denominator) give 0.
template <typename Scalar>
PlaneLoss<Scalar> dice_loss(const Plane<Scalar>& pred, const Mask& target, const Mask& mask)
{
  if (pred.rows() != target.rows() || pred.cols() != target.cols() || pred.rows() != mask.rows() ||
      pred.cols() != mask.cols())
    throw std::invalid_argument("dice_loss: shape mismatch");
  PlaneLoss<Scalar> out{Scalar(0), Plane<Scalar>::Zero(pred.rows(), pred.cols())};
  Scalar inter = 0, pp = 0, gg = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!mask(i))
      continue;
    const Scalar g = target(i) ? Scalar(1) : Scalar(0);
    inter += pred(i) * g;
    pp += pred(i) * pred(i);
    gg += g;
  }
  const Scalar denom = pp + gg;
  if (!(denom > Scalar(0)))
    return out;
  out.value = Scalar(1) - Scalar(2) * inter / denom;
  const Scalar inv2 = Scalar(1) / (denom * denom);
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!mask(i))
      continue;
    const Scalar g = target(i) ? Scalar(1) : Scalar(0);
    out.grad(i) = (Scalar(4) * inter * pred(i) - Scalar(2) * g * denom) * inv2;
  }
  return out;
}

/// All non-ignored positives plus the ratio * #positives highest-scoring
/// non-ignored negatives (ties broken by raster order). With no positives,
/// every non-ignored pixel is selected.
template <typename Scalar>
Mask ohem_mask(const Plane<Scalar>& score, const Mask& target, const Mask& ignore, int ratio)
{
  if (score.rows() != target.rows() || score.cols() != target.cols() ||
      score.rows() != ignore.rows() || score.cols() != ignore.cols())
    throw std::invalid_argument("ohem_mask: shape mismatch");
  if (ratio < 1)
    throw std::invalid_argument("ohem_mask: ratio must be >= 1");
  const Mask positives = target && !ignore;
  const Eigen::Index n_pos = positives.count();
  if (n_pos == 0)
    return !ignore;

  std::vector<Eigen::Index> negatives;
  for (Eigen::Index i = 0; i < score.size(); ++i)
    if (!target(i) && !ignore(i))
      negatives.push_back(i);
  const auto keep = static_cast<std::size_t>(
      std::min<Eigen::Index>(static_cast<Eigen::Index>(ratio) * n_pos,
                             static_cast<Eigen::Index>(negatives.size())));
  std::stable_sort(negatives.begin(), negatives.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return score(a) > score(b); });

  Mask mask = positives;
  for (std::size_t k = 0; k < keep; ++k)
    mask(negatives[k]) = true;
  return mask;
}

/// Full objective L_tex + alpha L_ker + beta (L_agg + L_dis) with gradients
/// with respect to the three prediction maps. Pass `frozen_ohem` to hold the
/// hard-example selection fixed (e.g. during finite-difference checks).
template <typename Scalar>
LossBreakdown<Scalar> total_loss(const PredictionMaps<Scalar>& maps, const GroundTruth& gt,
                                 const LossConfig& cfg, const Mask* frozen_ohem = nullptr)
{
  cfg.validate();
  maps.check();
  if (maps.height() != gt.height() || maps.width() != gt.width())
    throw std::invalid_argument("total_loss: prediction maps and ground truth differ in size");

  const Mask text = gt.text_mask();
  const Mask kernel = gt.kernel_mask();
  const Mask selected = frozen_ohem ? *frozen_ohem : ohem_mask<Scalar>(maps.text, text, gt.ignore, cfg.ohem_ratio);
  const Mask text_support = text && !gt.ignore;

  const auto tex = dice_loss<Scalar>(maps.text, text, selected);
  const auto ker = dice_loss<Scalar>(maps.kernel, kernel, text_support);
  const InstanceSets sets = instance_sets(gt);
  const auto agg = loss_agg<Scalar>(maps.similarity, sets, static_cast<Scalar>(cfg.delta_agg));
  const auto dis = loss_dis<Scalar>(maps.similarity, sets, static_cast<Scalar>(cfg.delta_dis));

  const auto alpha = static_cast<Scalar>(cfg.alpha);
  const auto beta = static_cast<Scalar>(cfg.beta);
  LossBreakdown<Scalar> out;
  out.l_tex = tex.value;
  out.l_ker = ker.value;
  out.l_agg = agg.value;
  out.l_dis = dis.value;
  out.total = out.l_tex + alpha * out.l_ker + beta * (out.l_agg + out.l_dis);
  out.d_text = tex.grad;
  out.d_kernel = alpha * ker.grad;
  out.d_similarity = beta * (agg.grad + dis.grad);
  return out;
}

} // namespace pankit
