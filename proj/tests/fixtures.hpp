#pragma once

#include "pankit/gt.hpp"
#include "pankit/loss.hpp"
#include "pankit/maps.hpp"
#include "pankit/pa.hpp"
#include "pankit/tensor.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>

namespace pankit::testing {

using DTensor = BasicTensor<double>;

inline DTensor pack(const PredictionMaps<double>& m)
{
  DTensor t({2 + kSimilarityDim, m.height(), m.width()});
  t.plane(0) = m.text.matrix();
  t.plane(1) = m.kernel.matrix();
  t.channel_matrix().bottomRows(kSimilarityDim) = m.similarity;
  return t;
}

inline PredictionMaps<double> unpack(const DTensor& t)
{
  PredictionMaps<double> m(t.height(), t.width());
  m.text = t.plane(0).array();
  m.kernel = t.plane(1).array();
  m.similarity = t.channel_matrix().bottomRows(kSimilarityDim);
  return m;
}

// 16 x 16 grid, three stacked bands with interior kernels, a few ignored
// background pixels, random scores in (0.05, 0.95) and F uniform in [-4, 4].
struct GradFixture {
  GroundTruth gt;
  PredictionMaps<double> maps;
};

inline GradFixture make_grad_fixture(std::uint64_t seed, int size = 16)
{
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  GradFixture f;
  f.gt.instances = LabelMap::Zero(size, size);
  f.gt.kernels = LabelMap::Zero(size, size);
  f.gt.ignore = Mask::Constant(size, size, false);
  f.gt.count = 3;
  for (int i = 0; i < 3; ++i) {
    const int y0 = 1 + 5 * i, x0 = pick(0, 3), x1 = pick(size - 6, size - 1);
    f.gt.instances.block(y0, x0, 4, x1 - x0 + 1) = i + 1;
    f.gt.kernels.block(y0 + 1, x0 + 1, 2, x1 - x0 - 1) = i + 1;
  }
  for (int k = 0; k < 3; ++k) {
    int y, x;
    do {
      y = pick(0, size - 1);
      x = pick(0, size - 1);
    } while (f.gt.instances(y, x) != 0);
    f.gt.ignore(y, x) = true;
  }

  f.maps = PredictionMaps<double>(size, size);
  for (Eigen::Index p = 0; p < f.maps.text.size(); ++p) {
    f.maps.text(p) = uni(0.05, 0.95);
    f.maps.kernel(p) = uni(0.05, 0.95);
  }
  for (Eigen::Index k = 0; k < f.maps.similarity.size(); ++k)
    f.maps.similarity.data()[k] = uni(-4.0, 4.0);
  return f;
}

// True when some hinge argument of L_agg or L_dis lies within `margin` of its
// kink, where one-sided finite differences would disagree.
inline bool near_hinge(const GradFixture& f, const LossConfig& cfg, double margin = 1e-3)
{
  const InstanceSets sets = instance_sets(f.gt);
  std::vector<SimilarityVector<double>> centers;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    centers.push_back(kernel_mean<double>(f.maps.similarity, sets.kernel[i]));
    for (Eigen::Index p : sets.text[i])
      if (std::abs((f.maps.similarity.col(p) - centers.back()).norm() - cfg.delta_agg) < margin)
        return true;
  }
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if (std::abs((centers[i] - centers[j]).norm() - cfg.delta_dis) < margin)
        return true;
  return false;
}

inline double relative_error(const DTensor& analytic, const DTensor& numeric)
{
  const double denom = std::max(numeric.data().norm(), 1e-12);
  return (analytic.data() - numeric.data()).norm() / denom;
}

struct GradCheck {
  double agg = 0, dis = 0, tex = 0, ker = 0, total = 0;

  double worst() const { return std::max({agg, dis, tex, ker, total}); }
};

// Relative error of each analytic gradient against central differences,
// with the OHEM selection frozen at the unperturbed scores.
inline GradCheck check_gradients(const GradFixture& f, const LossConfig& cfg, double eps = 1e-6)
{
  const InstanceSets sets = instance_sets(f.gt);
  const Mask text = f.gt.text_mask(), kernel = f.gt.kernel_mask();
  const Mask support = text && !f.gt.ignore;
  const Mask ohem = ohem_mask<double>(f.maps.text, text, f.gt.ignore, cfg.ohem_ratio);
  const DTensor x = pack(f.maps);
  const int h = f.maps.height(), w = f.maps.width();

  const auto field_grad = [&](const SimilarityField<double>& g) {
    PredictionMaps<double> m(h, w);
    m.similarity = g;
    return pack(m);
  };
  const auto plane_grad = [&](const Plane<double>& g, int channel) {
    PredictionMaps<double> m(h, w);
    (channel == 0 ? m.text : m.kernel) = g;
    return pack(m);
  };
  const auto check = [&](const std::function<double(const DTensor&)>& fn, const DTensor& analytic) {
    return relative_error(analytic, finite_diff_grad<double>(fn, x, eps));
  };

  GradCheck out;
  out.agg = check([&](const DTensor& t) { return loss_agg<double>(unpack(t).similarity, sets, cfg.delta_agg).value; },
                  field_grad(loss_agg<double>(f.maps.similarity, sets, cfg.delta_agg).grad));
  out.dis = check([&](const DTensor& t) { return loss_dis<double>(unpack(t).similarity, sets, cfg.delta_dis).value; },
                  field_grad(loss_dis<double>(f.maps.similarity, sets, cfg.delta_dis).grad));
  out.tex = check([&](const DTensor& t) { return dice_loss<double>(unpack(t).text, text, ohem).value; },
                  plane_grad(dice_loss<double>(f.maps.text, text, ohem).grad, 0));
  out.ker = check([&](const DTensor& t) { return dice_loss<double>(unpack(t).kernel, kernel, support).value; },
                  plane_grad(dice_loss<double>(f.maps.kernel, kernel, support).grad, 1));
  const auto full = total_loss<double>(f.maps, f.gt, cfg, &ohem);
  PredictionMaps<double> g(h, w);
  g.text = full.d_text;
  g.kernel = full.d_kernel;
  g.similarity = full.d_similarity;
  out.total = check([&](const DTensor& t) { return total_loss<double>(unpack(t), f.gt, cfg, &ohem).total; }, pack(g));
  return out;
}

// Random aggregation input on an n x n grid: blotchy text made of rectangles
// and scattered pixels, 1..4 rectangular kernels inside it, and a similarity
// field clustered around one centre per kernel plus outliers.
struct PaCase {
  Mask text;
  Components kernels;
  SimilarityField<float> field;
};

inline PaCase make_pa_case(std::uint64_t seed, int n = 32)
{
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::bernoulli_distribution coin(0.15);

  PaCase c;
  c.text = Mask::Constant(n, n, false);
  for (int r = pick(2, 6); r > 0; --r) {
    const int y = pick(0, n - 4), x = pick(0, n - 4);
    c.text.block(y, x, pick(2, std::min(12, n - y)), pick(2, std::min(16, n - x))).setConstant(true);
  }
  for (Eigen::Index p = 0; p < c.text.size(); ++p)
    c.text(p) = c.text(p) || coin(rng);

  Mask kernel = Mask::Constant(n, n, false);
  const int k = pick(1, 4);
  std::vector<Eigen::Vector4f> centers;
  for (int i = 0; i < k; ++i) {
    const int y = pick(0, n - 4), x = pick(0, n - 4);
    kernel.block(y, x, pick(1, 3), pick(1, 4)).setConstant(true);
    Eigen::Vector4f m;
    for (int d = 0; d < 4; ++d)
      m(d) = 4.0f * gauss(rng);
    centers.push_back(m);
  }
  c.text = c.text || kernel;
  c.kernels = connected_components(kernel);

  c.field.resize(kSimilarityDim, static_cast<Eigen::Index>(n) * n);
  for (Eigen::Index p = 0; p < c.field.cols(); ++p) {
    const Eigen::Vector4f& m = centers[static_cast<std::size_t>(pick(0, k - 1))];
    const float spread = coin(rng) ? 6.0f : 1.5f;
    for (int d = 0; d < 4; ++d)
      c.field(d, p) = m(d) + spread * gauss(rng);
  }
  return c;
}

} // namespace pankit::testing
