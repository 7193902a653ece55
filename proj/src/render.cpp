#include "pankit/render.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pankit {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

// Golden-angle hue walk; distinct, deterministic colours per instance.
Rgb instance_color(int index)
{
  const double hue = std::fmod(index * 137.508, 360.0) / 60.0;
  const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
  std::array<double, 3> c{};
  switch (static_cast<int>(hue)) {
  case 0: c = {1, x, 0}; break;
  case 1: c = {x, 1, 0}; break;
  case 2: c = {0, 1, x}; break;
  case 3: c = {0, x, 1}; break;
  case 4: c = {x, 0, 1}; break;
  default: c = {1, 0, x}; break;
  }
  return {static_cast<std::uint8_t>(55 + 200 * c[0]), static_cast<std::uint8_t>(55 + 200 * c[1]),
          static_cast<std::uint8_t>(55 + 200 * c[2])};
}

void put(RgbImage& img, int x, int y, const Rgb& c)
{
  if (x < 0 || y < 0 || x >= img.width || y >= img.height)
    return;
  std::copy(c.begin(), c.end(), img.at(x, y));
}

void blend(RgbImage& img, int x, int y, const Rgb& c, float alpha)
{
  std::uint8_t* px = img.at(x, y);
  for (int k = 0; k < 3; ++k)
    px[k] = static_cast<std::uint8_t>(std::lround((1.0f - alpha) * px[k] + alpha * c[k]));
}

void draw_line(RgbImage& img, Point a, Point b, const Rgb& c)
{
  int x0 = static_cast<int>(std::floor(a.x())), y0 = static_cast<int>(std::floor(a.y()));
  const int x1 = static_cast<int>(std::floor(b.x())), y1 = static_cast<int>(std::floor(b.y()));
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1)
      break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

} // namespace

Pca similarity_pca(const SimilarityField<float>& field, const Mask& mask)
{
  Pca pca;
  std::size_t n = 0;
  for (Eigen::Index p = 0; p < mask.size(); ++p)
    if (mask(p)) {
      pca.mean += field.col(p).cast<double>();
      ++n;
    }
  if (n == 0)
    return pca;
  pca.mean /= static_cast<double>(n);
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (Eigen::Index p = 0; p < mask.size(); ++p)
    if (mask(p)) {
      const SimilarityVector<double> u = field.col(p).cast<double>() - pca.mean;
      cov += u * u.transpose();
    }
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cov);
  // Eigen sorts ascending; reverse into decreasing variance.
  for (int k = 0; k < kSimilarityDim; ++k) {
    SimilarityVector<double> axis = eig.eigenvectors().col(kSimilarityDim - 1 - k);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0)
      axis = -axis;
    pca.axes.col(k) = axis;
    pca.variance(k) = std::max(0.0, eig.eigenvalues()(kSimilarityDim - 1 - k));
  }
  return pca;
}

RgbImage render_overlay(const PredictionMaps<float>& maps, std::span<const TextInstance> instances,
                        const PAConfig& cfg, const Tensor* base)
{
  const Binarized bin = binarize(maps, cfg);
  const int s = cfg.stride, gh = maps.height(), gw = maps.width();
  RgbImage img(gw * s, gh * s, 40);
  if (base) {
    for (int y = 0; y < std::min(img.height, base->height()); ++y)
      for (int x = 0; x < std::min(img.width, base->width()); ++x)
        for (int c = 0; c < 3; ++c)
          img.at(x, y)[c] = static_cast<std::uint8_t>(
              std::lround(255.0f * std::clamp((*base)(std::min(c, base->channels() - 1), y, x), 0.0f, 1.0f)));
  }
  const Rgb tint{255, 210, 0}, outline{255, 40, 40};
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx) {
      if (!bin.text(gy, gx))
        continue;
      const bool on_kernel = bin.kernel(gy, gx);
      const bool kernel_edge = on_kernel && (gx == 0 || gy == 0 || gx == gw - 1 || gy == gh - 1 ||
                                             !bin.kernel(gy - 1, gx) || !bin.kernel(gy + 1, gx) ||
                                             !bin.kernel(gy, gx - 1) || !bin.kernel(gy, gx + 1));
      for (int y = gy * s; y < (gy + 1) * s; ++y)
        for (int x = gx * s; x < (gx + 1) * s; ++x) {
          if (kernel_edge)
            put(img, x, y, outline);
          else
            blend(img, x, y, tint, 0.35f);
        }
    }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Rgb c = instance_color(static_cast<int>(i) + 1);
    const auto& pts = instances[i].polygon.points;
    for (std::size_t k = 0; k < pts.size(); ++k)
      draw_line(img, pts[k], pts[(k + 1) % pts.size()], c);
  }
  return img;
}

RgbImage render_similarity(const PredictionMaps<float>& maps, const PAConfig& cfg, int zoom)
{
  if (zoom < 1)
    throw std::invalid_argument("render_similarity: zoom must be >= 1");
  const Mask text = binarize(maps, cfg).text;
  const Pca pca = similarity_pca(maps.similarity, text);
  const int gh = maps.height(), gw = maps.width();
  RgbImage img(gw * zoom, gh * zoom, 0);
  std::array<double, 3> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  Eigen::Matrix<double, 3, Eigen::Dynamic> proj(3, text.size());
  for (Eigen::Index p = 0; p < text.size(); ++p) {
    if (!text(p))
      continue;
    proj.col(p) = pca.axes.leftCols<3>().transpose() * (maps.similarity.col(p).cast<double>() - pca.mean);
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], proj(k, p));
      hi[k] = std::max(hi[k], proj(k, p));
    }
  }
  for (Eigen::Index p = 0; p < text.size(); ++p) {
    if (!text(p))
      continue;
    Rgb c;
    for (int k = 0; k < 3; ++k) {
      const double span = hi[k] - lo[k];
      c[k] = static_cast<std::uint8_t>(span > 1e-12 ? std::lround(40.0 + 215.0 * (proj(k, p) - lo[k]) / span) : 147);
    }
    const int gy = static_cast<int>(p / gw), gx = static_cast<int>(p % gw);
    for (int y = gy * zoom; y < (gy + 1) * zoom; ++y)
      for (int x = gx * zoom; x < (gx + 1) * zoom; ++x)
        put(img, x, y, c);
  }
  return img;
}

} // namespace pankit
