#include "pankit/eval.hpp"

#include "pankit/gt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pankit {

void EvalReport::finalize()
{
  precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  fmeasure = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

double polygon_iou(const Polygon& a, const Polygon& b, int resolution)
{
  if (resolution < 1)
    throw std::invalid_argument("polygon_iou: resolution must be >= 1");
  if (a.points.empty() && b.points.empty())
    return 0.0;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(INFINITY), hi = Eigen::Vector2d::Constant(-INFINITY);
  for (const auto* poly : {&a, &b})
    for (const auto& p : poly->points) {
      lo = lo.cwiseMin(p.cast<double>());
      hi = hi.cwiseMax(p.cast<double>());
    }
  const Eigen::Vector2d extent = hi - lo;
  const double longer = extent.maxCoeff();
  if (!(longer > 0.0))
    return 0.0;
  const double cell = longer / resolution;
  const int w = std::max(1, static_cast<int>(std::ceil(extent.x() / cell)));
  const int h = std::max(1, static_cast<int>(std::ceil(extent.y() / cell)));
  const Mask ma = rasterize(a, h, w, 1.0 / cell, lo);
  const Mask mb = rasterize(b, h, w, 1.0 / cell, lo);
  const auto uni = (ma || mb).count();
  if (uni == 0)
    return 0.0;
  return static_cast<double>((ma && mb).count()) / static_cast<double>(uni);
}

EvalReport match(std::span<const Detection> dets, std::span<const Polygon> gts, double iou_thresh,
                 int resolution)
{
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return dets[static_cast<std::size_t>(x)].score > dets[static_cast<std::size_t>(y)].score;
  });

  EvalReport report;
  std::vector<char> taken(gts.size(), 0);
  for (int d : order) {
    const Polygon& det = dets[static_cast<std::size_t>(d)].polygon;
    int best = -1;
    double best_iou = 0.0;
    bool hits_ignore = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = polygon_iou(det, gts[g], resolution);
      if (gts[g].ignore) {
        hits_ignore = hits_ignore || iou > iou_thresh;
        continue;
      }
      if (!taken[g] && iou >= iou_thresh && iou > best_iou) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = 1;
      report.matches.push_back({d, best, best_iou});
      ++report.tp;
    } else if (hits_ignore) {
      ++report.ignored;
    } else {
      ++report.fp;
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g)
    if (!gts[g].ignore && !taken[g])
      ++report.fn;
  report.finalize();
  return report;
}

EvalReport summarize(std::span<const EvalReport> reports)
{
  if (reports.empty())
    throw std::invalid_argument("summarize: no reports");
  EvalReport total;
  for (const auto& r : reports) {
    total.tp += r.tp;
    total.fp += r.fp;
    total.fn += r.fn;
    total.ignored += r.ignored;
    total.matches.insert(total.matches.end(), r.matches.begin(), r.matches.end());
  }
  total.finalize();
  return total;
}

} // namespace pankit
