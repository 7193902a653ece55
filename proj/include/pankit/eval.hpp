#pragma once

#include "pankit/geometry.hpp"

#include <span>
#include <vector>

namespace pankit {

struct Detection {
  Polygon polygon;
  float score = 1.0f;
};

struct Match {
  int det = -1;
  int gt = -1;
  double iou = 0.0;
};

/// Detection counts and derived scores. Detections matched to a DO-NOT-CARE
/// region are counted in `ignored` and excluded from TP and FP.
struct EvalReport {
  std::vector<Match> matches;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int ignored = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmeasure = 0.0;

  /// Recomputes precision, recall and F from the counts.
  void finalize();
};

/// Raster IoU on a shared grid over the union bounding box, `resolution`
/// samples along its longer side. 0 when both polygons are empty.
double polygon_iou(const Polygon& a, const Polygon& b, int resolution = 512);

/// Greedy one-to-one matching in descending detection score.
EvalReport match(std::span<const Detection> dets, std::span<const Polygon> gts, double iou_thresh = 0.5,
                 int resolution = 512);

/// Micro-averaged totals; throws on an empty list.
EvalReport summarize(std::span<const EvalReport> reports);

} // namespace pankit
