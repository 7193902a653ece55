#pragma once

#include "pankit/geometry.hpp"
#include "pankit/maps.hpp"
#include "pankit/scene.hpp"

namespace pankit {

/// Instance-labelled text and kernel maps on the prediction grid.
///
/// Invariants: kernels(p) == i implies instances(p) == i; every id in
/// 1..count owns at least one kernel pixel outside the ignore mask.
struct GroundTruth {
  LabelMap instances;
  LabelMap kernels;
  Mask ignore;
  int count = 0;

  int height() const { return static_cast<int>(instances.rows()); }
  int width() const { return static_cast<int>(instances.cols()); }

  Mask text_mask() const { return instances > 0; }
  Mask kernel_mask() const { return kernels > 0; }

  /// Throws std::logic_error when an invariant is broken.
  void validate() const;
};

/// Even-odd scanline fill of `poly * scale` on an h x w grid; a pixel is
/// inside when its centre (x + 0.5, y + 0.5) is.
Mask rasterize(const Polygon& poly, int h, int w, float scale);

/// Same fill with an explicit grid origin: grid = (p - origin) * scale.
Mask rasterize(const Polygon& poly, int h, int w, double scale, const Eigen::Vector2d& origin);

/// Kernel offset distance A (1 - r^2) / L.
double shrink_offset(const Polygon& poly, double r);

/// Exact Euclidean distance from every pixel to the nearest `true` pixel of
/// `sources` (infinity when there is none).
Plane<float> distance_to(const Mask& sources);

/// Distance from each mask pixel to the nearest background pixel, with the
/// area outside the grid counted as background. Zero on background.
Plane<float> inside_distance(const Mask& mask);

/// Keeps pixels farther than `offset` from the mask boundary, which sits half
/// a pixel outside the outermost pixel centres.
Mask shrink_mask(const Mask& mask, double offset);

/// Pixels of `region` whose centre lies farther than `offset` (grid px) from
/// the boundary of the polygon mapped by (p - origin) * scale.
Mask shrink_polygon(const Polygon& poly, const Mask& region, double scale, double offset,
                    const Eigen::Vector2d& origin = Eigen::Vector2d::Zero());

/// Rasterizes every polygon at 1/stride, shrinks text instances by ratio r.
/// Later polygons overwrite earlier ones; instances whose kernel vanishes
/// are moved to the ignore mask.
GroundTruth make_ground_truth(const Scene& scene, double r, int stride);

/// Grid size for a canvas dimension at the given stride.
inline int grid_size(int canvas, int stride) { return (canvas + stride - 1) / stride; }

} // namespace pankit
