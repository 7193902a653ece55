#pragma once

#include "pankit/geometry.hpp"
#include "pankit/maps.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace pankit {

/// Post-processing parameters. `distance` (default 6) gates growth on the
/// similarity field; the thresholds and filters are tunable defaults.
struct PAConfig {
  float distance = 6.0f;
  float text_thresh = 0.5f;
  float kernel_thresh = 0.5f;
  int min_area = 16;
  float min_score = 0.85f;
  int stride = 4;
  bool fit_rect = true;

  void validate() const;
};

struct Binarized {
  Mask text;
  Mask kernel;
};

/// text = P_tex > t_text; kernel = (P_ker > t_kernel) && text.
Binarized binarize(const PredictionMaps<float>& maps, const PAConfig& cfg);

struct Components {
  LabelMap labels; // 0 background, 1..count in raster discovery order
  int count = 0;
};

/// 4-connected components via two-pass union-find.
Components connected_components(const Mask& mask);

/// Multi-source BFS from all kernel pixels (seeded in raster order). A text
/// neighbour joins the popping pixel's instance when its similarity vector
/// lies strictly within `distance` of that kernel's (fixed) mean.
LabelMap aggregate(const Mask& text, const Components& kernels, const SimilarityField<float>& field,
                   float distance);

/// Reference semantics for `aggregate`: generation-by-generation frontier
/// expansion with a full grid rescan per generation. Slow; for testing.
LabelMap aggregate_oracle(const Mask& text, const Components& kernels,
                          const SimilarityField<float>& field, float distance);

/// Kernel means G(K_i) accumulated in double, index i-1 for label i.
std::vector<Eigen::Vector4d> kernel_means(const Components& kernels, const SimilarityField<float>& field);

struct PixelCoord {
  int x = 0;
  int y = 0;
  bool operator==(const PixelCoord&) const = default;
};

struct TextInstance {
  int label = 0;
  std::vector<PixelCoord> pixels; // grid coordinates
  float score = 0.0f;             // mean P_tex over pixels
  Polygon polygon;                // image coordinates
  std::optional<RotatedRect> rect;
};

/// Outer boundary of a 4-connected pixel set, traced along pixel edges with
/// the region on the right (clockwise on screen), decimated with tolerance
/// 0.5 grid pixels, then scaled by `scale`. Holes are ignored.
Polygon trace_contour(std::span<const PixelCoord> pixels, float scale);

/// Minimum-area rectangle over pixel centres, scaled by `scale`.
RotatedRect min_area_rect(std::span<const PixelCoord> pixels, float scale);

std::vector<TextInstance> extract_instances(const LabelMap& labels, int count, const Plane<float>& text_score,
                                            const PAConfig& cfg);

/// binarize -> kernel components -> aggregate -> extract.
std::vector<TextInstance> post_process(const PredictionMaps<float>& maps, const PAConfig& cfg);

} // namespace pankit
