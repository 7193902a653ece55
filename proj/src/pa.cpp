#include "pankit/pa.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace pankit {

namespace {

// Growth order for neighbours: up, left, right, down.
constexpr int kDx[4] = {0, -1, 1, 0};
constexpr int kDy[4] = {-1, 0, 0, 1};

int find_root(std::vector<int>& parent, int i)
{
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

void unite(std::vector<int>& parent, int a, int b)
{
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a != b)
    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
}

void check_aggregate_inputs(const Mask& text, const Components& kernels, const SimilarityField<float>& field)
{
  if (kernels.labels.rows() != text.rows() || kernels.labels.cols() != text.cols() ||
      field.cols() != text.size())
    throw std::invalid_argument("aggregate: text mask, kernel labels and similarity field disagree in size");
  for (Eigen::Index p = 0; p < text.size(); ++p)
    if (kernels.labels(p) > 0 && !text(p))
      throw std::invalid_argument("aggregate: kernel pixel outside the text mask");
}

double squared_distance(const SimilarityField<float>& field, Eigen::Index p, const Eigen::Vector4d& center)
{
  return (field.col(p).cast<double>() - center).squaredNorm();
}

} // namespace

void PAConfig::validate() const
{
  if (!(distance > 0.0f))
    throw std::invalid_argument("PAConfig: distance threshold must be positive");
  if (!(text_thresh > 0.0f && text_thresh < 1.0f && kernel_thresh > 0.0f && kernel_thresh < 1.0f))
    throw std::invalid_argument("PAConfig: thresholds must lie in (0, 1)");
  if (min_area < 1)
    throw std::invalid_argument("PAConfig: min_area must be >= 1");
  if (stride < 1)
    throw std::invalid_argument("PAConfig: stride must be >= 1");
}

Binarized binarize(const PredictionMaps<float>& maps, const PAConfig& cfg)
{
  maps.check();
  Binarized out;
  out.text = maps.text > cfg.text_thresh;
  out.kernel = (maps.kernel > cfg.kernel_thresh) && out.text;
  return out;
}

Components connected_components(const Mask& mask)
{
  const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
  LabelMap provisional = LabelMap::Zero(h, w);
  std::vector<int> parent{0};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x))
        continue;
      const int up = y > 0 ? provisional(y - 1, x) : 0;
      const int left = x > 0 ? provisional(y, x - 1) : 0;
      if (up && left) {
        provisional(y, x) = std::min(up, left);
        unite(parent, up, left);
      } else if (up || left) {
        provisional(y, x) = up ? up : left;
      } else {
        const int id = static_cast<int>(parent.size());
        parent.push_back(id);
        provisional(y, x) = id;
      }
    }
  }

  // Relabel roots in order of first raster appearance.
  Components out;
  out.labels = LabelMap::Zero(h, w);
  std::vector<int> final_id(parent.size(), 0);
  for (Eigen::Index p = 0; p < provisional.size(); ++p) {
    if (!provisional(p))
      continue;
    const int root = find_root(parent, provisional(p));
    int& id = final_id[static_cast<std::size_t>(root)];
    if (!id)
      id = ++out.count;
    out.labels(p) = id;
  }
  return out;
}

std::vector<Eigen::Vector4d> kernel_means(const Components& kernels, const SimilarityField<float>& field)
{
  std::vector<Eigen::Vector4d> sums(static_cast<std::size_t>(kernels.count), Eigen::Vector4d::Zero());
  std::vector<int> counts(static_cast<std::size_t>(kernels.count), 0);
  for (Eigen::Index p = 0; p < kernels.labels.size(); ++p) {
    const int k = kernels.labels(p);
    if (k > 0) {
      sums[static_cast<std::size_t>(k - 1)] += field.col(p).cast<double>();
      ++counts[static_cast<std::size_t>(k - 1)];
    }
  }
  for (std::size_t i = 0; i < sums.size(); ++i)
    if (counts[i] > 0)
      sums[i] /= counts[i];
  return sums;
}

LabelMap aggregate(const Mask& text, const Components& kernels, const SimilarityField<float>& field,
                   float distance)
{
  check_aggregate_inputs(text, kernels, field);
  const int h = static_cast<int>(text.rows()), w = static_cast<int>(text.cols());
  const auto means = kernel_means(kernels, field);
  const double limit = static_cast<double>(distance) * static_cast<double>(distance);

  LabelMap labels = kernels.labels;
  std::vector<Eigen::Index> queue;
  queue.reserve(static_cast<std::size_t>(text.count()));
  for (Eigen::Index p = 0; p < labels.size(); ++p)
    if (labels(p) > 0)
      queue.push_back(p);

  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Eigen::Index q = queue[head];
    const int label = labels(q);
    const int qx = static_cast<int>(q % w), qy = static_cast<int>(q / w);
    const Eigen::Vector4d& center = means[static_cast<std::size_t>(label - 1)];
    for (int dir = 0; dir < 4; ++dir) {
      const int x = qx + kDx[dir], y = qy + kDy[dir];
      if (x < 0 || x >= w || y < 0 || y >= h)
        continue;
      const Eigen::Index p = static_cast<Eigen::Index>(y) * w + x;
      if (labels(p) != 0 || !text(p))
        continue;
      if (squared_distance(field, p, center) < limit) {
        labels(p) = label;
        queue.push_back(p);
      }
    }
  }
  return labels;
}

Polygon trace_contour(std::span<const PixelCoord> pixels, float scale)
{
  Polygon poly;
  if (pixels.empty())
    return poly;
  int xmin = pixels[0].x, xmax = xmin, ymin = pixels[0].y, ymax = ymin;
  for (const auto& p : pixels) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  // Local mask with a one-pixel border so lookups never leave the grid.
  const int w = xmax - xmin + 3, h = ymax - ymin + 3;
  Mask local = Mask::Constant(h, w, false);
  for (const auto& p : pixels)
    local(p.y - ymin + 1, p.x - xmin + 1) = true;
  const auto inside = [&](int x, int y) { return local(y, x); };

  int sx = 0, sy = 0;
  for (Eigen::Index i = 0; i < local.size(); ++i)
    if (local(i)) {
      sx = static_cast<int>(i % w);
      sy = static_cast<int>(i / w);
      break;
    }

  // Headings E, S, W, N (screen coordinates, y down); right turn = +1.
  constexpr int hx[4] = {1, 0, -1, 0};
  constexpr int hy[4] = {0, 1, 0, -1};
  // Pixels ahead-right / ahead-left of corner (cx, cy) for each heading.
  constexpr int rx[4] = {0, -1, -1, 0}, ry[4] = {0, 0, -1, -1};
  constexpr int lx[4] = {0, 0, -1, -1}, ly[4] = {-1, 0, 0, -1};

  // The start corner is the top-left of the first raster pixel; the boundary
  // always arrives there heading north and passes through it only once.
  std::vector<Eigen::Vector2i> corners;
  int cx = sx, cy = sy, heading = 3;
  do {
    corners.emplace_back(cx, cy);
    const bool right_in = inside(cx + rx[heading], cy + ry[heading]);
    const bool left_in = inside(cx + lx[heading], cy + ly[heading]);
    if (!right_in)
      heading = (heading + 1) % 4;
    else if (left_in)
      heading = (heading + 3) % 4;
    cx += hx[heading];
    cy += hy[heading];
  } while (cx != sx || cy != sy);

  // Drop collinear corners.
  std::vector<Eigen::Vector2d> ring;
  const std::size_t n = corners.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2i& a = corners[(i + n - 1) % n];
    const Eigen::Vector2i& b = corners[i];
    const Eigen::Vector2i& c = corners[(i + 1) % n];
    const Eigen::Vector2i d1 = b - a, d2 = c - b;
    if (d1.x() * d2.y() - d1.y() * d2.x() != 0)
      ring.push_back(b.cast<double>());
  }

  // Douglas-Peucker on the closed ring, split at vertex 0 and its farthest vertex.
  const double tol = 0.5;
  const auto seg_dist = [](const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0)
      return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
  };
  std::vector<char> keep(ring.size(), 0);
  const std::function<void(std::size_t, std::size_t)> simplify = [&](std::size_t i, std::size_t j) {
    // Vertices strictly between i and j (mod size).
    const std::size_t m = ring.size();
    double best = -1.0;
    std::size_t best_k = i;
    for (std::size_t k = (i + 1) % m; k != j; k = (k + 1) % m) {
      const double d = seg_dist(ring[k], ring[i], ring[j]);
      if (d > best) {
        best = d;
        best_k = k;
      }
    }
    if (best > tol) {
      keep[best_k] = 1;
      simplify(i, best_k);
      simplify(best_k, j);
    }
  };
  if (ring.size() > 3) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t k = 1; k < ring.size(); ++k) {
      const double d = (ring[k] - ring[0]).norm();
      if (d > far_d) {
        far_d = d;
        far = k;
      }
    }
    keep[0] = keep[far] = 1;
    simplify(0, far);
    simplify(far, 0);
  } else {
    std::fill(keep.begin(), keep.end(), 1);
  }

  for (std::size_t k = 0; k < ring.size(); ++k)
    if (keep[k])
      poly.points.emplace_back(static_cast<float>((ring[k].x() + xmin - 1) * scale),
                               static_cast<float>((ring[k].y() + ymin - 1) * scale));
  return poly;
}

RotatedRect min_area_rect(std::span<const PixelCoord> pixels, float scale)
{
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(pixels.size());
  for (const auto& p : pixels)
    pts.emplace_back((p.x + 0.5) * scale, (p.y + 0.5) * scale);
  return min_area_rect(std::span<const Eigen::Vector2d>(pts));
}

std::vector<TextInstance> extract_instances(const LabelMap& labels, int count, const Plane<float>& text_score,
                                            const PAConfig& cfg)
{
  cfg.validate();
  if (labels.rows() != text_score.rows() || labels.cols() != text_score.cols())
    throw std::invalid_argument("extract_instances: label map and score map differ in size");
  const int w = static_cast<int>(labels.cols());
  std::vector<TextInstance> groups(static_cast<std::size_t>(count));
  std::vector<double> score_sum(static_cast<std::size_t>(count), 0.0);
  for (Eigen::Index p = 0; p < labels.size(); ++p) {
    const int l = labels(p);
    if (l <= 0)
      continue;
    if (l > count)
      throw std::invalid_argument("extract_instances: label exceeds component count");
    auto& g = groups[static_cast<std::size_t>(l - 1)];
    g.pixels.push_back({static_cast<int>(p % w), static_cast<int>(p / w)});
    score_sum[static_cast<std::size_t>(l - 1)] += text_score(p);
  }

  std::vector<TextInstance> out;
  const auto scale = static_cast<float>(cfg.stride);
  for (int l = 1; l <= count; ++l) {
    auto& g = groups[static_cast<std::size_t>(l - 1)];
    if (static_cast<int>(g.pixels.size()) < cfg.min_area)
      continue;
    g.score = static_cast<float>(score_sum[static_cast<std::size_t>(l - 1)] / static_cast<double>(g.pixels.size()));
    if (g.score < cfg.min_score)
      continue;
    g.label = l;
    g.polygon = trace_contour(g.pixels, scale);
    if (cfg.fit_rect)
      g.rect = min_area_rect(std::span<const PixelCoord>(g.pixels), scale);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<TextInstance> post_process(const PredictionMaps<float>& maps, const PAConfig& cfg)
{
  cfg.validate();
  const Binarized bin = binarize(maps, cfg);
  const Components kernels = connected_components(bin.kernel);
  const LabelMap labels = aggregate(bin.text, kernels, maps.similarity, cfg.distance);
  return extract_instances(labels, kernels.count, maps.text, cfg);
}

} // namespace pankit
