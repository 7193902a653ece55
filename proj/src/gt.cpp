#include "pankit/gt.hpp"

#include "pankit/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pankit {

void GroundTruth::validate() const
{
  if (kernels.rows() != instances.rows() || kernels.cols() != instances.cols() ||
      ignore.rows() != instances.rows() || ignore.cols() != instances.cols())
    throw std::logic_error("ground truth: map sizes disagree");
  std::vector<int> kernel_pixels(static_cast<std::size_t>(count), 0);
  for (Eigen::Index p = 0; p < kernels.size(); ++p) {
    const int k = kernels(p);
    if (k == 0)
      continue;
    if (k < 0 || k > count)
      throw std::logic_error("ground truth: kernel id out of range");
    if (instances(p) != k)
      throw std::logic_error("ground truth: kernel pixel outside its instance");
    if (!ignore(p))
      ++kernel_pixels[static_cast<std::size_t>(k - 1)];
  }
  for (int i = 0; i < count; ++i)
    if (kernel_pixels[static_cast<std::size_t>(i)] == 0)
      throw std::logic_error("ground truth: instance " + std::to_string(i + 1) + " has no kernel");
}

Mask rasterize(const Polygon& poly, int h, int w, double scale, const Eigen::Vector2d& origin)
{
  Mask mask = Mask::Constant(h, w, false);
  const std::size_t n = poly.points.size();
  if (n < 3 || signed_area(poly) == 0.0) {
    warn("rasterize: degenerate polygon, producing an empty mask");
    return mask;
  }
  std::vector<Eigen::Vector2d> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    pts[i] = (poly.points[i].cast<double>() - origin) * scale;

  double ymin = pts[0].y(), ymax = pts[0].y();
  for (const auto& p : pts) {
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const int row_lo = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int row_hi = std::min(h - 1, static_cast<int>(std::ceil(ymax - 0.5)));

  std::vector<double> xs;
  for (int y = row_lo; y <= row_hi; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % n];
      if ((a.y() <= yc) != (b.y() <= yc))
        xs.push_back(a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centres x + 0.5 in [xa, xb).
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int x1 = std::min(w, static_cast<int>(std::ceil(xs[k + 1] - 0.5)));
      for (int x = x0; x < x1; ++x)
        mask(y, x) = !mask(y, x);
    }
  }
  return mask;
}

Mask rasterize(const Polygon& poly, int h, int w, float scale)
{
  return rasterize(poly, h, w, static_cast<double>(scale), Eigen::Vector2d::Zero());
}

double shrink_offset(const Polygon& poly, double r)
{
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("shrink_offset: ratio must be in (0, 1]");
  const double len = perimeter(poly);
  if (len <= 0.0)
    throw std::invalid_argument("shrink_offset: polygon has zero perimeter");
  return area(poly) * (1.0 - r * r) / len;
}

namespace {

// Felzenszwalb-Huttenlocher 1-D squared distance transform. Infinite
// samples never attain the lower envelope and are skipped.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z)
{
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf)
      continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k])
        break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q)
      ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

Plane<double> squared_distance_to(const Mask& sources)
{
  const int h = static_cast<int>(sources.rows()), w = static_cast<int>(sources.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  Plane<double> g(h, w);
  const int n = std::max(h, w);
  std::vector<double> f, d;
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  f.resize(static_cast<std::size_t>(h));
  d.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y)
      f[static_cast<std::size_t>(y)] = sources(y, x) ? 0.0 : inf;
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y)
      g(y, x) = d[static_cast<std::size_t>(y)];
  }
  f.resize(static_cast<std::size_t>(w));
  d.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x)
      f[static_cast<std::size_t>(x)] = g(y, x);
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x)
      g(y, x) = d[static_cast<std::size_t>(x)];
  }
  return g;
}

} // namespace

Plane<float> distance_to(const Mask& sources)
{
  return squared_distance_to(sources).sqrt().cast<float>();
}

Plane<float> inside_distance(const Mask& mask)
{
  const Eigen::Index h = mask.rows(), w = mask.cols();
  Mask background = Mask::Constant(h + 2, w + 2, true);
  background.block(1, 1, h, w) = !mask;
  const Plane<double> d = squared_distance_to(background).sqrt();
  return d.block(1, 1, h, w).cast<float>();
}

Mask shrink_mask(const Mask& mask, double offset)
{
  if (offset < 0.0)
    throw std::invalid_argument("shrink_mask: offset must be non-negative");
  // The mask boundary lies half a pixel beyond the outermost centres.
  return mask && (inside_distance(mask).cast<double>() - 0.5 > offset);
}

Mask shrink_polygon(const Polygon& poly, const Mask& region, double scale, double offset,
                    const Eigen::Vector2d& origin)
{
  if (offset < 0.0)
    throw std::invalid_argument("shrink_polygon: offset must be non-negative");
  const std::size_t n = poly.points.size();
  std::vector<Eigen::Vector2d> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    pts[i] = (poly.points[i].cast<double>() - origin) * scale;
  const double limit = offset * offset;
  Mask out = Mask::Constant(region.rows(), region.cols(), false);
  for (Eigen::Index y = 0; y < region.rows(); ++y)
    for (Eigen::Index x = 0; x < region.cols(); ++x) {
      if (!region(y, x))
        continue;
      const Eigen::Vector2d c(x + 0.5, y + 0.5);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n && best > limit; ++i) {
        const Eigen::Vector2d a = pts[i], ab = pts[(i + 1) % n] - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((c - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (a + t * ab - c).squaredNorm());
      }
      out(y, x) = best > limit;
    }
  return out;
}

GroundTruth make_ground_truth(const Scene& scene, double r, int stride)
{
  if (stride < 1)
    throw std::invalid_argument("make_ground_truth: stride must be >= 1");
  const int h = grid_size(scene.height, stride), w = grid_size(scene.width, stride);
  const float scale = 1.0f / static_cast<float>(stride);

  GroundTruth gt;
  gt.instances = LabelMap::Zero(h, w);
  gt.kernels = LabelMap::Zero(h, w);
  gt.ignore = Mask::Constant(h, w, false);

  int next = 0;
  for (const auto& poly : scene.polygons) {
    const Mask region = rasterize(poly, h, w, scale);
    if (poly.ignore) {
      gt.ignore = gt.ignore || region;
      continue;
    }
    if (!region.any()) {
      warn("make_ground_truth: text polygon covers no grid pixel; skipped");
      continue;
    }
    ++next;
    const Mask kernel = shrink_polygon(poly, region, scale, shrink_offset(poly, r) / stride);
    gt.instances = region.select(LabelMap::Constant(h, w, next), gt.instances);
    gt.kernels = kernel.select(LabelMap::Constant(h, w, next), gt.kernels);
  }

  // Kernels must sit inside their own (possibly overwritten) instance and
  // outside DO-NOT-CARE regions.
  gt.kernels = (gt.kernels == gt.instances && !gt.ignore).select(gt.kernels, 0);

  std::vector<int> kernel_pixels(static_cast<std::size_t>(next) + 1, 0);
  for (Eigen::Index p = 0; p < gt.kernels.size(); ++p)
    ++kernel_pixels[static_cast<std::size_t>(gt.kernels(p))];

  std::vector<int> remap(static_cast<std::size_t>(next) + 1, 0);
  for (int i = 1; i <= next; ++i) {
    if (kernel_pixels[static_cast<std::size_t>(i)] > 0)
      remap[static_cast<std::size_t>(i)] = ++gt.count;
    else
      warn("make_ground_truth: kernel of instance " + std::to_string(i) +
           " vanished; region moved to the ignore mask");
  }
  for (Eigen::Index p = 0; p < gt.instances.size(); ++p) {
    const int old = gt.instances(p);
    if (old == 0)
      continue;
    const int id = remap[static_cast<std::size_t>(old)];
    if (id == 0)
      gt.ignore(p) = true;
    gt.instances(p) = id;
    gt.kernels(p) = gt.kernels(p) ? id : 0;
  }
  return gt;
}

} // namespace pankit
