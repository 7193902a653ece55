#include "fixtures.hpp"

#include "pankit/gt.hpp"
#include "pankit/pa.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>

using namespace pankit;
using namespace pankit::testing;

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();

Mask from_rows(std::initializer_list<const char*> rows)
{
  const auto h = static_cast<Eigen::Index>(rows.size());
  const auto w = static_cast<Eigen::Index>(std::strlen(*rows.begin()));
  Mask m(h, w);
  Eigen::Index y = 0;
  for (const char* r : rows) {
    for (Eigen::Index x = 0; x < w; ++x)
      m(y, x) = r[x] == '#';
    ++y;
  }
  return m;
}

std::vector<PixelCoord> pixels_of(const Mask& m)
{
  std::vector<PixelCoord> out;
  for (int y = 0; y < m.rows(); ++y)
    for (int x = 0; x < m.cols(); ++x)
      if (m(y, x))
        out.push_back({x, y});
  return out;
}

double brute_min_rect_area(std::span<const PixelCoord> pixels)
{
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3600; ++k) {
    const double a = k * std::numbers::pi / 2.0 / 3600.0;
    const Eigen::Vector2d u(std::cos(a), std::sin(a)), v(-std::sin(a), std::cos(a));
    double ulo = 1e300, uhi = -1e300, vlo = 1e300, vhi = -1e300;
    for (const auto& p : pixels) {
      const Eigen::Vector2d c(p.x + 0.5, p.y + 0.5);
      ulo = std::min(ulo, u.dot(c));
      uhi = std::max(uhi, u.dot(c));
      vlo = std::min(vlo, v.dot(c));
      vhi = std::max(vhi, v.dot(c));
    }
    best = std::min(best, (uhi - ulo) * (vhi - vlo));
  }
  return best;
}

// Three-row strip: kernel A at x 0..2, kernel B at x 17..19, text everywhere.
struct Strip {
  Mask text = Mask::Constant(3, 20, true);
  Components kernels;
  SimilarityField<float> field = SimilarityField<float>::Zero(kSimilarityDim, 60);
};

Strip bridge_strip()
{
  Strip s;
  Mask k = Mask::Constant(3, 20, false);
  k.block(0, 0, 3, 3).setConstant(true);
  k.block(0, 17, 3, 3).setConstant(true);
  s.kernels = connected_components(k);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 20; ++x) {
      float v = 0.0f;
      if (x >= 3 && x <= 8)
        v = 0.1f;
      else if (x == 9 || x == 10)
        v = 5.0f;
      else if (x >= 11)
        v = 10.0f;
      s.field(0, y * 20 + x) = v;
    }
  return s;
}

} // namespace

TEST_CASE("connected components are 4-connected and numbered in raster order")
{
  const Mask m = from_rows({"##..#",
                            "#...#",
                            "..#..",
                            ".#.##"});
  const Components c = connected_components(m);
  CHECK(c.count == 5);
  CHECK(c.labels(0, 0) == 1);
  CHECK(c.labels(1, 0) == 1);
  CHECK(c.labels(0, 4) == 2);
  CHECK(c.labels(1, 4) == 2);
  CHECK(c.labels(2, 2) == 3);
  CHECK(c.labels(3, 1) == 4);
  CHECK(c.labels(3, 3) == 5);
  CHECK(c.labels(3, 4) == 5);
  CHECK(c.labels(0, 2) == 0);
}

TEST_CASE("a U shape is one component")
{
  const Mask m = from_rows({"#...#",
                            "#...#",
                            "#####"});
  const Components c = connected_components(m);
  CHECK(c.count == 1);
  CHECK((c.labels == 1).count() == m.count());
  CHECK(connected_components(Mask::Constant(4, 4, false)).count == 0);
}

TEST_CASE("kernel means are per-label averages")
{
  Mask k = Mask::Constant(1, 4, false);
  k(0, 0) = k(0, 1) = k(0, 3) = true;
  SimilarityField<float> f = SimilarityField<float>::Zero(kSimilarityDim, 4);
  f(0, 0) = 1.0f;
  f(0, 1) = 3.0f;
  f(2, 3) = -2.0f;
  const auto means = kernel_means(connected_components(k), f);
  REQUIRE(means.size() == 2);
  CHECK(means[0](0) == doctest::Approx(2.0));
  CHECK(means[1](2) == doctest::Approx(-2.0));
}

TEST_CASE("a dissimilar bridge keeps two kernels apart")
{
  const Strip s = bridge_strip();
  const LabelMap l = aggregate(s.text, s.kernels, s.field, 3.0f);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x <= 8; ++x)
      CHECK(l(y, x) == 1);
    CHECK(l(y, 9) == 0);
    CHECK(l(y, 10) == 0);
    for (int x = 11; x < 20; ++x)
      CHECK(l(y, x) == 2);
  }
}

TEST_CASE("growth only continues through accepted pixels")
{
  Strip s = bridge_strip();
  // same as the bridge, but the far side is similar to kernel A
  for (int y = 0; y < 3; ++y)
    for (int x = 11; x < 17; ++x)
      s.field(0, y * 20 + x) = 0.0f;
  const LabelMap l = aggregate(s.text, s.kernels, s.field, 3.0f);
  CHECK(l(1, 12) == 0);
  CHECK(l(1, 8) == 1);
}

TEST_CASE("with an infinite threshold fronts meet halfway")
{
  const Strip s = bridge_strip();
  const LabelMap l = aggregate(s.text, s.kernels, s.field, kInf);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 20; ++x)
      CHECK(l(y, x) == (x <= 9 ? 1 : 2));
}

TEST_CASE("growth never leaves the text mask and kernels keep their labels")
{
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PaCase c = make_pa_case(seed);
    const LabelMap l = aggregate(c.text, c.kernels, c.field, 2.0f);
    CAPTURE(seed);
    CHECK(((l == 0) || c.text).all());
    CHECK(((c.kernels.labels == 0) || (l == c.kernels.labels)).all());
  }
}

TEST_CASE("queue aggregation equals the generation-by-generation reference")
{
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    for (float d : {0.5f, 2.0f, 6.0f, kInf}) {
      const PaCase c = make_pa_case(seed);
      CAPTURE(seed);
      CAPTURE(d);
      CHECK((aggregate(c.text, c.kernels, c.field, d) == aggregate_oracle(c.text, c.kernels, c.field, d)).all());
    }
}

TEST_CASE("aggregation rejects mismatched inputs")
{
  const Strip s = bridge_strip();
  CHECK_THROWS_AS(aggregate(Mask::Constant(3, 19, true), s.kernels, s.field, 1.0f), std::invalid_argument);
}

TEST_CASE("contour of a square block has four corners")
{
  Mask m = Mask::Constant(5, 5, false);
  m.block(1, 1, 3, 3).setConstant(true);
  const auto px = pixels_of(m);
  const Polygon p = trace_contour(px, 4.0f);
  CHECK(p.points.size() == 4);
  CHECK(area(p) == doctest::Approx(144.0));
}

TEST_CASE("contour of an L shape has six corners")
{
  const Mask m = from_rows({"#...",
                            "#...",
                            "####"});
  const Polygon p = trace_contour(pixels_of(m), 1.0f);
  CHECK(p.points.size() == 6);
  CHECK(area(p) == doctest::Approx(6.0));
  CHECK(signed_area(p) != 0.0);
}

TEST_CASE("contours cover their pixel centres")
{
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const PaCase c = make_pa_case(static_cast<std::uint64_t>(trial), 24);
    const Components comps = connected_components(c.text);
    std::uniform_int_distribution<int> pick(1, comps.count);
    const int id = pick(rng);
    const Mask blob = comps.labels == id;
    const Polygon p = trace_contour(pixels_of(blob), 4.0f);
    const Mask covered = rasterize(p, 24, 24, 0.25f);
    CAPTURE(trial);
    CHECK((!blob || covered).all());
  }
}

TEST_CASE("minimum-area rectangle matches a fine angular search")
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PaCase c = make_pa_case(seed, 20);
    const Components comps = connected_components(c.text);
    const auto px = pixels_of(comps.labels == 1);
    const RotatedRect r = min_area_rect(px, 1.0f);
    const double brute = brute_min_rect_area(px);
    CAPTURE(seed);
    CHECK(r.area() <= brute + 1e-6);
    CHECK(r.area() >= brute * (1.0 - 1e-4) - 1e-9);
    CHECK(r.angle_deg >= 0.0);
    CHECK(r.angle_deg < 90.0);
  }
}

TEST_CASE("minimum-area rectangle of a rotated bar")
{
  // 45 degree diagonal run of pixels, 10 long
  std::vector<PixelCoord> px;
  for (int i = 0; i < 10; ++i)
    px.push_back({i, i});
  const RotatedRect r = min_area_rect(px, 2.0f);
  CHECK(r.area() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::max(r.width, r.height) == doctest::Approx(2.0 * 9.0 * std::sqrt(2.0)));
  CHECK(r.center.x() == doctest::Approx(2.0 * 5.0));
}

TEST_CASE("binarize gates the kernel by the text map")
{
  PredictionMaps<float> m(1, 3);
  m.text << 0.6f, 0.4f, 0.5f;
  m.kernel << 0.9f, 0.9f, 0.1f;
  const Binarized b = binarize(m, PAConfig{});
  CHECK(b.text(0, 0));
  CHECK_FALSE(b.text(0, 1));
  CHECK_FALSE(b.text(0, 2));
  CHECK(b.kernel(0, 0));
  CHECK_FALSE(b.kernel(0, 1));
}

TEST_CASE("post-processing separates two touching words")
{
  PredictionMaps<float> m(20, 40);
  m.text.block(4, 2, 8, 36).setConstant(0.95f);
  m.kernel.block(6, 4, 4, 12).setConstant(0.95f);
  m.kernel.block(6, 24, 4, 12).setConstant(0.95f);
  for (int y = 0; y < 20; ++y)
    for (int x = 20; x < 40; ++x)
      m.similarity(1, y * 40 + x) = 9.0f;
  PAConfig cfg;
  const auto inst = post_process(m, cfg);
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].pixels.size() == 8 * 18);
  CHECK(inst[1].pixels.size() == 8 * 18);
  CHECK(inst[0].score == doctest::Approx(0.95f));
  REQUIRE(inst[0].rect.has_value());
  CHECK(inst[0].rect->area() == doctest::Approx(4.0 * 17 * 4.0 * 7));
  CHECK(area(inst[0].polygon) == doctest::Approx(16.0 * 8 * 18));

  cfg.min_score = 0.99f;
  CHECK(post_process(m, cfg).empty());
  cfg = {};
  cfg.min_area = 8 * 18 + 1;
  CHECK(post_process(m, cfg).empty());
  cfg = {};
  cfg.fit_rect = false;
  CHECK_FALSE(post_process(m, cfg)[0].rect.has_value());
}

TEST_CASE("config validation")
{
  PAConfig c;
  c.distance = 0.0f;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.text_thresh = 1.0f;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.distance = kInf;
  CHECK_NOTHROW(c.validate());
}
