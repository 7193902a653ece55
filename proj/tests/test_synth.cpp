#include "pankit/eval.hpp"
#include "pankit/log.hpp"
#include "pankit/pa.hpp"
#include "pankit/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace pankit;

namespace {

SceneConfig small_scene(int n, bool adjacent)
{
  SceneConfig c;
  c.width = c.height = 320;
  c.n_instances = n;
  c.force_adjacent = adjacent;
  return c;
}

} // namespace

TEST_CASE("scenes are deterministic per seed")
{
  const SceneConfig cfg = small_scene(3, true);
  CHECK(scene_to_json(gen_scene(7, cfg)) == scene_to_json(gen_scene(7, cfg)));
  CHECK(scene_to_json(gen_scene(7, cfg)) != scene_to_json(gen_scene(8, cfg)));
}

TEST_CASE("a single-instance scene")
{
  const Scene s = gen_scene(1, small_scene(1, false));
  REQUIRE(s.polygons.size() == 1);
  CHECK_FALSE(s.adjacent);
  CHECK(is_simple(s.polygons[0]));
  for (const auto& p : s.polygons[0].points) {
    CHECK(p.x() >= 0.0f);
    CHECK(p.x() <= 320.0f);
    CHECK(p.y() >= 0.0f);
    CHECK(p.y() <= 320.0f);
  }
}

TEST_CASE("forced adjacency leaves a 1..3 pixel gap and every pair stays apart")
{
  set_warnings_enabled(false);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SceneConfig cfg;
    cfg.n_instances = 2 + static_cast<int>(seed % 3);
    cfg.force_adjacent = true;
    const Scene s = gen_scene(seed, cfg);
    CAPTURE(seed);
    REQUIRE(s.polygons.size() >= 2);
    CHECK(s.adjacent);
    const int g = grid_size(cfg.width, cfg.stride);
    const float scale = 1.0f / static_cast<float>(cfg.stride);
    std::vector<Mask> masks;
    for (const auto& p : s.polygons)
      masks.push_back(rasterize(p, g, g, scale));
    const double first = raster_gap(masks[0], masks[1]);
    CHECK(first >= 1.0);
    CHECK(first <= 3.0);
    for (std::size_t i = 0; i < masks.size(); ++i)
      for (std::size_t j = i + 1; j < masks.size(); ++j)
        CHECK(raster_gap(masks[i], masks[j]) >= 1.0);
  }
  set_warnings_enabled(true);
}

TEST_CASE("curved fraction controls the polygon kind")
{
  SceneConfig cfg = small_scene(3, false);
  cfg.curved_fraction = 1.0;
  for (const auto& p : gen_scene(2, cfg).polygons)
    CHECK(p.points.size() == 14);
  cfg.curved_fraction = 0.0;
  for (const auto& p : gen_scene(2, cfg).polygons)
    CHECK(p.points.size() == 4);
}

TEST_CASE("scene config validation")
{
  SceneConfig cfg;
  cfg.n_instances = 0;
  CHECK_THROWS_AS(gen_scene(1, cfg), std::invalid_argument);
  cfg = {};
  cfg.curved_fraction = 1.5;
  CHECK_THROWS_AS(gen_scene(1, cfg), std::invalid_argument);
  cfg = {};
  cfg.width = 8;
  CHECK_THROWS_AS(gen_scene(1, cfg), std::invalid_argument);
}

TEST_CASE("raster gap counts background pixels between masks")
{
  Mask a = Mask::Constant(5, 10, false), b = a;
  a(2, 1) = true;
  b(2, 5) = true;
  CHECK(raster_gap(a, b) == doctest::Approx(3.0));
  b(2, 2) = true;
  CHECK(raster_gap(a, b) == doctest::Approx(0.0));
  CHECK(std::isinf(raster_gap(a, Mask::Constant(5, 10, false))));
}

TEST_CASE("perfect maps have near-zero loss and stay put")
{
  const Scene s = gen_scene(3, small_scene(3, true));
  const LossConfig cfg;
  TrainOptions opt;
  opt.perfect_init = true;
  const TrainRun run = train_toy(s, 0.7, cfg, 20, 200.0, opt);
  CHECK(run.curve.front().l_agg == 0.0);
  CHECK(run.curve.front().l_dis == 0.0);
  CHECK(run.curve.front().total < 1e-3);
  CHECK(run.curve.back().total <= run.curve.front().total + 1e-6);
}

TEST_CASE("the loss curve has one entry per update plus the start")
{
  const Scene s = gen_scene(4, small_scene(2, false));
  const TrainRun run = train_toy(s, 0.7, LossConfig{}, 5, 1.0);
  REQUIRE(run.curve.size() == 6);
  for (int k = 0; k <= 5; ++k)
    CHECK(run.curve[static_cast<std::size_t>(k)].step == k);
  CHECK_THROWS_AS(train_toy(s, 0.7, LossConfig{}, 3, std::nan("")), std::invalid_argument);
}

TEST_CASE("gradient descent at a small step lowers the loss")
{
  std::vector<double> ratios;
  for (std::uint64_t seed : {11, 12, 13}) {
    const Scene s = gen_scene(seed, small_scene(3, true));
    const TrainRun run = train_toy(s, 0.7, LossConfig{}, 2000, 0.5);
    ratios.push_back(run.curve.back().total / run.curve.front().total);
  }
  std::sort(ratios.begin(), ratios.end());
  CHECK(ratios[1] < 1.0);
}

TEST_CASE("training separates adjacent instances")
{
  const LossConfig cfg;
  const Scene s = gen_scene(21, small_scene(3, true));
  const TrainRun run = train_toy(s, 0.7, cfg, 2000, 200.0);
  CHECK(run.curve.back().total < 0.1 * run.curve.front().total);

  Components kernels;
  kernels.labels = run.gt.kernels;
  kernels.count = run.gt.count;
  const auto means = kernel_means(kernels, run.maps.similarity);
  for (std::size_t i = 0; i < means.size(); ++i)
    for (std::size_t j = i + 1; j < means.size(); ++j)
      CHECK((means[i] - means[j]).norm() >= cfg.delta_dis - 0.1);

  PAConfig pa;
  const auto inst = post_process(run.maps, pa);
  CHECK(static_cast<int>(inst.size()) == run.gt.count);
}
