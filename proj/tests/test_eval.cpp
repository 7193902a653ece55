#include "pankit/eval.hpp"

#include <doctest.h>

#include <vector>

using namespace pankit;

namespace {

Polygon poly(std::initializer_list<Point> pts, bool ignore = false)
{
  Polygon p;
  p.points = pts;
  p.ignore = ignore;
  return p;
}

Polygon box(float x0, float y0, float x1, float y1, bool ignore = false)
{
  return poly({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, ignore);
}

} // namespace

TEST_CASE("IoU against an independent polygon library")
{
  // exact values from polygon clipping
  CHECK(polygon_iou(box(0, 0, 10, 10), box(5, 0, 15, 10)) == doctest::Approx(1.0 / 3.0).epsilon(5e-3));
  CHECK(polygon_iou(box(0, 0, 20, 10), poly({{5, -5}, {25, 5}, {15, 15}, {-5, 5}})) ==
        doctest::Approx(0.6).epsilon(5e-3));
  CHECK(polygon_iou(poly({{0, 0}, {30, 0}, {15, 26}}), poly({{10, 5}, {40, 5}, {25, 31}})) ==
        doctest::Approx(0.19437559814).epsilon(1e-2));
}

TEST_CASE("IoU edge cases")
{
  CHECK(polygon_iou(box(0, 0, 10, 10), box(0, 0, 10, 10)) == doctest::Approx(1.0));
  CHECK(polygon_iou(box(0, 0, 10, 10), box(20, 20, 30, 30)) == 0.0);
  CHECK(polygon_iou(Polygon{}, Polygon{}) == 0.0);
  CHECK(polygon_iou(box(0, 0, 4, 4), box(1, 1, 3, 3)) == doctest::Approx(0.25).epsilon(1e-2));
  CHECK_THROWS_AS(polygon_iou(box(0, 0, 1, 1), box(0, 0, 1, 1), 0), std::invalid_argument);
}

TEST_CASE("IoU is symmetric")
{
  const Polygon a = poly({{0, 0}, {30, 0}, {15, 26}}), b = poly({{10, 5}, {40, 5}, {25, 31}});
  CHECK(polygon_iou(a, b) == doctest::Approx(polygon_iou(b, a)));
}

TEST_CASE("half the detections right, half the ground truth found")
{
  const std::vector<Detection> dets = {{box(0, 0, 10, 10), 0.9f}, {box(50, 50, 60, 60), 0.8f}};
  const std::vector<Polygon> gts = {box(0, 0, 10, 10), box(100, 0, 110, 10)};
  const EvalReport r = match(dets, gts);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(0.5));
  CHECK(r.fmeasure == doctest::Approx(0.5));
  REQUIRE(r.matches.size() == 1);
  CHECK(r.matches[0].det == 0);
  CHECK(r.matches[0].gt == 0);
}

TEST_CASE("matching is one-to-one and greedy by score")
{
  // two detections on one ground truth: the higher score wins, the other is FP
  const std::vector<Detection> dets = {{box(0, 0, 10, 9), 0.5f}, {box(0, 0, 10, 10), 0.9f}};
  const std::vector<Polygon> gts = {box(0, 0, 10, 10)};
  const EvalReport r = match(dets, gts);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.matches[0].det == 1);
}

TEST_CASE("IoU threshold is inclusive")
{
  const std::vector<Detection> dets = {{box(0, 0, 10, 10), 1.0f}};
  const std::vector<Polygon> gts = {box(5, 0, 15, 10)};
  CHECK(match(dets, gts, 0.5).tp == 0);
  CHECK(match(dets, gts, 0.3).tp == 1);
}

TEST_CASE("detections on DO-NOT-CARE regions are neither TP nor FP")
{
  const std::vector<Detection> dets = {{box(0, 0, 10, 10), 0.9f}, {box(20, 0, 30, 10), 0.9f}};
  const std::vector<Polygon> gts = {box(0, 0, 10, 10), box(20, 0, 30, 10, true)};
  const EvalReport r = match(dets, gts);
  CHECK(r.tp == 1);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
  CHECK(r.ignored == 1);
  CHECK(r.fmeasure == doctest::Approx(1.0));
  // an unmatched ignore region is not a miss
  const std::vector<Detection> none;
  CHECK(match(none, gts).fn == 1);
}

TEST_CASE("empty inputs")
{
  const std::vector<Detection> none;
  const std::vector<Polygon> no_gt;
  const EvalReport r = match(none, no_gt);
  CHECK(r.tp + r.fp + r.fn == 0);
  CHECK(r.fmeasure == 0.0);
  const std::vector<Detection> one = {{box(0, 0, 1, 1), 1.0f}};
  CHECK(match(one, no_gt).fp == 1);
}

TEST_CASE("summaries micro-average over images")
{
  EvalReport a, b;
  a.tp = 3;
  a.fp = 1;
  b.tp = 1;
  b.fn = 3;
  a.finalize();
  b.finalize();
  const std::vector<EvalReport> both = {a, b};
  const EvalReport s = summarize(both);
  CHECK(s.tp == 4);
  CHECK(s.precision == doctest::Approx(0.8));
  CHECK(s.recall == doctest::Approx(4.0 / 7.0));
  CHECK(s.fmeasure == doctest::Approx(2 * 0.8 * (4.0 / 7.0) / (0.8 + 4.0 / 7.0)));
  CHECK_THROWS_AS(summarize(std::vector<EvalReport>{}), std::invalid_argument);
}
