#include "pankit/synth.hpp"

#include "pankit/log.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace pankit {

namespace {

using Vec2d = Eigen::Vector2d;

struct Stroke {
  Vec2d center;
  Vec2d axis;      // unit direction along the text line
  double length;
  double thickness;
  bool curved;
  double amplitude;
  double frequency;
  double phase;
};

Vec2d normal_of(const Vec2d& axis) { return {-axis.y(), axis.x()}; }

Polygon build_polygon(const Stroke& s)
{
  Polygon poly;
  const Vec2d n = normal_of(s.axis);
  if (!s.curved) {
    const Vec2d hu = 0.5 * s.length * s.axis, hv = 0.5 * s.thickness * n;
    const std::array<Vec2d, 4> corners{s.center - hu - hv, s.center + hu - hv, s.center + hu + hv, s.center - hu + hv};
    for (const Vec2d& c : corners)
      poly.points.emplace_back(static_cast<float>(c.x()), static_cast<float>(c.y()));
    return poly;
  }
  // Ribbon: 7 samples along a sine-displaced centre line, offset on both sides.
  constexpr int kSamples = 7;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Vec2d> top, bottom;
  for (int i = 0; i < kSamples; ++i) {
    const double t = static_cast<double>(i) / (kSamples - 1);
    const double arg = two_pi * s.frequency * t + s.phase;
    const Vec2d c = s.center + (t - 0.5) * s.length * s.axis + s.amplitude * std::sin(arg) * n;
    const Vec2d tangent = (s.length * s.axis + s.amplitude * two_pi * s.frequency * std::cos(arg) * n).normalized();
    const Vec2d local_n = normal_of(tangent);
    top.push_back(c - 0.5 * s.thickness * local_n);
    bottom.push_back(c + 0.5 * s.thickness * local_n);
  }
  for (const auto& p : top)
    poly.points.emplace_back(static_cast<float>(p.x()), static_cast<float>(p.y()));
  for (auto it = bottom.rbegin(); it != bottom.rend(); ++it)
    poly.points.emplace_back(static_cast<float>(it->x()), static_cast<float>(it->y()));
  return poly;
}

bool inside_canvas(const Polygon& poly, const SceneConfig& cfg)
{
  for (const auto& p : poly.points)
    if (p.x() < 1.0f || p.y() < 1.0f || p.x() > static_cast<float>(cfg.width - 1) ||
        p.y() > static_cast<float>(cfg.height - 1))
      return false;
  return true;
}

class ShapeSampler {
public:
  ShapeSampler(std::uint64_t seed, const SceneConfig& cfg) : rng_(seed), cfg_(cfg) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Stroke sample(bool curved)
  {
    const double size = std::min(cfg_.width, cfg_.height);
    Stroke s;
    s.curved = curved;
    s.length = uniform(0.3, 0.55) * size;
    s.thickness = uniform(0.05, 0.08) * size;
    const double angle = uniform(-0.5, 0.5); // radians
    s.axis = Vec2d(std::cos(angle), std::sin(angle));
    s.center = Vec2d(uniform(0.1, 0.9) * cfg_.width, uniform(0.1, 0.9) * cfg_.height);
    s.amplitude = curved ? uniform(0.06, 0.14) * s.length : 0.0;
    s.frequency = curved ? uniform(0.4, 0.9) : 0.0;
    s.phase = curved ? uniform(0.0, 2.0 * std::numbers::pi) : 0.0;
    return s;
  }

  bool coin(double p) { return uniform(0.0, 1.0) < p; }

private:
  std::mt19937_64 rng_;
  SceneConfig cfg_;
};

} // namespace

double raster_gap(const Mask& a, const Mask& b)
{
  if (!a.any() || !b.any())
    return std::numeric_limits<double>::infinity();
  const Plane<float> d = distance_to(a);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < b.size(); ++p)
    if (b(p))
      best = std::min(best, static_cast<double>(d(p)));
  return best - 1.0;
}

Scene gen_scene(std::uint64_t seed, const SceneConfig& cfg)
{
  if (cfg.width < 64 || cfg.height < 64)
    throw std::invalid_argument("gen_scene: canvas must be at least 64x64");
  if (cfg.n_instances < 1)
    throw std::invalid_argument("gen_scene: need at least one instance");
  if (cfg.stride < 1)
    throw std::invalid_argument("gen_scene: stride must be >= 1");
  if (!(cfg.curved_fraction >= 0.0 && cfg.curved_fraction <= 1.0))
    throw std::invalid_argument("gen_scene: curved fraction must be in [0, 1]");

  ShapeSampler sampler(seed, cfg);
  Scene scene;
  scene.seed = seed;
  scene.width = cfg.width;
  scene.height = cfg.height;
  const int gh = grid_size(cfg.height, cfg.stride), gw = grid_size(cfg.width, cfg.stride);
  const float scale = 1.0f / static_cast<float>(cfg.stride);
  std::vector<Mask> masks;

  const auto try_accept = [&](const Polygon& candidate) -> std::optional<Mask> {
    if (!inside_canvas(candidate, cfg))
      return std::nullopt;
    Polygon poly;
    try {
      poly = normalized(candidate);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
    Mask m = rasterize(poly, gh, gw, scale);
    if (m.count() < 16)
      return std::nullopt;
    for (const auto& other : masks)
      if (raster_gap(m, other) < 1.0)
        return std::nullopt;
    return m;
  };
  const auto commit = [&](const Polygon& candidate, Mask m) {
    scene.polygons.push_back(normalized(candidate));
    masks.push_back(std::move(m));
  };

  int placed = 0;
  if (cfg.force_adjacent && cfg.n_instances >= 2) {
    bool done = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !done; ++attempt) {
      const Stroke first = sampler.sample(sampler.coin(cfg.curved_fraction));
      const Polygon p1 = build_polygon(first);
      auto m1 = try_accept(p1);
      if (!m1)
        continue;
      const Vec2d n = normal_of(first.axis);
      // Offsets along the normal; keep the first that leaves a 1..3 pixel gap.
      for (double g = 1.5; g <= 3.5 && !done; g += 0.25) {
        Stroke second = first;
        second.center += (first.thickness + g * cfg.stride) * n;
        const Polygon p2 = build_polygon(second);
        if (!inside_canvas(p2, cfg))
          break;
        Polygon q2;
        try {
          q2 = normalized(p2);
        } catch (const std::invalid_argument&) {
          continue;
        }
        Mask m2 = rasterize(q2, gh, gw, scale);
        const double gap = raster_gap(*m1, m2);
        if (gap >= 1.0 && gap <= 3.0 && m2.count() >= 16) {
          commit(p1, std::move(*m1));
          commit(p2, std::move(m2));
          done = true;
        }
      }
    }
    if (done) {
      scene.adjacent = true;
      placed = 2;
    } else {
      warn("gen_scene: could not place an adjacent pair for seed " + std::to_string(seed));
    }
  }

  for (; placed < cfg.n_instances; ++placed) {
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !ok; ++attempt) {
      const Polygon p = build_polygon(sampler.sample(sampler.coin(cfg.curved_fraction)));
      if (auto m = try_accept(p)) {
        commit(p, std::move(*m));
        ok = true;
      }
    }
    if (!ok) {
      warn("gen_scene: placed " + std::to_string(scene.polygons.size()) + " of " +
           std::to_string(cfg.n_instances) + " instances for seed " + std::to_string(seed));
      break;
    }
  }
  return scene;
}

PredictionMaps<float> perfect_maps(const GroundTruth& gt, float spacing)
{
  PredictionMaps<float> maps(gt.height(), gt.width());
  maps.text = gt.text_mask().cast<float>();
  maps.kernel = gt.kernel_mask().cast<float>();
  for (Eigen::Index p = 0; p < gt.instances.size(); ++p)
    if (const int i = gt.instances(p); i > 0)
      maps.similarity(0, p) = spacing * static_cast<float>(i);
  return maps;
}

PredictionMaps<float> noisy_scene_maps(std::uint64_t seed, const SceneConfig& cfg, float noise)
{
  const Scene scene = gen_scene(seed, cfg);
  auto maps = perfect_maps(make_ground_truth(scene, 0.7, cfg.stride), 4.0f);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, noise);
  for (Eigen::Index p = 0; p < maps.text.size(); ++p) {
    maps.text(p) = std::clamp(maps.text(p) * 0.9f + 0.05f + n(rng), 0.0f, 1.0f);
    maps.kernel(p) = std::clamp(maps.kernel(p) * 0.9f + 0.05f + n(rng), 0.0f, 1.0f);
  }
  for (Eigen::Index k = 0; k < maps.similarity.size(); ++k)
    maps.similarity.data()[k] += n(rng);
  return maps;
}

TrainRun train_toy(const Scene& scene, double r, const LossConfig& cfg, int steps, double lr,
                   const TrainOptions& options)
{
  if (steps < 0)
    throw std::invalid_argument("train_toy: steps must be >= 0");
  if (!(lr > 0.0 && std::isfinite(lr)))
    throw std::invalid_argument("train_toy: learning rate must be positive and finite");
  cfg.validate();
  TrainRun run;
  run.steps = steps;
  run.lr = lr;
  run.gt = make_ground_truth(scene, r, options.stride);
  const int h = run.gt.height(), w = run.gt.width();

  if (options.perfect_init) {
    run.maps = perfect_maps(run.gt, static_cast<float>(cfg.delta_dis) + 0.5f);
  } else {
    run.maps = PredictionMaps<float>(h, w);
    run.maps.text.setConstant(0.5f);
    run.maps.kernel.setConstant(0.5f);
    std::mt19937_64 rng(options.noise_seed ? options.noise_seed : scene.seed);
    std::normal_distribution<float> noise(0.0f, static_cast<float>(options.noise_scale));
    for (Eigen::Index i = 0; i < run.maps.similarity.size(); ++i)
      run.maps.similarity.data()[i] = noise(rng);
  }

  constexpr float lo = 1e-4f, hi = 1.0f - 1e-4f;
  const auto step_lr = static_cast<float>(lr);
  for (int step = 0;; ++step) {
    const auto loss = total_loss<float>(run.maps, run.gt, cfg);
    if (!std::isfinite(loss.total))
      throw std::runtime_error("train_toy: non-finite loss at step " + std::to_string(step));
    run.curve.push_back({step, loss.total, loss.l_tex, loss.l_ker, loss.l_agg, loss.l_dis});
    if (step == steps)
      break;
    run.maps.text = (run.maps.text - step_lr * loss.d_text).cwiseMax(lo).cwiseMin(hi);
    run.maps.kernel = (run.maps.kernel - step_lr * loss.d_kernel).cwiseMax(lo).cwiseMin(hi);
    run.maps.similarity -= step_lr * loss.d_similarity;
  }
  return run;
}

} // namespace pankit
