#pragma once

#include "pankit/gt.hpp"
#include "pankit/loss.hpp"
#include "pankit/maps.hpp"
#include "pankit/scene.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pankit {

struct SceneConfig {
  int width = 640;
  int height = 640;
  int n_instances = 3;
  double curved_fraction = 0.5;
  bool force_adjacent = false;
  int stride = 4;          // grid on which gaps are measured
  int max_attempts = 400;  // per instance
};

/// Deterministic synthetic scene: rotated quadrilaterals and sine-displaced
/// 14-point ribbons. Every pair of instances is separated by a raster gap of
/// at least 1 grid pixel; with `force_adjacent` the first pair has a gap in
/// [1, 3].
Scene gen_scene(std::uint64_t seed, const SceneConfig& cfg);

/// Background pixels between two masks along the shortest path: the minimal
/// pixel-centre distance minus one. Infinity if either mask is empty.
double raster_gap(const Mask& a, const Mask& b);

struct LossRecord {
  int step = 0;
  double total = 0, l_tex = 0, l_ker = 0, l_agg = 0, l_dis = 0;
};

struct TrainRun {
  int steps = 0;
  double lr = 0;
  std::vector<LossRecord> curve; // entry k: loss after k updates
  PredictionMaps<float> maps;
  GroundTruth gt;
};

struct TrainOptions {
  int stride = 4;
  double noise_scale = 0.1;
  std::uint64_t noise_seed = 0;
  /// Start from maps consistent with the ground truth instead of the
  /// uninformed initialization.
  bool perfect_init = false;
};

/// Maps that already satisfy every loss term for `gt`: binary text/kernel
/// scores and per-instance constant similarity vectors spaced beyond `spacing`.
PredictionMaps<float> perfect_maps(const GroundTruth& gt, float spacing);

/// Perfect maps of a generated scene blurred towards 0.5 and perturbed by
/// Gaussian noise of the given scale; input for timing post-processing.
PredictionMaps<float> noisy_scene_maps(std::uint64_t seed, const SceneConfig& cfg, float noise = 0.05f);

/// Plain gradient descent on the prediction maps themselves under the full
/// objective; scores are clamped to [1e-4, 1 - 1e-4] after every step and the
/// OHEM selection is recomputed each step. Throws std::runtime_error naming
/// the step when the loss turns non-finite.
TrainRun train_toy(const Scene& scene, double r, const LossConfig& cfg, int steps, double lr,
                   const TrainOptions& options = {});

} // namespace pankit
