#pragma once

#include "pankit/eval.hpp"
#include "pankit/gt.hpp"
#include "pankit/loss.hpp"
#include "pankit/pa.hpp"
#include "pankit/synth.hpp"
#include "pankit/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pankit {

using json = nlohmann::json;

json polygon_to_json(const Polygon& poly);
Polygon polygon_from_json(const json& j);

/// {"instances": [{"polygon": [[x, y], ...], "rect": {...}, "score": s}, ...]}
json detections_to_json(std::span<const TextInstance> instances);
std::vector<Detection> detections_from_json(const json& j);

json eval_to_json(const EvalReport& report);

/// What produced a set of artifacts: effective configuration, seed, paths
/// and per-stage wall-clock.
struct RunManifest {
  std::string subcommand;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, double> stage_ms;
  std::vector<std::string> skipped; // inputs rejected with a reason

  json to_json() const;
};

json to_json(const PAConfig& cfg);
json to_json(const LossConfig& cfg);
json to_json(const SceneConfig& cfg);

/// 3 x h x w tensor: instance ids, kernel ids, ignore flags.
Tensor gt_to_tensor(const GroundTruth& gt);
GroundTruth gt_from_tensor(const Tensor& t);

/// step,total,l_tex,l_ker,l_agg,l_dis with a header row.
std::string loss_csv(std::span<const LossRecord> curve);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const json& j);

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h), pixels(std::size_t(w) * h * 3, fill) {}

  std::uint8_t* at(int x, int y) { return &pixels[(std::size_t(y) * width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const { return &pixels[(std::size_t(y) * width + x) * 3]; }
};

void write_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png(const std::filesystem::path& path);

/// Binary (P5) or ASCII (P2) graymap, maxval up to 65535, scaled to [0, 1].
Plane<float> read_pgm(const std::filesystem::path& path);

/// PGM or PNG file as a 3 x H x W tensor in [0, 1] (gray replicated).
Tensor read_image(const std::filesystem::path& path);

} // namespace pankit
