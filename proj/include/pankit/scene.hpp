#pragma once

#include "pankit/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pankit {

/// A canvas of annotated polygons, either synthetic or loaded from disk.
struct Scene {
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  std::vector<Polygon> polygons;
  bool adjacent = false; // generator forced at least one near-touching pair

  std::size_t text_count() const;
};

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

/// One instance per line: comma-separated integer x,y pairs (14 pairs for
/// CTW1500). A trailing "###" field marks a DO-NOT-CARE region.
/// Throws std::runtime_error naming the first malformed line.
std::vector<Polygon> parse_ctw1500(const std::string& text);

/// Reads .txt (CTW1500 style) or .json annotations. Text files carry no
/// canvas size; `width`/`height` fall back to the supplied defaults.
Scene load_annotations(const std::filesystem::path& path, int default_width, int default_height);

} // namespace pankit
