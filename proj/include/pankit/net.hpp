#pragma once

#include "pankit/flops.hpp"
#include "pankit/maps.hpp"
#include "pankit/tensor.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pankit {

inline constexpr int kPyramidLevels = 4;
inline constexpr int kHeadOutputs = 2 + kSimilarityDim;

struct NetConfig {
  int cascades = 2;     // number of cascaded FPEMs
  int channels = 128;   // pyramid width after reduction
  int head_hidden = 128;
  int height = 640;
  int width = 640;
  int stem_channels = 32;
  std::array<int, kPyramidLevels> backbone_channels{64, 128, 256, 512};

  void validate() const;
};

/// Four maps at strides 4, 8, 16, 32.
struct FeaturePyramid {
  std::array<Tensor, kPyramidLevels> levels;

  /// Throws unless sizes halve exactly per level. With `equal_channels`,
  /// all levels must also share one channel count.
  void validate(bool equal_channels = true) const;
  bool same_shape(const FeaturePyramid& other) const;
};

struct ParamSpec {
  std::string name;
  Shape shape;
};

/// Every parameter the architecture reads, in a fixed order.
std::vector<ParamSpec> architecture(const NetConfig& config);

/// Named parameter tensors. Normalization layers are stored as one 4 x C
/// tensor with rows (mean, var, gamma, beta).
class Weights {
public:
  void set(const std::string& name, Tensor value) { params_[name] = std::move(value); }
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const std::map<std::string, Tensor>& params() const { return params_; }

  BatchNormParams batch_norm(const std::string& name) const;
  Eigen::VectorXf vector(const std::string& name) const;

  /// Throws unless every architecture parameter is present with the expected shape.
  void validate(const NetConfig& config) const;

  void save(const std::filesystem::path& dir, const NetConfig& config) const;
  static Weights load(const std::filesystem::path& dir, NetConfig* config = nullptr);

private:
  std::map<std::string, Tensor> params_;
};

/// He-normal convolutions, identity normalization, zero biases.
Weights init_weights(const NetConfig& config, std::uint64_t seed);

FeaturePyramid stub_backbone(const Tensor& image, const Weights& weights, const NetConfig& config);
FeaturePyramid reduce(const FeaturePyramid& raw, const Weights& weights);
FeaturePyramid fpem(const FeaturePyramid& pyramid, const Weights& weights, const std::string& prefix);
Tensor ffm(std::span<const FeaturePyramid> pyramids);
PredictionMaps<float> head(const Tensor& fused, const Weights& weights);

PredictionMaps<float> forward(const Tensor& image, const Weights& weights, const NetConfig& config);

// Stage split used by the timing harness: backbone, then everything up to the maps.
FeaturePyramid run_backbone(const Tensor& image, const Weights& weights, const NetConfig& config);
PredictionMaps<float> run_segmentation_head(const FeaturePyramid& raw, const Weights& weights,
                                            const NetConfig& config);

nlohmann::json to_json(const NetConfig& config);
NetConfig net_config_from_json(const nlohmann::json& j);

std::string fpem_prefix(int index); // 1-based: "fpem1", "fpem2", ...

FlopsReport model_flops(const NetConfig& config);
FlopsReport fpem_flops(const NetConfig& config, const std::string& prefix);
/// 128-channel FPN baseline: one 3x3 smoothing conv per pyramid level.
FlopsReport fpn_reference_flops(const NetConfig& config);

} // namespace pankit
