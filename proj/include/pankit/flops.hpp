#pragma once

#include "pankit/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pankit {

enum class LayerKind { conv, batch_norm, relu, add, upsample, concat, sigmoid };

/// Shape-only description of one layer application.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::conv;
  Shape input;              // C_in x H x W
  int out_channels = 0;     // conv only
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int groups = 1;
  int factor = 1;           // upsample only
  int extra_channels = 0;   // concat: channels appended to the input

  Shape output_shape() const;
};

LayerDesc conv_desc(std::string name, const Shape& input, int out_channels, int kernel, int stride,
                    int padding, int groups = 1);

/// Multiply-accumulate count. Convolutions count H'.W'.C_out.(C_in/groups).k^2;
/// normalization, activations, additions, resampling and concatenation are free.
std::uint64_t flops_of(const LayerDesc& layer);

struct FlopsEntry {
  std::string name;
  std::uint64_t macs = 0;
  Shape output;
};

class FlopsReport {
public:
  void add(const LayerDesc& layer);
  void append(const FlopsReport& other);

  const std::vector<FlopsEntry>& entries() const { return entries_; }
  std::uint64_t total() const;
  /// Sum over entries whose name starts with `prefix`.
  std::uint64_t total_with_prefix(const std::string& prefix) const;

private:
  std::vector<FlopsEntry> entries_;
};

} // namespace pankit
