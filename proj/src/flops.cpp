#include "pankit/flops.hpp"

#include <numeric>

namespace pankit {

Shape LayerDesc::output_shape() const
{
  switch (kind) {
  case LayerKind::conv: {
    const int oh = (input.at(1) + 2 * padding - kernel) / stride + 1;
    const int ow = (input.at(2) + 2 * padding - kernel) / stride + 1;
    return {out_channels, oh, ow};
  }
  case LayerKind::upsample:
    return {input.at(0), input.at(1) * factor, input.at(2) * factor};
  case LayerKind::concat:
    return {input.at(0) + extra_channels, input.at(1), input.at(2)};
  default:
    return input;
  }
}

LayerDesc conv_desc(std::string name, const Shape& input, int out_channels, int kernel, int stride,
                    int padding, int groups)
{
  LayerDesc d;
  d.name = std::move(name);
  d.kind = LayerKind::conv;
  d.input = input;
  d.out_channels = out_channels;
  d.kernel = kernel;
  d.stride = stride;
  d.padding = padding;
  d.groups = groups;
  return d;
}

std::uint64_t flops_of(const LayerDesc& layer)
{
  if (layer.kind != LayerKind::conv)
    return 0;
  const Shape out = layer.output_shape();
  const auto k2 = static_cast<std::uint64_t>(layer.kernel) * static_cast<std::uint64_t>(layer.kernel);
  return static_cast<std::uint64_t>(out[1]) * static_cast<std::uint64_t>(out[2]) *
         static_cast<std::uint64_t>(layer.out_channels) *
         static_cast<std::uint64_t>(layer.input.at(0) / layer.groups) * k2;
}

void FlopsReport::add(const LayerDesc& layer)
{
  entries_.push_back({layer.name, flops_of(layer), layer.output_shape()});
}

void FlopsReport::append(const FlopsReport& other)
{
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

std::uint64_t FlopsReport::total() const
{
  return std::accumulate(entries_.begin(), entries_.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const FlopsEntry& e) { return acc + e.macs; });
}

std::uint64_t FlopsReport::total_with_prefix(const std::string& prefix) const
{
  std::uint64_t acc = 0;
  for (const auto& e : entries_)
    if (e.name.starts_with(prefix))
      acc += e.macs;
  return acc;
}

} // namespace pankit
