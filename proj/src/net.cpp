#include "pankit/net.hpp"

#include "pankit/tensor_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>

namespace pankit {

using json = nlohmann::json;

namespace {

const char* kUpNames[] = {"up.s4", "up.s8", "up.s16"};
const char* kDownNames[] = {"", "down.s8", "down.s16", "down.s32"};

Tensor separable(const Tensor& x, const Weights& w, const std::string& name, int stride)
{
  Tensor dw = conv2d(x, w.get(name + ".dw.weight"), std::nullopt, stride, 1, x.channels());
  Tensor pw = conv2d(dw, w.get(name + ".pw.weight"), std::nullopt, 1, 0, 1);
  return batch_norm_relu(pw, w.batch_norm(name + ".bn"), true);
}

Tensor conv_bn_relu(const Tensor& x, const Weights& w, const std::string& name, int stride, int padding)
{
  const Tensor& k = w.get(name + ".weight");
  Tensor y = conv2d(x, k, std::nullopt, stride, padding, 1);
  return batch_norm_relu(y, w.batch_norm(name + ".bn"), true);
}

void add_conv(std::vector<ParamSpec>& specs, const std::string& name, int cout, int cin, int k)
{
  specs.push_back({name + ".weight", {cout, cin, k, k}});
}

void add_bn(std::vector<ParamSpec>& specs, const std::string& name, int c)
{
  specs.push_back({name + ".bn", {4, c}});
}

int level_size(int full, int level) { return full / (4 << level); }

} // namespace

void NetConfig::validate() const
{
  if (cascades < 0)
    throw std::invalid_argument("NetConfig: cascade count must be >= 0");
  if (channels < 1 || head_hidden < 1 || stem_channels < 1)
    throw std::invalid_argument("NetConfig: channel counts must be >= 1");
  for (int c : backbone_channels)
    if (c < 1)
      throw std::invalid_argument("NetConfig: backbone channel counts must be >= 1");
  if (height < 32 || width < 32 || height % 32 != 0 || width % 32 != 0)
    throw std::invalid_argument("NetConfig: input " + std::to_string(height) + "x" +
                                std::to_string(width) + " must be divisible by 32");
}

void FeaturePyramid::validate(bool equal_channels) const
{
  for (int l = 0; l < kPyramidLevels; ++l) {
    if (levels[l].ndim() != 3)
      throw std::invalid_argument("pyramid level " + std::to_string(l) + " is not C x H x W");
    if (equal_channels && levels[l].channels() != levels[0].channels())
      throw std::invalid_argument("pyramid levels have different channel counts");
    if (l > 0 && (levels[l - 1].height() != 2 * levels[l].height() ||
                  levels[l - 1].width() != 2 * levels[l].width()))
      throw std::invalid_argument("pyramid level " + std::to_string(l) + " " +
                                  to_string(levels[l].shape()) + " is not half of " +
                                  to_string(levels[l - 1].shape()));
  }
}

bool FeaturePyramid::same_shape(const FeaturePyramid& other) const
{
  for (int l = 0; l < kPyramidLevels; ++l)
    if (levels[l].shape() != other.levels[l].shape())
      return false;
  return true;
}

std::string fpem_prefix(int index) { return "fpem" + std::to_string(index); }

std::vector<ParamSpec> architecture(const NetConfig& config)
{
  config.validate();
  std::vector<ParamSpec> specs;
  const auto& bc = config.backbone_channels;

  add_conv(specs, "backbone.stem", config.stem_channels, 3, 3);
  add_bn(specs, "backbone.stem", config.stem_channels);
  int cin = config.stem_channels;
  for (int l = 0; l < kPyramidLevels; ++l) {
    const std::string name = "backbone.stage" + std::to_string(l + 1);
    add_conv(specs, name, bc[l], cin, 3);
    add_bn(specs, name, bc[l]);
    cin = bc[l];
  }

  const int c = config.channels;
  for (int l = 0; l < kPyramidLevels; ++l) {
    const std::string name = "reduce." + std::to_string(l);
    add_conv(specs, name, c, bc[l], 1);
    add_bn(specs, name, c);
  }

  for (int i = 1; i <= config.cascades; ++i) {
    const std::string prefix = fpem_prefix(i) + ".";
    for (const char* join : kUpNames) {
      add_conv(specs, prefix + join + ".dw", c, 1, 3);
      add_conv(specs, prefix + join + ".pw", c, c, 1);
      add_bn(specs, prefix + join, c);
    }
    for (int l = 1; l < kPyramidLevels; ++l) {
      add_conv(specs, prefix + kDownNames[l] + ".dw", c, 1, 3);
      add_conv(specs, prefix + kDownNames[l] + ".pw", c, c, 1);
      add_bn(specs, prefix + kDownNames[l], c);
    }
  }

  add_conv(specs, "head.conv", config.head_hidden, kPyramidLevels * c, 3);
  add_bn(specs, "head.conv", config.head_hidden);
  add_conv(specs, "head.out", kHeadOutputs, config.head_hidden, 1);
  specs.push_back({"head.out.bias", {kHeadOutputs}});
  return specs;
}

const Tensor& Weights::get(const std::string& name) const
{
  auto it = params_.find(name);
  if (it == params_.end())
    throw std::out_of_range("weights: missing parameter '" + name + "'");
  return it->second;
}

BatchNormParams Weights::batch_norm(const std::string& name) const
{
  const Tensor& t = get(name);
  if (t.ndim() != 2 || t.dim(0) != 4)
    throw std::invalid_argument("weights: '" + name + "' must be 4 x C, got " + to_string(t.shape()));
  const Eigen::Map<const Tensor::RowMatrix> m(t.data().data(), 4, t.dim(1));
  BatchNormParams bn;
  bn.mean = m.row(0).transpose();
  bn.var = m.row(1).transpose();
  bn.gamma = m.row(2).transpose();
  bn.beta = m.row(3).transpose();
  return bn;
}

Eigen::VectorXf Weights::vector(const std::string& name) const { return get(name).data(); }

void Weights::validate(const NetConfig& config) const
{
  const auto specs = architecture(config);
  for (const auto& spec : specs) {
    const Tensor& t = get(spec.name);
    if (t.shape() != spec.shape)
      throw std::invalid_argument("weights: '" + spec.name + "' has shape " + to_string(t.shape()) +
                                  ", expected " + to_string(spec.shape));
  }
  if (params_.size() != specs.size())
    throw std::invalid_argument("weights: " + std::to_string(params_.size()) +
                                " parameters present, architecture expects " +
                                std::to_string(specs.size()));
}

json to_json(const NetConfig& c)
{
  return {{"cascades", c.cascades},         {"channels", c.channels},
          {"head_hidden", c.head_hidden},   {"height", c.height},
          {"width", c.width},               {"stem_channels", c.stem_channels},
          {"backbone_channels", c.backbone_channels}};
}

NetConfig net_config_from_json(const json& j)
{
  NetConfig c;
  c.cascades = j.at("cascades").get<int>();
  c.channels = j.at("channels").get<int>();
  c.head_hidden = j.at("head_hidden").get<int>();
  c.height = j.at("height").get<int>();
  c.width = j.at("width").get<int>();
  c.stem_channels = j.at("stem_channels").get<int>();
  c.backbone_channels = j.at("backbone_channels").get<std::array<int, kPyramidLevels>>();
  return c;
}

void Weights::save(const std::filesystem::path& dir, const NetConfig& config) const
{
  validate(config);
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = "pankit-weights";
  manifest["version"] = 1;
  manifest["config"] = to_json(config);
  json entries = json::array();
  for (const auto& spec : architecture(config)) {
    const std::string file = spec.name + ".ptns";
    save_tensor(dir / file, get(spec.name));
    entries.push_back({{"name", spec.name}, {"file", file}, {"shape", spec.shape}});
  }
  manifest["params"] = std::move(entries);
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

Weights Weights::load(const std::filesystem::path& dir, NetConfig* config)
{
  std::ifstream is(dir / "manifest.json");
  if (!is)
    throw std::runtime_error("weights: no manifest.json in " + dir.string());
  const json manifest = json::parse(is);
  const NetConfig cfg = net_config_from_json(manifest.at("config"));
  Weights w;
  for (const auto& entry : manifest.at("params")) {
    Tensor t = load_tensor(dir / entry.at("file").get<std::string>());
    if (t.shape() != entry.at("shape").get<Shape>())
      throw std::runtime_error("weights: file shape disagrees with manifest for " +
                               entry.at("name").get<std::string>());
    w.set(entry.at("name").get<std::string>(), std::move(t));
  }
  w.validate(cfg);
  if (config)
    *config = cfg;
  return w;
}

Weights init_weights(const NetConfig& config, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  Weights w;
  for (const auto& spec : architecture(config)) {
    Tensor t(spec.shape);
    if (spec.name.ends_with(".bn")) {
      Eigen::Map<Tensor::RowMatrix> m(t.data().data(), 4, spec.shape[1]);
      m.row(1).setOnes();
      m.row(2).setOnes();
    } else if (spec.name.ends_with(".weight")) {
      const int fan_in = spec.shape[1] * spec.shape[2] * spec.shape[3];
      std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
      for (float& v : t.span())
        v = dist(rng);
    }
    w.set(spec.name, std::move(t));
  }
  return w;
}

FeaturePyramid stub_backbone(const Tensor& image, const Weights& weights, const NetConfig& config)
{
  if (image.ndim() != 3 || image.channels() != 3)
    throw std::invalid_argument("stub_backbone: image must be 3 x H x W, got " + to_string(image.shape()));
  if (image.height() % 32 != 0 || image.width() % 32 != 0)
    throw std::invalid_argument("stub_backbone: image " + to_string(image.shape()) +
                                " spatial dims must be divisible by 32");
  (void)config;
  FeaturePyramid out;
  Tensor x = conv_bn_relu(image, weights, "backbone.stem", 2, 1);
  for (int l = 0; l < kPyramidLevels; ++l) {
    x = conv_bn_relu(x, weights, "backbone.stage" + std::to_string(l + 1), 2, 1);
    out.levels[l] = x;
  }
  return out;
}

FeaturePyramid reduce(const FeaturePyramid& raw, const Weights& weights)
{
  raw.validate(false);
  FeaturePyramid out;
  for (int l = 0; l < kPyramidLevels; ++l)
    out.levels[l] = conv_bn_relu(raw.levels[l], weights, "reduce." + std::to_string(l), 1, 0);
  return out;
}

FeaturePyramid fpem(const FeaturePyramid& pyramid, const Weights& weights, const std::string& prefix)
{
  pyramid.validate();
  const std::string p = prefix + ".";

  // Up-scale phase: stride 32 -> 4.
  std::array<Tensor, kPyramidLevels> up;
  up[3] = pyramid.levels[3];
  for (int l = 2; l >= 0; --l)
    up[l] = separable(add(upsample_bilinear(up[l + 1], 2), pyramid.levels[l]), weights, p + kUpNames[l], 1);

  // Down-scale phase: stride 4 -> 32. The stride-4 map passes through.
  FeaturePyramid out;
  out.levels[0] = up[0];
  for (int l = 1; l < kPyramidLevels; ++l) {
    const std::string name = p + kDownNames[l];
    const Tensor& prev = out.levels[l - 1];
    Tensor dw = conv2d(prev, weights.get(name + ".dw.weight"), std::nullopt, 2, 1, prev.channels());
    Tensor pw = conv2d(add(dw, up[l]), weights.get(name + ".pw.weight"), std::nullopt, 1, 0, 1);
    out.levels[l] = batch_norm_relu(pw, weights.batch_norm(name + ".bn"), true);
  }
  return out;
}

Tensor ffm(std::span<const FeaturePyramid> pyramids)
{
  if (pyramids.empty())
    throw std::invalid_argument("ffm: need at least one pyramid");
  for (const auto& p : pyramids) {
    p.validate();
    if (!p.same_shape(pyramids[0]))
      throw std::invalid_argument("ffm: pyramids have mismatched shapes");
  }
  std::array<Tensor, kPyramidLevels> fused;
  for (int l = 0; l < kPyramidLevels; ++l) {
    fused[l] = pyramids[0].levels[l];
    for (std::size_t i = 1; i < pyramids.size(); ++i)
      fused[l] = add(fused[l], pyramids[i].levels[l]);
    if (l > 0)
      fused[l] = upsample_bilinear(fused[l], 1 << l);
  }
  return concat(fused);
}

PredictionMaps<float> head(const Tensor& fused, const Weights& weights)
{
  const Tensor& k = weights.get("head.conv.weight");
  if (fused.ndim() != 3 || fused.channels() != k.dim(1))
    throw std::invalid_argument("head: fused feature " + to_string(fused.shape()) +
                                " does not match head weights " + to_string(k.shape()));
  Tensor hidden = conv_bn_relu(fused, weights, "head.conv", 1, 1);
  Tensor out = conv2d(hidden, weights.get("head.out.weight"), weights.vector("head.out.bias"), 1, 0, 1);
  PredictionMaps<float> maps(out.height(), out.width());
  maps.text = 1.0f / (1.0f + (-out.plane(0).array()).exp());
  maps.kernel = 1.0f / (1.0f + (-out.plane(1).array()).exp());
  maps.similarity = out.channel_matrix().bottomRows(kSimilarityDim);
  return maps;
}

FeaturePyramid run_backbone(const Tensor& image, const Weights& weights, const NetConfig& config)
{
  return stub_backbone(image, weights, config);
}

PredictionMaps<float> run_segmentation_head(const FeaturePyramid& raw, const Weights& weights,
                                            const NetConfig& config)
{
  std::vector<FeaturePyramid> enhanced;
  FeaturePyramid current = reduce(raw, weights);
  if (config.cascades == 0) {
    enhanced.push_back(current);
  } else {
    for (int i = 1; i <= config.cascades; ++i) {
      current = fpem(current, weights, fpem_prefix(i));
      enhanced.push_back(current);
    }
  }
  return head(ffm(enhanced), weights);
}

PredictionMaps<float> forward(const Tensor& image, const Weights& weights, const NetConfig& config)
{
  config.validate();
  if (image.ndim() != 3 || image.height() != config.height || image.width() != config.width)
    throw std::invalid_argument("forward: image " + to_string(image.shape()) +
                                " does not match configured input " + std::to_string(config.height) +
                                "x" + std::to_string(config.width));
  return run_segmentation_head(run_backbone(image, weights, config), weights, config);
}

FlopsReport fpem_flops(const NetConfig& config, const std::string& prefix)
{
  FlopsReport r;
  const int c = config.channels;
  auto level = [&](int l) -> Shape {
    return {c, level_size(config.height, l), level_size(config.width, l)};
  };
  const std::string p = prefix + ".";
  for (int l = 2; l >= 0; --l) {
    r.add(conv_desc(p + kUpNames[l] + ".dw", level(l), c, 3, 1, 1, c));
    r.add(conv_desc(p + kUpNames[l] + ".pw", level(l), c, 1, 1, 0));
  }
  for (int l = 1; l < kPyramidLevels; ++l) {
    r.add(conv_desc(p + kDownNames[l] + ".dw", level(l - 1), c, 3, 2, 1, c));
    r.add(conv_desc(p + kDownNames[l] + ".pw", level(l), c, 1, 1, 0));
  }
  return r;
}

FlopsReport model_flops(const NetConfig& config)
{
  config.validate();
  FlopsReport r;
  const auto& bc = config.backbone_channels;
  Shape x{3, config.height, config.width};
  auto step = [&](const LayerDesc& d) {
    r.add(d);
    x = d.output_shape();
  };
  step(conv_desc("backbone.stem", x, config.stem_channels, 3, 2, 1));
  std::array<Shape, kPyramidLevels> raw;
  for (int l = 0; l < kPyramidLevels; ++l) {
    step(conv_desc("backbone.stage" + std::to_string(l + 1), x, bc[l], 3, 2, 1));
    raw[l] = x;
  }
  for (int l = 0; l < kPyramidLevels; ++l)
    r.add(conv_desc("reduce." + std::to_string(l), raw[l], config.channels, 1, 1, 0));
  for (int i = 1; i <= config.cascades; ++i)
    r.append(fpem_flops(config, fpem_prefix(i)));
  const Shape fused{kPyramidLevels * config.channels, level_size(config.height, 0),
                    level_size(config.width, 0)};
  LayerDesc hc = conv_desc("head.conv", fused, config.head_hidden, 3, 1, 1);
  r.add(hc);
  r.add(conv_desc("head.out", hc.output_shape(), kHeadOutputs, 1, 1, 0));
  return r;
}

FlopsReport fpn_reference_flops(const NetConfig& config)
{
  FlopsReport r;
  const int c = config.channels;
  for (int l = 0; l < kPyramidLevels; ++l)
    r.add(conv_desc("fpn.smooth" + std::to_string(l), {c, level_size(config.height, l), level_size(config.width, l)},
                    c, 3, 1, 1));
  return r;
}

} // namespace pankit
