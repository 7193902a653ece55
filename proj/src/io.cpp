#include "pankit/io.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace pankit {

json polygon_to_json(const Polygon& poly)
{
  json pts = json::array();
  for (const auto& p : poly.points)
    pts.push_back({p.x(), p.y()});
  return pts;
}

Polygon polygon_from_json(const json& j)
{
  Polygon poly;
  for (const auto& p : j)
    poly.points.emplace_back(p.at(0).get<float>(), p.at(1).get<float>());
  return poly;
}

json detections_to_json(std::span<const TextInstance> instances)
{
  json list = json::array();
  for (const auto& inst : instances) {
    json item{{"polygon", polygon_to_json(inst.polygon)}, {"score", inst.score}};
    if (inst.rect)
      item["rect"] = {{"cx", inst.rect->center.x()},
                      {"cy", inst.rect->center.y()},
                      {"w", inst.rect->width},
                      {"h", inst.rect->height},
                      {"angle_deg", inst.rect->angle_deg}};
    list.push_back(std::move(item));
  }
  return json{{"instances", std::move(list)}};
}

std::vector<Detection> detections_from_json(const json& j)
{
  std::vector<Detection> out;
  for (const auto& item : j.at("instances"))
    out.push_back({polygon_from_json(item.at("polygon")), item.value("score", 1.0f)});
  return out;
}

json eval_to_json(const EvalReport& report)
{
  json matches = json::array();
  for (const auto& m : report.matches)
    matches.push_back({{"det", m.det}, {"gt", m.gt}, {"iou", m.iou}});
  return {{"tp", report.tp},
          {"fp", report.fp},
          {"fn", report.fn},
          {"ignored", report.ignored},
          {"precision", report.precision},
          {"recall", report.recall},
          {"fmeasure", report.fmeasure},
          {"matches", std::move(matches)}};
}

json RunManifest::to_json() const
{
  return {{"subcommand", subcommand}, {"config", config},   {"seed", seed},       {"inputs", inputs},
          {"outputs", outputs},       {"stage_ms", stage_ms}, {"skipped", skipped}};
}

json to_json(const PAConfig& cfg)
{
  return {{"d", cfg.distance},        {"text_thresh", cfg.text_thresh}, {"kernel_thresh", cfg.kernel_thresh},
          {"min_area", cfg.min_area}, {"min_score", cfg.min_score},     {"stride", cfg.stride},
          {"fit_rect", cfg.fit_rect}};
}

json to_json(const LossConfig& cfg)
{
  return {{"alpha", cfg.alpha},         {"beta", cfg.beta},         {"delta_agg", cfg.delta_agg},
          {"delta_dis", cfg.delta_dis}, {"ohem_ratio", cfg.ohem_ratio}};
}

json to_json(const SceneConfig& cfg)
{
  return {{"width", cfg.width},
          {"height", cfg.height},
          {"instances", cfg.n_instances},
          {"curved_fraction", cfg.curved_fraction},
          {"adjacent", cfg.force_adjacent},
          {"stride", cfg.stride},
          {"max_attempts", cfg.max_attempts}};
}

Tensor gt_to_tensor(const GroundTruth& gt)
{
  Tensor t({3, gt.height(), gt.width()});
  t.plane(0) = gt.instances.cast<float>().matrix();
  t.plane(1) = gt.kernels.cast<float>().matrix();
  t.plane(2) = gt.ignore.cast<float>().matrix();
  return t;
}

GroundTruth gt_from_tensor(const Tensor& t)
{
  if (t.ndim() != 3 || t.channels() != 3)
    throw std::invalid_argument("ground truth tensor must be 3 x h x w, got " + to_string(t.shape()));
  GroundTruth gt;
  gt.instances = t.plane(0).array().round().cast<std::int32_t>();
  gt.kernels = t.plane(1).array().round().cast<std::int32_t>();
  gt.ignore = t.plane(2).array() > 0.5f;
  gt.count = gt.instances.size() ? gt.instances.maxCoeff() : 0;
  gt.validate();
  return gt;
}

std::string loss_csv(std::span<const LossRecord> curve)
{
  std::ostringstream out;
  out << "step,total,l_tex,l_ker,l_agg,l_dis\n";
  char line[256];
  for (const auto& r : curve) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.step, r.total, r.l_tex, r.l_ker, r.l_agg,
                  r.l_dis);
    out << line;
  }
  return out.str();
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

void write_png(const std::filesystem::path& path, const RgbImage& image)
{
  if (image.width <= 0 || image.height <= 0)
    throw std::invalid_argument("write_png: empty image");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp)
    throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: libpng error on " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y)
    png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RgbImage read_png(const std::filesystem::path& path)
{
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw std::runtime_error("read_png: " + path.string() + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw std::runtime_error("read_png: " + path.string() + ": " + img.message);
  }
  return out;
}

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string pnm_token(std::istream& in)
{
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty())
        break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty())
    throw std::runtime_error("read_pgm: truncated header");
  return tok;
}

} // namespace

Plane<float> read_pgm(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  const std::string magic = pnm_token(in);
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("read_pgm: " + path.string() + " is not a PGM file");
  const int w = std::stoi(pnm_token(in));
  const int h = std::stoi(pnm_token(in));
  const int maxval = std::stoi(pnm_token(in));
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error("read_pgm: bad header in " + path.string());
  Plane<float> out(h, w);
  const float scale = 1.0f / static_cast<float>(maxval);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    int v = 0;
    if (magic == "P2") {
      v = std::stoi(pnm_token(in));
    } else if (maxval < 256) {
      v = in.get();
    } else {
      const int hi = in.get();
      v = (hi << 8) | in.get();
    }
    if (!in)
      throw std::runtime_error("read_pgm: truncated data in " + path.string());
    out(i) = static_cast<float>(v) * scale;
  }
  return out;
}

Tensor read_image(const std::filesystem::path& path)
{
  auto ext = path.extension().string();
  for (auto& c : ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".pgm") {
    const Plane<float> gray = read_pgm(path);
    Tensor t({3, static_cast<int>(gray.rows()), static_cast<int>(gray.cols())});
    for (int c = 0; c < 3; ++c)
      t.plane(c) = gray.matrix();
    return t;
  }
  if (ext == ".png") {
    const RgbImage rgb = read_png(path);
    Tensor t({3, rgb.height, rgb.width});
    for (int y = 0; y < rgb.height; ++y)
      for (int x = 0; x < rgb.width; ++x)
        for (int c = 0; c < 3; ++c)
          t(c, y, x) = static_cast<float>(rgb.at(x, y)[c]) / 255.0f;
    return t;
  }
  throw std::runtime_error("unsupported image format: " + path.string());
}

} // namespace pankit
