#include "pankit/bench.hpp"
#include "pankit/eval.hpp"
#include "pankit/gt.hpp"
#include "pankit/io.hpp"
#include "pankit/log.hpp"
#include "pankit/loss.hpp"
#include "pankit/net.hpp"
#include "pankit/pa.hpp"
#include "pankit/render.hpp"
#include "pankit/synth.hpp"
#include "pankit/tensor_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace pankit;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct PAFlags {
  PAConfig cfg;
  void add(CLI::App* app)
  {
    app->add_option("--d", cfg.distance, "similarity distance threshold")->capture_default_str();
    app->add_option("--text-thresh", cfg.text_thresh, "text score threshold")->capture_default_str();
    app->add_option("--kernel-thresh", cfg.kernel_thresh, "kernel score threshold")->capture_default_str();
    app->add_option("--min-area", cfg.min_area, "minimum instance area in grid pixels")->capture_default_str();
    app->add_option("--min-score", cfg.min_score, "minimum mean text score")->capture_default_str();
    app->add_option("--stride", cfg.stride, "map stride relative to the image")->capture_default_str();
  }
};

// Files in `dir` (or `dir` itself when it is a file) with one of `exts`, sorted.
std::vector<fs::path> list_inputs(const fs::path& dir, std::initializer_list<std::string_view> exts)
{
  if (!fs::exists(dir))
    throw std::runtime_error("no such file or directory: " + dir.string());
  if (!fs::is_directory(dir))
    return {dir};
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file())
      continue;
    const auto ext = entry.path().extension().string();
    if (std::find(exts.begin(), exts.end(), ext) != exts.end())
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Text annotations carry no canvas size: fit the polygons, or 640 x 640 when empty.
Scene load_scene(const fs::path& path, int width, int height)
{
  Scene scene = load_annotations(path, width, height);
  if (scene.width > 0 && scene.height > 0)
    return scene;
  float mx = 0, my = 0;
  for (const auto& p : scene.polygons)
    for (const auto& q : p.points) {
      mx = std::max(mx, q.x());
      my = std::max(my, q.y());
    }
  scene.width = scene.polygons.empty() ? 640 : static_cast<int>(std::ceil(mx)) + 1;
  scene.height = scene.polygons.empty() ? 640 : static_cast<int>(std::ceil(my)) + 1;
  return scene;
}

std::vector<Detection> to_detections(const std::vector<TextInstance>& instances)
{
  std::vector<Detection> out;
  for (const auto& inst : instances)
    out.push_back({inst.polygon, inst.score});
  return out;
}

std::string eval_text(const std::string& name, const EvalReport& r)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s tp %3d fp %3d fn %3d ignored %3d  P %.4f R %.4f F %.4f\n", name.c_str(), r.tp,
                r.fp, r.fn, r.ignored, r.precision, r.recall, r.fmeasure);
  return buf;
}

void write_renders(const fs::path& stem, const PredictionMaps<float>& maps, const std::vector<TextInstance>& instances,
                   const PAConfig& cfg, bool render, bool render_sim, const Tensor* base, RunManifest& manifest)
{
  if (render) {
    const fs::path out = stem.string() + "_overlay.png";
    write_png(out, render_overlay(maps, instances, cfg, base));
    manifest.outputs.push_back(out.string());
  }
  if (render_sim) {
    const fs::path out = stem.string() + "_sim.png";
    write_png(out, render_similarity(maps, cfg, cfg.stride));
    manifest.outputs.push_back(out.string());
  }
}

// ---------------------------------------------------------------- labelgen

struct LabelgenArgs {
  fs::path annotations, out;
  double r = 0.7;
  int stride = 4;
  int width = 0, height = 0;
  int threads = 0;
};

int run_labelgen(const LabelgenArgs& a)
{
  const auto t0 = Clock::now();
  fs::create_directories(a.out);
  const auto files = list_inputs(a.annotations, {".txt", ".json"});
  RunManifest manifest;
  manifest.subcommand = "labelgen";
  manifest.config = {{"r", a.r}, {"stride", a.stride}, {"width", a.width}, {"height", a.height}};
  std::vector<std::string> results(files.size()), skipped(files.size());
  parallel_for(files.size(), resolve_threads(a.threads), [&](std::size_t i) {
    const auto& file = files[i];
    try {
      const Scene scene = load_scene(file, a.width, a.height);
      const GroundTruth gt = make_ground_truth(scene, a.r, a.stride);
      const fs::path stem = a.out / file.stem();
      save_tensor(stem.string() + ".ptns", gt_to_tensor(gt));
      json polys = json::array();
      for (const auto& p : scene.polygons)
        polys.push_back({{"polygon", polygon_to_json(p)}, {"ignore", p.ignore}});
      write_json(stem.string() + ".json", {{"source", file.string()},
                                           {"manifest", "manifest.json"},
                                           {"canvas", {scene.width, scene.height}},
                                           {"grid", {gt.height(), gt.width()}},
                                           {"stride", a.stride},
                                           {"r", a.r},
                                           {"count", gt.count},
                                           {"polygons", std::move(polys)}});
      results[i] = stem.string() + ".ptns";
    } catch (const std::exception& e) {
      skipped[i] = file.string() + ": " + e.what();
    }
  });
  for (std::size_t i = 0; i < files.size(); ++i) {
    manifest.inputs.push_back(files[i].string());
    if (!skipped[i].empty()) {
      warn("skipping " + skipped[i]);
      manifest.skipped.push_back(skipped[i]);
    } else {
      manifest.outputs.push_back(results[i]);
    }
  }
  manifest.stage_ms["total"] = ms_since(t0);
  write_json(a.out / "manifest.json", manifest.to_json());
  std::cout << "labelgen: " << manifest.outputs.size() << " written, " << manifest.skipped.size() << " skipped\n";
  return 0;
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  fs::path maps, image, weights, out;
  PAFlags pa;
  bool render = false, render_sim = false;
  int threads = 0;
};

// Zero-pads to the next multiple of 32 in each dimension.
Tensor pad32(const Tensor& img)
{
  const int h = (img.height() + 31) / 32 * 32, w = (img.width() + 31) / 32 * 32;
  if (h == img.height() && w == img.width())
    return img;
  Tensor out({img.channels(), h, w});
  for (int c = 0; c < img.channels(); ++c)
    out.plane(c).topLeftCorner(img.height(), img.width()) = img.plane(c);
  return out;
}

int run_infer(const InferArgs& a)
{
  const auto t0 = Clock::now();
  a.pa.cfg.validate();
  fs::create_directories(a.out);
  RunManifest manifest;
  manifest.subcommand = "infer";
  manifest.config = {{"pa", to_json(a.pa.cfg)}, {"render", a.render}, {"render_sim", a.render_sim}};

  const bool from_maps = !a.maps.empty();
  if (from_maps == !a.image.empty())
    throw CLI::ValidationError("infer", "give exactly one of --maps or --image");
  std::vector<fs::path> inputs =
      from_maps ? list_inputs(a.maps, {".ptns"}) : list_inputs(a.image, {".pgm", ".png", ".PGM", ".PNG"});

  Weights weights;
  NetConfig net;
  if (!from_maps) {
    if (a.weights.empty())
      throw std::runtime_error("infer: --image needs --weights DIR (create one with `pankit init-weights`)");
    if (!fs::exists(a.weights / "manifest.json"))
      throw std::runtime_error("infer: no weights manifest at " + (a.weights / "manifest.json").string());
    weights = Weights::load(a.weights, &net);
    manifest.config["net"] = to_json(net);
    manifest.inputs.push_back(a.weights.string());
  }

  std::vector<std::vector<std::string>> outputs(inputs.size());
  std::vector<std::string> skipped(inputs.size());
  parallel_for(inputs.size(), resolve_threads(a.threads), [&](std::size_t i) {
    const auto& file = inputs[i];
    try {
      PredictionMaps<float> maps;
      std::optional<Tensor> image;
      if (from_maps) {
        maps = maps_from_tensor(load_tensor(file));
      } else {
        image = read_image(file);
        NetConfig cfg = net;
        const Tensor padded = pad32(*image);
        cfg.height = padded.height();
        cfg.width = padded.width();
        maps = forward(padded, weights, cfg);
      }
      const auto instances = post_process(maps, a.pa.cfg);
      const fs::path stem = a.out / file.stem();
      json det = detections_to_json(instances);
      det["manifest"] = "manifest.json";
      det["source"] = file.string();
      write_json(stem.string() + ".json", det);
      RunManifest local;
      write_renders(stem, maps, instances, a.pa.cfg, a.render, a.render_sim, image ? &*image : nullptr, local);
      outputs[i] = {stem.string() + ".json"};
      outputs[i].insert(outputs[i].end(), local.outputs.begin(), local.outputs.end());
    } catch (const std::exception& e) {
      skipped[i] = file.string() + ": " + e.what();
    }
  });
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    manifest.inputs.push_back(inputs[i].string());
    if (!skipped[i].empty()) {
      warn("skipping " + skipped[i]);
      manifest.skipped.push_back(skipped[i]);
    }
    manifest.outputs.insert(manifest.outputs.end(), outputs[i].begin(), outputs[i].end());
  }
  manifest.stage_ms["total"] = ms_since(t0);
  write_json(a.out / "manifest.json", manifest.to_json());
  std::cout << "infer: " << inputs.size() - manifest.skipped.size() << " processed, " << manifest.skipped.size()
            << " skipped\n";
  return manifest.skipped.empty() ? 0 : 1;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  fs::path det, gt, out;
  double iou = 0.5;
  int width = 0, height = 0;
  std::string format = "text";
};

int run_eval(const EvalArgs& a)
{
  if (!(a.iou > 0.0 && a.iou <= 1.0))
    throw CLI::ValidationError("--iou", "must lie in (0, 1]");
  std::map<std::string, fs::path> dets, gts;
  for (const auto& p : list_inputs(a.det, {".json"}))
    if (p.filename() != "manifest.json")
      dets[p.stem().string()] = p;
  for (const auto& p : list_inputs(a.gt, {".txt", ".json"}))
    if (p.filename() != "manifest.json")
      gts[p.stem().string()] = p;

  json per_image = json::object();
  json unmatched = json::array();
  std::vector<EvalReport> reports;
  std::string text;
  for (const auto& [name, det_path] : dets) {
    const auto it = gts.find(name);
    if (it == gts.end()) {
      unmatched.push_back(det_path.string());
      continue;
    }
    const auto detections = detections_from_json(json::parse(read_file(det_path)));
    const Scene scene = load_scene(it->second, a.width, a.height);
    EvalReport r = match(detections, scene.polygons, a.iou);
    per_image[name] = eval_to_json(r);
    text += eval_text(name, r);
    reports.push_back(std::move(r));
  }
  for (const auto& [name, path] : gts)
    if (!dets.count(name))
      unmatched.push_back(path.string());

  json report{{"iou", a.iou}, {"per_image", per_image}, {"unmatched", unmatched}};
  if (!reports.empty()) {
    const EvalReport total = summarize(reports);
    json agg = eval_to_json(total);
    agg.erase("matches");
    agg["images"] = reports.size();
    report["aggregate"] = agg;
    text += eval_text("aggregate", total);
  } else {
    report["aggregate"] = nullptr;
    text += "aggregate: no matched image pairs\n";
  }
  for (const auto& u : unmatched)
    text += "unmatched: " + u.get<std::string>() + "\n";

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_json(a.out / "report.json", report);
    write_file(a.out / "report.txt", text);
  }
  std::cout << (a.format == "json" ? report.dump(2) + "\n" : text);
  return 0;
}

// ---------------------------------------------------------------- flops

struct FlopsArgs {
  NetConfig net;
  int sweep = 4;
  bool layers = false;
  std::string format = "text";
};

int run_flops(const FlopsArgs& a)
{
  a.net.validate();
  if (a.sweep < 0)
    throw CLI::ValidationError("--sweep", "must be >= 0");
  const FlopsReport report = model_flops(a.net);
  json totals = json::array();
  std::vector<std::uint64_t> sweep;
  for (int n = 0; n <= a.sweep; ++n) {
    NetConfig c = a.net;
    c.cascades = n;
    sweep.push_back(model_flops(c).total());
    totals.push_back({{"nc", n}, {"macs", sweep.back()}});
  }
  json increments = json::array();
  for (std::size_t k = 1; k < sweep.size(); ++k)
    increments.push_back(sweep[k] - sweep[k - 1]);
  const std::uint64_t fpem = fpem_flops(a.net, fpem_prefix(1)).total();
  const std::uint64_t fpn = fpn_reference_flops(a.net).total();

  json layers = json::array();
  for (const auto& e : report.entries())
    layers.push_back({{"name", e.name}, {"macs", e.macs}, {"output", e.output}});
  json out{{"net", to_json(a.net)}, {"total", report.total()},  {"fpem", fpem},      {"fpn_reference", fpn},
           {"fpem_to_fpn", static_cast<double>(fpem) / static_cast<double>(fpn)},
           {"sweep", totals},       {"increments", increments}, {"layers", layers}};

  if (a.format == "json") {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::printf("input %dx%d, %d FPEM(s), %d channels (MACs)\n", a.net.height, a.net.width, a.net.cascades,
              a.net.channels);
  if (a.layers)
    for (const auto& e : report.entries())
      std::printf("  %-28s %-14s %14llu\n", e.name.c_str(), to_string(e.output).c_str(),
                  static_cast<unsigned long long>(e.macs));
  std::printf("total          %8.4f G\n", report.total() / 1e9);
  for (std::size_t n = 0; n < sweep.size(); ++n)
    std::printf("nc=%zu          %8.4f G\n", n, sweep[n] / 1e9);
  for (std::size_t k = 1; k < sweep.size(); ++k)
    std::printf("increment %zu->%zu %8.4f G\n", k - 1, k, (sweep[k] - sweep[k - 1]) / 1e9);
  std::printf("per FPEM       %8.4f G\nFPN reference  %8.4f G (ratio %.3f)\n", fpem / 1e9, fpn / 1e9,
              static_cast<double>(fpem) / static_cast<double>(fpn));
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  fs::path maps, images, weights;
  int synthetic = 0;
  bool pipeline = false;
  int repetitions = 3, warmup = 1;
  std::uint64_t seed = 1;
  PAFlags pa;
  std::string format = "text";
};

std::vector<std::string> synthetic_maps(int n, std::uint64_t seed, const PAConfig& cfg)
{
  std::vector<std::string> blobs;
  for (int i = 0; i < n; ++i) {
    SceneConfig sc;
    sc.n_instances = 3 + i % 3;
    sc.stride = cfg.stride;
    std::ostringstream os;
    write_tensor(os, maps_to_tensor(noisy_scene_maps(seed + static_cast<std::uint64_t>(i), sc)));
    blobs.push_back(os.str());
  }
  return blobs;
}

int run_bench_cmd(const BenchArgs& a)
{
  a.pa.cfg.validate();
  RunManifest manifest;
  manifest.subcommand = "bench";
  manifest.seed = a.seed;
  manifest.config = {{"pa", to_json(a.pa.cfg)}, {"pipeline", a.pipeline}, {"repetitions", a.repetitions},
                     {"warmup", a.warmup}};
  TimingBreakdown t;
  if (!a.images.empty()) {
    if (a.weights.empty())
      throw std::runtime_error("bench: --images needs --weights DIR");
    NetConfig net;
    const Weights weights = Weights::load(a.weights, &net);
    std::vector<Tensor> images;
    for (const auto& p : list_inputs(a.images, {".pgm", ".png"})) {
      images.push_back(pad32(read_image(p)));
      manifest.inputs.push_back(p.string());
    }
    for (const auto& img : images)
      if (img.height() != images.front().height() || img.width() != images.front().width())
        throw std::runtime_error("bench: all images must share one size");
    if (!images.empty()) {
      net.height = images.front().height();
      net.width = images.front().width();
    }
    manifest.config["net"] = to_json(net);
    t = run_bench(images.size(), network_source(images, weights, net), a.pa.cfg, a.pipeline, a.repetitions,
                  a.warmup);
  } else {
    std::vector<std::string> blobs;
    if (!a.maps.empty()) {
      for (const auto& p : list_inputs(a.maps, {".ptns"})) {
        blobs.push_back(read_file(p));
        manifest.inputs.push_back(p.string());
      }
    } else {
      blobs = synthetic_maps(a.synthetic, a.seed, a.pa.cfg);
      manifest.config["synthetic"] = a.synthetic;
    }
    t = run_bench(blobs.size(), tensor_source(blobs), a.pa.cfg, a.pipeline, a.repetitions, a.warmup);
  }
  json out = manifest.to_json();
  out["timing"] = t.to_json();
  if (a.format == "json") {
    std::cout << out.dump(2) << "\n";
  } else {
    std::printf("%zu images x %d reps, %s\n", t.images, t.repetitions, t.pipeline ? "pipelined" : "sequential");
    std::printf("  load      %9.3f ms\n  backbone  %9.3f ms\n  head      %9.3f ms\n  post      %9.3f ms\n",
                t.mean.load_ms, t.mean.backbone_ms, t.mean.head_ms, t.mean.post_ms);
    std::printf("  total     %9.3f ms/image\n  wall      %9.3f ms/pass (%.1f FPS)\n", t.total_ms, t.wall_ms, t.fps);
  }
  return 0;
}

// ---------------------------------------------------------------- traintoy

struct TraintoyArgs {
  std::uint64_t seed = 1;
  int runs = 1;
  fs::path scene_file, out = "traintoy";
  SceneConfig scene;
  double r = 0.7;
  int steps = 2000;
  double lr = 200.0;
  double iou = 0.5;
  LossConfig loss;
  PAFlags pa;
  bool render = false, render_sim = false;
  int threads = 0;
};

int run_traintoy(const TraintoyArgs& a)
{
  a.pa.cfg.validate();
  a.loss.validate();
  if (a.runs < 1)
    throw CLI::ValidationError("--runs", "must be >= 1");
  if (!a.scene_file.empty() && a.runs != 1)
    throw CLI::ValidationError("--runs", "a fixed --scene allows one run");
  std::vector<EvalReport> reports(static_cast<std::size_t>(a.runs));
  std::vector<std::size_t> counts(reports.size()), truth(reports.size());
  parallel_for(reports.size(), resolve_threads(a.threads), [&](std::size_t k) {
    const auto t0 = Clock::now();
    const std::uint64_t seed = a.seed + k;
    SceneConfig sc = a.scene;
    sc.stride = a.pa.cfg.stride;
    const Scene scene =
        a.scene_file.empty() ? gen_scene(seed, sc) : load_scene(a.scene_file, sc.width, sc.height);
    const fs::path dir = a.runs == 1 ? a.out : a.out / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    RunManifest manifest;
    manifest.subcommand = "traintoy";
    manifest.seed = seed;
    manifest.config = {{"scene", to_json(sc)}, {"r", a.r},   {"steps", a.steps},
                       {"lr", a.lr},           {"iou", a.iou}, {"loss", to_json(a.loss)},
                       {"pa", to_json(a.pa.cfg)}};
    if (!a.scene_file.empty())
      manifest.inputs.push_back(a.scene_file.string());
    manifest.stage_ms["scene"] = ms_since(t0);

    auto t1 = Clock::now();
    TrainOptions opts;
    opts.stride = a.pa.cfg.stride;
    const TrainRun run = train_toy(scene, a.r, a.loss, a.steps, a.lr, opts);
    manifest.stage_ms["train"] = ms_since(t1);

    t1 = Clock::now();
    const auto instances = post_process(run.maps, a.pa.cfg);
    manifest.stage_ms["post"] = ms_since(t1);
    const auto dets = to_detections(instances);
    EvalReport report = match(dets, scene.polygons, a.iou);

    write_file(dir / "scene.json", scene_to_json(scene));
    write_file(dir / "loss.csv", loss_csv(run.curve));
    save_tensor(dir / "maps.ptns", maps_to_tensor(run.maps));
    json det = detections_to_json(instances);
    det["manifest"] = "manifest.json";
    write_json(dir / "detections.json", det);
    json ev = eval_to_json(report);
    ev["manifest"] = "manifest.json";
    ev["detected"] = instances.size();
    ev["ground_truth"] = scene.text_count();
    write_json(dir / "eval.json", ev);
    manifest.outputs = {(dir / "scene.json").string(), (dir / "loss.csv").string(), (dir / "maps.ptns").string(),
                        (dir / "detections.json").string(), (dir / "eval.json").string()};
    write_renders(dir / "maps", run.maps, instances, a.pa.cfg, a.render, a.render_sim, nullptr, manifest);
    manifest.stage_ms["total"] = ms_since(t0);
    write_json(dir / "manifest.json", manifest.to_json());
    counts[k] = instances.size();
    truth[k] = scene.text_count();
    reports[k] = std::move(report);
  });
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    std::printf("seed %llu: loss curve %d steps, %zu/%zu instances, P %.4f R %.4f F %.4f\n",
                static_cast<unsigned long long>(a.seed + k), a.steps, counts[k], truth[k], r.precision, r.recall,
                r.fmeasure);
  }
  if (reports.size() > 1) {
    const EvalReport total = summarize(reports);
    std::printf("aggregate: P %.4f R %.4f F %.4f\n", total.precision, total.recall, total.fmeasure);
  }
  return 0;
}

// ---------------------------------------------------------------- init-weights

struct InitArgs {
  NetConfig net;
  std::uint64_t seed = 0;
  fs::path out;
};

int run_init(const InitArgs& a)
{
  a.net.validate();
  init_weights(a.net, a.seed).save(a.out, a.net);
  std::cout << "init-weights: " << architecture(a.net).size() << " tensors written to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- loss

struct LossArgs {
  fs::path maps, gt;
  LossConfig loss;
};

int run_loss(const LossArgs& a)
{
  const auto maps = maps_from_tensor(load_tensor(a.maps));
  const auto gt = gt_from_tensor(load_tensor(a.gt));
  const auto b = total_loss<float>(maps, gt, a.loss);
  json out{{"config", to_json(a.loss)},
           {"l_tex", b.l_tex},
           {"l_ker", b.l_ker},
           {"l_agg", b.l_agg},
           {"l_dis", b.l_dis},
           {"total", b.total},
           {"grad_norm", {{"text", b.d_text.matrix().norm()},
                          {"kernel", b.d_kernel.matrix().norm()},
                          {"similarity", b.d_similarity.norm()}}}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

void add_net_flags(CLI::App* app, NetConfig& net)
{
  app->add_option("--nc", net.cascades, "number of cascaded FPEMs")->capture_default_str();
  app->add_option("--channels", net.channels, "pyramid channels")->capture_default_str();
  app->add_option("--height", net.height, "input height")->capture_default_str();
  app->add_option("--width", net.width, "input width")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"pankit: arbitrary-shaped text detection toolkit"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  LabelgenArgs lg;
  auto* labelgen = app.add_subcommand("labelgen", "annotations -> ground-truth bundles");
  labelgen->add_option("annotations", lg.annotations, "annotation file or directory (.txt / .json)")->required();
  labelgen->add_option("-o,--out", lg.out, "output directory")->required();
  labelgen->add_option("--r", lg.r, "kernel shrink ratio")->capture_default_str();
  labelgen->add_option("--stride", lg.stride, "grid stride")->capture_default_str();
  labelgen->add_option("--canvas-width", lg.width, "canvas width for .txt files (0: fit)");
  labelgen->add_option("--canvas-height", lg.height, "canvas height for .txt files (0: fit)");
  labelgen->add_option("--threads", lg.threads, "worker threads (env PANKIT_THREADS)");

  InferArgs inf;
  auto* infer = app.add_subcommand("infer", "maps or image -> detections");
  infer->add_option("--maps", inf.maps, "6 x h x w map tensor file or directory");
  infer->add_option("--image", inf.image, "PGM/PNG image file or directory");
  infer->add_option("--weights", inf.weights, "weights directory");
  infer->add_option("-o,--out", inf.out, "output directory")->required();
  inf.pa.add(infer);
  infer->add_flag("--render", inf.render, "write an overlay PNG");
  infer->add_flag("--render-sim", inf.render_sim, "write a PCA rendering of the similarity field");
  infer->add_option("--threads", inf.threads, "worker threads (env PANKIT_THREADS)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "detections vs annotations");
  eval->add_option("--det", ev.det, "detections directory")->required();
  eval->add_option("--gt", ev.gt, "annotations directory")->required();
  eval->add_option("-o,--out", ev.out, "report directory");
  eval->add_option("--iou", ev.iou, "IoU threshold")->capture_default_str();
  eval->add_option("--canvas-width", ev.width, "canvas width for .txt annotations (0: fit)");
  eval->add_option("--canvas-height", ev.height, "canvas height for .txt annotations (0: fit)");
  eval->add_option("--format", ev.format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();

  FlopsArgs fl;
  auto* flops = app.add_subcommand("flops", "multiply-accumulate counts");
  add_net_flags(flops, fl.net);
  flops->add_option("--sweep", fl.sweep, "report totals for nc = 0..N")->capture_default_str();
  flops->add_flag("--layers", fl.layers, "print the per-layer table");
  flops->add_option("--format", fl.format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "stage timings");
  bench->add_option("--maps", bn.maps, "directory of map tensors");
  bench->add_option("--images", bn.images, "directory of images (needs --weights)");
  bench->add_option("--weights", bn.weights, "weights directory");
  bench->add_option("--synthetic", bn.synthetic, "generate N synthetic map sets")->capture_default_str();
  bench->add_flag("--pipeline", bn.pipeline, "overlap producer and post-processing");
  bench->add_option("--reps", bn.repetitions, "timed repetitions")->capture_default_str();
  bench->add_option("--warmup", bn.warmup, "untimed repetitions")->capture_default_str();
  bench->add_option("--seed", bn.seed, "seed for synthetic maps")->capture_default_str();
  bn.pa.add(bench);
  bench->add_option("--format", bn.format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();

  TraintoyArgs tt;
  auto* traintoy = app.add_subcommand("traintoy", "optimize maps on a synthetic scene, detect, evaluate");
  traintoy->add_option("--seed", tt.seed, "scene seed")->capture_default_str();
  traintoy->add_option("--runs", tt.runs, "consecutive seeds to run")->capture_default_str();
  traintoy->add_option("--scene", tt.scene_file, "scene JSON instead of a generated one");
  traintoy->add_option("--instances", tt.scene.n_instances, "instances per scene")->capture_default_str();
  traintoy->add_flag("--adjacent", tt.scene.force_adjacent, "force a near-touching pair");
  traintoy->add_option("--curved", tt.scene.curved_fraction, "fraction of curved bands")->capture_default_str();
  traintoy->add_option("--r", tt.r, "kernel shrink ratio")->capture_default_str();
  traintoy->add_option("--steps", tt.steps, "gradient steps")->capture_default_str();
  traintoy->add_option("--lr", tt.lr, "learning rate")->capture_default_str();
  traintoy->add_option("--iou", tt.iou, "IoU threshold")->capture_default_str();
  tt.pa.add(traintoy);
  traintoy->add_flag("--render", tt.render, "write an overlay PNG");
  traintoy->add_flag("--render-sim", tt.render_sim, "write a PCA rendering of the similarity field");
  traintoy->add_option("--threads", tt.threads, "worker threads (env PANKIT_THREADS)");
  traintoy->add_option("-o,--out", tt.out, "output directory")->capture_default_str();

  InitArgs in;
  auto* init = app.add_subcommand("init-weights", "write seeded random weights");
  add_net_flags(init, in.net);
  init->add_option("--seed", in.seed, "RNG seed")->capture_default_str();
  init->add_option("-o,--out", in.out, "output directory")->required();

  LossArgs ls;
  auto* loss = app.add_subcommand("loss", "evaluate the training objective on saved maps");
  loss->add_option("--maps", ls.maps, "6 x h x w map tensor")->required();
  loss->add_option("--gt", ls.gt, "ground-truth bundle from labelgen")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version exit 0; usage errors share the error exit code
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  set_warnings_enabled(!quiet);
  try {
    if (*labelgen)
      return run_labelgen(lg);
    if (*infer)
      return run_infer(inf);
    if (*eval)
      return run_eval(ev);
    if (*flops)
      return run_flops(fl);
    if (*bench)
      return run_bench_cmd(bn);
    if (*traintoy)
      return run_traintoy(tt);
    if (*init)
      return run_init(in);
    if (*loss)
      return run_loss(ls);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "pankit: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
