#include "pankit/bench.hpp"

#include "pankit/log.hpp"
#include "pankit/tensor_io.hpp"

#include <chrono>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

namespace pankit {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn)
{
  if (n == 0)
    return;
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  BoundedQueue<std::size_t> queue(2 * workers);
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(workers, n); ++t)
    pool.emplace_back([&] {
      while (auto i = queue.pop()) {
        {
          std::lock_guard lock(error_mutex);
          if (error)
            continue;
        }
        try {
          fn(*i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
        }
      }
    });
  for (std::size_t i = 0; i < n; ++i)
    queue.push(i);
  queue.close();
  for (auto& th : pool)
    th.join();
  if (error)
    std::rethrow_exception(error);
}

int resolve_threads(int flag)
{
  if (flag > 0)
    return flag;
  if (const char* env = std::getenv("PANKIT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0)
        return v;
    } catch (const std::exception&) {
    }
    warn(std::string("ignoring invalid PANKIT_THREADS=") + env);
  }
  return 1;
}

json TimingBreakdown::to_json() const
{
  return {{"pipeline", pipeline},
          {"images", images},
          {"repetitions", repetitions},
          {"load_ms", mean.load_ms},
          {"backbone_ms", mean.backbone_ms},
          {"head_ms", mean.head_ms},
          {"post_ms", mean.post_ms},
          {"total_ms", total_ms},
          {"wall_ms", wall_ms},
          {"fps", fps}};
}

TimingBreakdown run_bench(std::size_t n_inputs, const MapsSource& source, const PAConfig& cfg, bool pipeline,
                          int repetitions, int warmup, std::size_t queue_capacity)
{
  if (n_inputs < 2)
    throw std::invalid_argument("bench: need at least 2 inputs, got " + std::to_string(n_inputs));
  if (repetitions < 1 || warmup < 0)
    throw std::invalid_argument("bench: repetitions must be >= 1 and warmup >= 0");
  if (n_inputs < 10)
    warn("bench: fewer than 10 inputs; timings will be noisy");
  cfg.validate();

  std::vector<StageTimes> times(n_inputs);
  StageTimes sum;
  double wall_sum = 0;

  const auto one_pass = [&] {
    const auto start = Clock::now();
    if (!pipeline) {
      for (std::size_t i = 0; i < n_inputs; ++i) {
        const auto maps = source(i, times[i]);
        const auto t0 = Clock::now();
        (void)post_process(maps, cfg);
        times[i].post_ms = ms_since(t0);
      }
      return ms_since(start);
    }
    BoundedQueue<std::pair<std::size_t, PredictionMaps<float>>> queue(queue_capacity);
    std::exception_ptr producer_error;
    std::thread producer([&] {
      try {
        for (std::size_t i = 0; i < n_inputs; ++i)
          queue.push({i, source(i, times[i])});
      } catch (...) {
        producer_error = std::current_exception();
      }
      queue.close();
    });
    while (auto item = queue.pop()) {
      const auto t0 = Clock::now();
      (void)post_process(item->second, cfg);
      times[item->first].post_ms = ms_since(t0);
    }
    producer.join();
    if (producer_error)
      std::rethrow_exception(producer_error);
    return ms_since(start);
  };

  for (int w = 0; w < warmup; ++w)
    one_pass();
  for (int r = 0; r < repetitions; ++r) {
    for (auto& t : times)
      t = {};
    wall_sum += one_pass();
    for (const auto& t : times) {
      sum.load_ms += t.load_ms;
      sum.backbone_ms += t.backbone_ms;
      sum.head_ms += t.head_ms;
      sum.post_ms += t.post_ms;
    }
  }

  TimingBreakdown out;
  out.pipeline = pipeline;
  out.images = n_inputs;
  out.repetitions = repetitions;
  const double count = static_cast<double>(n_inputs) * repetitions;
  out.mean = {sum.load_ms / count, sum.backbone_ms / count, sum.head_ms / count, sum.post_ms / count};
  out.total_ms = out.mean.total();
  out.wall_ms = wall_sum / repetitions;
  out.fps = out.wall_ms > 0 ? 1000.0 * static_cast<double>(n_inputs) / out.wall_ms : 0.0;
  return out;
}

MapsSource network_source(std::span<const Tensor> images, const Weights& weights, const NetConfig& config)
{
  return [images, &weights, config](std::size_t i, StageTimes& t) {
    auto t0 = Clock::now();
    const FeaturePyramid raw = run_backbone(images[i], weights, config);
    t.backbone_ms = ms_since(t0);
    t0 = Clock::now();
    auto maps = run_segmentation_head(raw, weights, config);
    t.head_ms = ms_since(t0);
    return maps;
  };
}

MapsSource tensor_source(std::span<const std::string> blobs)
{
  return [blobs](std::size_t i, StageTimes& t) {
    const auto t0 = Clock::now();
    std::istringstream in(blobs[i]);
    auto maps = maps_from_tensor(read_tensor(in));
    t.load_ms = ms_since(t0);
    return maps;
  };
}

} // namespace pankit
