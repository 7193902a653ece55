#pragma once

#include "pankit/io.hpp"
#include "pankit/net.hpp"
#include "pankit/pa.hpp"

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>

namespace pankit {

/// Multi-producer multi-consumer FIFO with a capacity bound. `push` blocks
/// while full; `pop` blocks while empty and returns nullopt once closed and
/// drained.
template <typename T>
class BoundedQueue {
public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  void push(T value)
  {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_)
      throw std::logic_error("BoundedQueue: push after close");
    items_.push_back(std::move(value));
    not_empty_.notify_one();
  }

  std::optional<T> pop()
  {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty())
      return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

  void close()
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_empty_, not_full_;
};

/// Calls fn(i) for i in [0, n) on `threads` workers fed from a bounded queue.
/// The first exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// `flag` when positive, else PANKIT_THREADS, else 1.
int resolve_threads(int flag);

struct StageTimes {
  double load_ms = 0;
  double backbone_ms = 0;
  double head_ms = 0; // reduce + FPEMs + FFM + head
  double post_ms = 0;

  double total() const { return load_ms + backbone_ms + head_ms + post_ms; }
};

struct TimingBreakdown {
  bool pipeline = false;
  std::size_t images = 0;
  int repetitions = 0;
  StageTimes mean;      // per image, averaged over images and repetitions
  double total_ms = 0;  // mean per-image sum of stages
  double wall_ms = 0;   // mean wall-clock of one pass over all images
  double fps = 0;       // images per second of wall-clock

  json to_json() const;
};

/// Produces the maps for input `index`, recording its own stage times.
using MapsSource = std::function<PredictionMaps<float>(std::size_t index, StageTimes& times)>;

/// Times `repetitions` passes over `n_inputs` inputs after `warmup` untimed
/// passes. Sequential mode runs source then post-processing per input;
/// pipeline mode runs the source on a producer thread feeding a bounded queue
/// drained by the post-processing consumer. Rejects fewer than 2 inputs.
TimingBreakdown run_bench(std::size_t n_inputs, const MapsSource& source, const PAConfig& cfg, bool pipeline,
                          int repetitions = 3, int warmup = 1, std::size_t queue_capacity = 4);

/// Source that runs the network on pre-loaded images.
MapsSource network_source(std::span<const Tensor> images, const Weights& weights, const NetConfig& config);

/// Source that decodes pre-serialized 6 x h x w map tensors.
MapsSource tensor_source(std::span<const std::string> blobs);

} // namespace pankit
