#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "augablate/augment/scheme.hpp"
#include "augablate/core/rng.hpp"
#include "augablate/data/dataset.hpp"

namespace augb {

// Reassembles out-of-order producer results into index order. push() parks
// items and blocks producers that run more than `window` items ahead of the
// consumer; pop() hands out item 0, 1, 2, ... and, once the queue is closed
// and drained, nullopt.
template <typename T>
class OrderedBatchQueue {
 public:
  explicit OrderedBatchQueue(std::size_t window) : window_(window) {
    if (window == 0) throw std::invalid_argument("queue window must be positive");
  }

  void push(std::size_t index, T item) {
    std::unique_lock lock(m_);
    producer_cv_.wait(lock, [&] { return aborted_ || index < next_ + window_; });
    if (aborted_) return;  // consumer gave up; discard
    ready_.emplace(index, std::move(item));
    if (index == next_) consumer_cv_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(m_);
    consumer_cv_.wait(lock, [&] { return ready_.count(next_) || closed_ || aborted_; });
    auto it = ready_.find(next_);
    if (aborted_ || it == ready_.end()) return std::nullopt;  // drained or torn down
    T item = std::move(it->second);
    ready_.erase(it);
    ++next_;
    producer_cv_.notify_all();
    return item;
  }

  void close() {
    std::lock_guard lock(m_);
    closed_ = true;
    consumer_cv_.notify_all();
  }

  // Unblocks everyone and turns further pushes into no-ops, so producer
  // threads can be joined after the consumer bails out mid-stream.
  void abort() {
    std::lock_guard lock(m_);
    aborted_ = true;
    producer_cv_.notify_all();
    consumer_cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable producer_cv_, consumer_cv_;
  std::map<std::size_t, T> ready_;
  std::size_t next_ = 0;
  const std::size_t window_;
  bool closed_ = false;
  bool aborted_ = false;
};

struct Batch {
  Tensor<float> x;
  std::vector<int> labels;
};

// Augments one image for one epoch position. The stream is keyed on
// (run seed, epoch, dataset index), never on which thread does the work, so
// the result is identical for any worker count.
inline Image augment_indexed(const Image& img, const Scheme& scheme, std::uint64_t seed,
                             int epoch, std::size_t dataset_index) {
  Rng rng = Rng::keyed({seed, rng_stream::kAugment, static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(dataset_index)});
  return apply_scheme(img, scheme, rng);
}

// Produces the epoch's batches (augmented per `scheme`) and feeds them to
// `consume` in batch order. `order` holds dataset indices, already shuffled;
// a trailing partial batch is kept. workers <= 1 runs everything inline on
// the calling thread, which is also the bitwise-reference path.
inline void run_epoch_batches(const Dataset& ds, const std::vector<std::size_t>& order,
                              int batch_size, const Scheme& scheme, std::uint64_t seed,
                              int epoch, int workers,
                              const std::function<void(std::size_t, Batch&&)>& consume) {
  const std::size_t n_batches = (order.size() + batch_size - 1) / batch_size;

  auto make_batch = [&](std::size_t b) {
    const std::size_t lo = b * batch_size;
    const std::size_t hi = std::min(order.size(), lo + batch_size);
    std::vector<Image> views;
    Batch out;
    views.reserve(hi - lo);
    out.labels.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t idx = order[i];
      views.push_back(augment_indexed(ds.images[idx], scheme, seed, epoch, idx));
      out.labels.push_back(ds.labels[idx]);
    }
    out.x = stack_images(views);
    return out;
  };

  if (workers <= 1) {
    for (std::size_t b = 0; b < n_batches; ++b) consume(b, make_batch(b));
    return;
  }

  OrderedBatchQueue<Batch> queue(static_cast<std::size_t>(workers) * 2);
  std::atomic<std::size_t> next_batch{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t b = next_batch.fetch_add(1);
        if (b >= n_batches) return;
        queue.push(b, make_batch(b));
      }
    });
  }
  try {
    for (std::size_t b = 0; b < n_batches; ++b) {
      auto item = queue.pop();
      consume(b, std::move(*item));
    }
  } catch (...) {
    queue.abort();
    for (std::thread& t : pool) t.join();
    throw;
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace augb
