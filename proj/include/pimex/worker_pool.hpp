#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pimex {

/// Fixed set of threads running index-parallel loops. The calling thread
/// takes part in every loop, so a pool of size n owns n - 1 threads and a
/// pool of size 1 runs everything inline.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return threads_.size() + 1; }

  /// Runs task(i) for every i in [0, count) and waits for all of them. If
  /// any task throws, the exception of the lowest failing index is rethrown
  /// after the loop drains.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

 private:
  void worker_loop();
  void drain();

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  bool stopping_ = false;
  std::size_t generation_ = 0;

  // Current loop, guarded by mutex_.
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  std::size_t active_ = 0;
  std::vector<std::exception_ptr> errors_;
};

}  // namespace pimex
