#include "pimex/worker_pool.hpp"

namespace pimex {

WorkerPool::WorkerPool(std::size_t workers) {
  const std::size_t extra = workers > 1 ? workers - 1 : 0;
  threads_.reserve(extra);
  for (std::size_t i = 0; i < extra; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::drain() {
  std::unique_lock lock(mutex_);
  while (next_ < count_) {
    const std::size_t index = next_++;
    const auto* task = task_;
    ++active_;
    lock.unlock();
    std::exception_ptr error;
    try {
      (*task)(index);
    } catch (...) {
      error = std::current_exception();
    }
    lock.lock();
    if (error) errors_[index] = error;
    if (--active_ == 0 && next_ >= count_) done_.notify_all();
  }
}

void WorkerPool::worker_loop() {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
    }
    drain();
  }
}

void WorkerPool::parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  if (threads_.empty()) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    task_ = &task;
    count_ = count;
    next_ = 0;
    active_ = 0;
    errors_.assign(count, nullptr);
    ++generation_;
  }
  wake_.notify_all();
  drain();
  std::vector<std::exception_ptr> errors;
  {
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return next_ >= count_ && active_ == 0; });
    task_ = nullptr;
    errors.swap(errors_);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pimex
