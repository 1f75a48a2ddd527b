#include "dzo/thread_pool.hpp"

#include <algorithm>

namespace dzo {

ThreadPool::ThreadPool(int workers) : workers_(std::max(1, workers)) {
  for (int t = 1; t < workers_; ++t) threads_.emplace_back([this] { WorkerLoop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void ThreadPool::ParallelFor(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (threads_.empty()) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::unique_lock<std::mutex> lock(mu_);
  job_ = &fn;
  count_ = count;
  next_ = 0;
  pending_ = count;
  error_ = nullptr;
  ++generation_;
  wake_.notify_all();
  // The calling thread works too.
  while (next_ < count_) {
    const int i = next_++;
    lock.unlock();
    try {
      fn(i);
    } catch (...) {
      lock.lock();
      if (!error_) error_ = std::current_exception();
      lock.unlock();
    }
    lock.lock();
    --pending_;
  }
  done_.wait(lock, [this] { return pending_ == 0; });
  job_ = nullptr;
  if (error_) std::rethrow_exception(error_);
}

void ThreadPool::WorkerLoop() {
  long seen = 0;
  std::unique_lock<std::mutex> lock(mu_);
  while (true) {
    wake_.wait(lock, [&] { return stop_ || (generation_ != seen && job_ && next_ < count_); });
    if (stop_) return;
    seen = generation_;
    while (job_ && next_ < count_) {
      const int i = next_++;
      const auto* job = job_;
      lock.unlock();
      try {
        (*job)(i);
      } catch (...) {
        lock.lock();
        if (!error_) error_ = std::current_exception();
        lock.unlock();
      }
      lock.lock();
      if (--pending_ == 0) done_.notify_all();
    }
  }
}

}  // namespace dzo
