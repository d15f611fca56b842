#pragma once

#include <cstdint>
#include <functional>

namespace graphfam {

/// Process-wide worker pool. Work is split into chunks whose boundaries depend
/// only on (n, grain), never on the worker count, so any computation with
/// disjoint chunk writes is bit-deterministic at every pool size.
class ThreadPool {
 public:
  static ThreadPool& instance();

  /// Resizes the pool; 0 means hardware concurrency. Not safe while jobs run.
  void set_workers(int workers);
  int workers() const { return workers_; }

  ~ThreadPool();

 private:
  ThreadPool();
  friend void parallel_for(std::int64_t, std::int64_t,
                           const std::function<void(std::int64_t, std::int64_t)>&);
  void run(std::int64_t chunks, std::int64_t n, std::int64_t grain,
           const std::function<void(std::int64_t, std::int64_t)>& fn);

  struct Impl;
  Impl* impl_;
  int workers_ = 1;
};

/// Calls fn(begin, end) for consecutive chunks of [0, n) of size grain.
/// Runs inline when the pool has one worker or when called from inside a
/// worker thread (nested calls do not fan out).
void parallel_for(std::int64_t n, std::int64_t grain,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace graphfam
