#include "graphfam/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace graphfam {

namespace {
thread_local bool tls_in_worker = false;
}

struct ThreadPool::Impl {
  std::mutex mutex;
  std::condition_variable cv_work;
  std::condition_variable cv_done;
  std::vector<std::thread> threads;

  // Current job; one job outstanding at a time (guarded by job_mutex).
  std::mutex job_mutex;
  const std::function<void(std::int64_t, std::int64_t)>* fn = nullptr;
  std::int64_t n = 0;
  std::int64_t grain = 0;
  std::int64_t chunks = 0;
  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> done{0};
  std::uint64_t generation = 0;
  std::exception_ptr error;
  bool shutdown = false;

  void worker_loop() {
    tls_in_worker = true;
    std::uint64_t seen = 0;
    while (true) {
      {
        std::unique_lock lock(mutex);
        cv_work.wait(lock, [&] { return shutdown || generation != seen; });
        if (shutdown) return;
        seen = generation;
      }
      work();
    }
  }

  void work() {
    // Nested parallel_for calls from inside a chunk must run inline, also when
    // the chunk executes on the submitting thread.
    bool saved = tls_in_worker;
    tls_in_worker = true;
    while (true) {
      std::int64_t c = next.fetch_add(1);
      if (c >= chunks) break;
      std::int64_t begin = c * grain;
      std::int64_t end = std::min(begin + grain, n);
      try {
        (*fn)(begin, end);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
      }
      if (done.fetch_add(1) + 1 == chunks) {
        std::lock_guard lock(mutex);
        cv_done.notify_all();
      }
    }
    tls_in_worker = saved;
  }
};

ThreadPool::ThreadPool() : impl_(new Impl) {
  set_workers(0);
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(impl_->mutex);
    impl_->shutdown = true;
  }
  impl_->cv_work.notify_all();
  for (auto& t : impl_->threads) t.join();
  delete impl_;
}

ThreadPool& ThreadPool::instance() {
  static ThreadPool pool;
  return pool;
}

void ThreadPool::set_workers(int workers) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  {
    std::lock_guard lock(impl_->mutex);
    impl_->shutdown = true;
  }
  impl_->cv_work.notify_all();
  for (auto& t : impl_->threads) t.join();
  impl_->threads.clear();
  impl_->shutdown = false;
  workers_ = workers;
  for (int i = 0; i + 1 < workers; ++i)
    impl_->threads.emplace_back([this] { impl_->worker_loop(); });
}

void ThreadPool::run(std::int64_t chunks, std::int64_t n, std::int64_t grain,
                     const std::function<void(std::int64_t, std::int64_t)>& fn) {
  std::lock_guard job_lock(impl_->job_mutex);
  {
    std::lock_guard lock(impl_->mutex);
    impl_->fn = &fn;
    impl_->n = n;
    impl_->grain = grain;
    impl_->chunks = chunks;
    impl_->next.store(0);
    impl_->done.store(0);
    impl_->error = nullptr;
    ++impl_->generation;
  }
  impl_->cv_work.notify_all();
  impl_->work();  // the submitting thread participates
  {
    std::unique_lock lock(impl_->mutex);
    impl_->cv_done.wait(lock, [&] { return impl_->done.load() == impl_->chunks; });
    impl_->fn = nullptr;
    if (impl_->error) std::rethrow_exception(impl_->error);
  }
}

void parallel_for(std::int64_t n, std::int64_t grain,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  if (grain < 1) grain = 1;
  const std::int64_t chunks = (n + grain - 1) / grain;
  ThreadPool& pool = ThreadPool::instance();
  if (tls_in_worker || pool.workers() <= 1 || chunks <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c)
      fn(c * grain, std::min((c + 1) * grain, n));
    return;
  }
  pool.run(chunks, n, grain, fn);
}

}  // namespace graphfam
