#include "sddete/parallel.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sddete::parallel {

namespace {

std::atomic<std::size_t> g_workers{1};
thread_local bool t_inside_worker = false;

}  // namespace

void set_worker_count(std::size_t n) { g_workers.store(n == 0 ? 1 : n); }

std::size_t worker_count() { return g_workers.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;

  std::mutex err_mx;
  std::size_t err_index = SIZE_MAX;
  std::exception_ptr err;

  auto record = [&](std::size_t i, std::exception_ptr e) {
    std::lock_guard lock(err_mx);
    if (i < err_index) {
      err_index = i;
      err = std::move(e);
    }
  };

  std::size_t workers = g_workers.load();
  if (workers <= 1 || n == 1 || t_inside_worker) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        record(i, std::current_exception());
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }

  std::atomic<std::size_t> next{0};
  auto run = [&] {
    bool prev = t_inside_worker;
    t_inside_worker = true;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (...) {
        record(i, std::current_exception());
      }
    }
    t_inside_worker = prev;
  };

  std::vector<std::thread> threads;
  std::size_t spawn = (workers < n ? workers : n) - 1;
  threads.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) threads.emplace_back(run);
  run();
  for (auto& t : threads) t.join();

  if (err) std::rethrow_exception(err);
}

}  // namespace sddete::parallel
