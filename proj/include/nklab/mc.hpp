#pragma once

#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <cstdlib>
#include <span>
#include <thread>
#include <vector>

#include "nklab/common.hpp"

namespace nklab::mc {

inline int thread_cap_from_env() {
  if (const char* s = std::getenv("NK_LAB_THREADS")) {
    int v = std::atoi(s);
    if (v >= 1) return v;
  }
  return 0;
}

inline int default_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int cap = thread_cap_from_env();
  return cap >= 1 ? std::min(hw, cap) : hw;
}

/// Evaluate f(i) for i in [0, n): the output array depends only on f, never
/// on the worker partition. Exceptions from workers are rethrown.
template <class F>
std::vector<double> map_indexed(std::size_t n, int threads, F&& f) {
  std::vector<double> out(n);
  if (threads <= 1 || n < 512) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string what;
  std::mutex what_mutex;
  auto worker = [&] {
    constexpr std::size_t chunk = 256;
    for (;;) {
      std::size_t i0 = cursor.fetch_add(chunk);
      if (i0 >= n || failed.load()) return;
      std::size_t i1 = std::min(n, i0 + chunk);
      try {
        for (std::size_t i = i0; i < i1; ++i) out[i] = f(i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(what_mutex);
        what = e.what();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int nt = std::min<std::size_t>(threads, n / 256 + 1);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load()) throw Error("mc::map_indexed worker failed: " + what);
  return out;
}

/// Index-ordered pairwise summation; deterministic and partition-independent.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0;
    for (double v : x) s += v;
    return s;
  }
  std::size_t half = x.size() / 2;
  return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

struct Stats {
  std::size_t n = 0;
  double mean = 0;
  double se = 0;
};

inline Stats stats_of(std::span<const double> x) {
  Stats s;
  s.n = x.size();
  if (x.empty()) return s;
  s.mean = pairwise_sum(x) / static_cast<double>(x.size());
  if (x.size() < 2) return s;
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - s.mean) * (x[i] - s.mean);
  s.se = std::sqrt(pairwise_sum(sq) / (static_cast<double>(x.size()) * (x.size() - 1.0)));
  return s;
}

}  // namespace nklab::mc
