#ifndef QGRAPH_SWEEP_HPP
#define QGRAPH_SWEEP_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qgraph {

// Worker count for lambda sweeps: QGRAPH_THREADS if set, else the hardware count.
inline unsigned sweep_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QGRAPH_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return hw;
}

// out[i] = f(xs[i]), evaluated in contiguous chunks; the first exception is rethrown.
template <class T, class F>
std::vector<T> parallel_map(const std::vector<double>& xs, F&& f, unsigned threads = sweep_threads()) {
  std::vector<T> out(xs.size());
  const std::size_t n = xs.size();
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(1, n / 16)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(xs[i]);
    return out;
  }
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = n * t / threads, hi = n * (t + 1) / threads;
      try {
        for (std::size_t i = lo; i < hi; ++i) out[i] = f(xs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lk(m);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  if (n == 1) x[0] = a;
  for (std::size_t i = 0; n > 1 && i < n; ++i) x[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

}  // namespace qgraph

#endif  // QGRAPH_SWEEP_HPP
