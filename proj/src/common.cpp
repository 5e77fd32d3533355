#include "conemetric/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace conemetric {

int int_part(double x, double tol) {
  double r = std::round(x);
  if (std::abs(x - r) <= tol) return static_cast<int>(r);
  return static_cast<int>(std::floor(x));
}

bool is_integer(double x, double tol) { return std::abs(x - std::round(x)) <= tol; }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("loglog_slope: need at least two samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONEMETRIC_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), hw);
  }
  return hw;
}

}  // namespace conemetric

#include <atomic>
#include <exception>
#include <mutex>

namespace conemetric {

void parallel_for(int n, const std::function<void(int)>& f) {
  unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max(n, 1)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace conemetric
