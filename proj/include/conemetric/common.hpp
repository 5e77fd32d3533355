#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conemetric {

using cplx = std::complex<double>;

inline constexpr const char* kVersion = "0.3.1";

// Raised when inputs violate a documented precondition or admissibility rule.
class InvalidInput : public std::invalid_argument {
public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when an iterative method fails to converge.
class SolverFailure : public std::runtime_error {
public:
  explicit SolverFailure(const std::string& what, double last_residual = -1.0)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

private:
  double last_residual_;
};

// Integer part with a small tolerance so that 2.9999999999 counts as 3.
int int_part(double x, double tol = 1e-9);
bool is_integer(double x, double tol = 1e-9);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Worker cap from CONEMETRIC_THREADS (defaults to hardware concurrency).
unsigned worker_count();

// Runs f(0..n-1) on up to worker_count() threads; rethrows the first exception.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace conemetric
