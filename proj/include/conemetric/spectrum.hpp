#pragma once

#include <vector>

#include "conemetric/common.hpp"

namespace conemetric {

struct EigenMode {
  int j = 0;
  int ell = 0;
  double lambda = 0.0;
  int multiplicity = 1;
  bool simple = true;  // j = 0: the log r branch is excluded, so the mode is simple
};

// All football modes with lambda <= lambda_max, sorted by lambda then j.
std::vector<EigenMode> football_eigenvalues(double beta, double lambda_max);

double football_lambda(double beta, int j, int ell);

// Closed-form count with multiplicity of eigenvalues <= lambda (or < lambda when strict).
int football_count(double beta, double lambda, bool strict = false, double tol = 1e-9);

// Radial factor R(r) of the eigenfunction R(r) cos(j theta); unit L^2 norm for the
// area element beta sin r dr dtheta.
class FootballEigenfunction {
public:
  FootballEigenfunction(double beta, int j, int ell);
  double operator()(double r) const;
  double derivative(double r) const;
  double lambda() const;
  double order() const { return nu_; }
  double norm_constant() const { return norm_; }

private:
  double gegenbauer(int n, double a, double t) const;
  double beta_, nu_, alpha_, norm_;
  int j_, ell_;
};

FootballEigenfunction football_eigenfunction(double beta, int j, int ell);

struct SturmLiouvilleResult {
  std::vector<double> eigenvalues;           // extrapolated
  std::vector<std::vector<double>> levels;   // raw values at n, 2n, 4n
  std::vector<int> grids;
};

// Friedrichs radial problem of angular index j on the football, lowest `count` eigenvalues.
SturmLiouvilleResult radial_sturm_liouville(double beta, int j, int n_grid, int count = 5);

// Count with multiplicity from the numerical oracle.
int numeric_football_count(double beta, double lambda, bool strict, int n_grid = 1024, double tol = 1e-6);

struct TriangleMode {
  int j = 1;
  int ell = 0;
  double lambda = 0.0;
};

std::vector<TriangleMode> triangle_dirichlet_eigenvalues(double beta, double lambda_max);
int triangle_count(double beta, double lambda, bool strict, double tol = 1e-9);

struct FlowCrossing {
  int interval = 0;  // samples interval, interval+1
  double beta_lo = 0.0, beta_hi = 0.0;
  double beta_star = 0.0;
  int j = 0, ell = 0;
  int jump = 0;  // change of the strict count across the interval
};

struct FlowReport {
  std::vector<double> beta;
  std::vector<int> below;     // #{lambda < 2}
  std::vector<int> at_most;   // #{lambda <= 2}
  std::vector<FlowCrossing> crossings;
};

FlowReport eigenvalue_flow(const std::vector<double>& beta_path, int j_max);

}  // namespace conemetric
