#pragma once

#include <vector>

#include "conemetric/liouville.hpp"

namespace conemetric {

enum class GridKind { axisym, overset, disk };

struct ChartGrid {
  int chart = 0;
  double h = 0.0, L = 0.0, R = 0.0;  // spacing, half-width, radius of the PDE disk
  int n = 0;                         // nodes per side
  std::vector<int> index;            // n*n, unknown index or -1
  double coord(int i) const { return -L + i * h; }
};

struct PatchGrid {
  int point = 0;
  int home = 0;   // chart holding the local coordinate
  cplx center;    // cone point in home chart coordinates (0 on the disk)
  double beta = 1.0;
  double smax = 0.0, shole = 0.0;
  double hx = 0.0, xmax = 0.0;
  int nx = 0, nth = 0;
  int offset = 0;  // first unknown
  double log_kappa0 = 0.0;  // log of the cone normalization without the e^{2w(p)} factor
  int node(int i, int k) const { return offset + i * nth + k; }
  double x(int i) const { return xmax - i * hx; }
};

struct Grid {
  GridKind kind = GridKind::overset;
  // rotationally symmetric reduction: cell centres y_i on [-Y, Y], z = exp(y + i theta)
  std::vector<double> y;
  double hy = 0.0, Y = 0.0;
  // overset
  ChartGrid charts[2];
  std::vector<PatchGrid> patches;
  int unknowns = 0;
  // per unknown: singular background v and position on the sphere (or the plane)
  Eigen::VectorXd v;
  std::vector<Point3> pos;
};

// Builders return the geometry and the linear/nonlinear system.
void build_axisym(const ConicProblem& p, const MeshParams& m, bool half, Grid& g, DiscreteSystem& s,
                  std::vector<std::string>& warnings);
void build_overset(const ConicProblem& p, const MeshParams& m, Grid& g, DiscreteSystem& s,
                   std::vector<std::string>& warnings);
void build_disk(const ConicProblem& p, const MeshParams& m, Grid& g, DiscreteSystem& s);

// Mode-n tridiagonal problem (A, mass) for a rotationally symmetric metric.
void axisym_mode(const DiscreteConicMetric& metric, int mode, std::vector<double>& d, std::vector<double>& e,
                 std::vector<double>& mass);

double log_sech(double y);
double softplus(double t);
// C-infinity step from 0 (t <= 0) to 1 (t >= 1).
double smoothstep(double t);

struct EigenPairs {
  std::vector<double> lambda;
  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> residuals;
};
// Eigenpairs of A x = lambda diag(mass) x nearest sigma (shift-invert block Arnoldi).
EigenPairs shift_invert(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& mass, double sigma, int nev,
                        double tol);

}  // namespace conemetric
