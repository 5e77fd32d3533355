#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "conemetric/angles.hpp"
#include "conemetric/common.hpp"

namespace conemetric {

using Point3 = std::array<double, 3>;

// Stereographic coordinate z (z = 0 is the south pole) to the unit sphere.
Point3 sphere_point(cplx z);
Point3 north_pole();
// Chart coordinates: chart 0 is z, chart 1 is 1/z.
cplx chart_coord(const Point3& P, int chart);
double chordal(const Point3& a, const Point3& b);

enum class Background { round_sphere, flat_disk };

struct ConicProblem {
  Background background = Background::round_sphere;
  std::vector<Point3> points;  // for the flat disk: planar points stored as (x, y, 0)
  AngleVector beta;
  int K = 1;
  // Dirichlet data for the bounded part on |z| = 1 (flat disk only).
  std::function<double(double)> boundary;
  bool troyanov = false;
  bool subcritical = false;
  bool axisymmetric = false;  // two antipodal points

  void validate() const;
};

ConicProblem sphere_problem(const std::vector<cplx>& z, const std::vector<double>& beta, int K);
ConicProblem football_problem(double beta_south, double beta_north, int K = 1);
ConicProblem disk_problem(double beta, int K, std::function<double(double)> boundary = {});

struct MeshParams {
  int n = 64;            // resolution level
  int n_theta = 32;      // angular nodes around a cone point
  bool axisym = false;   // use the rotationally symmetric reduction
  double tol = 1e-9;     // Newton residual (sup norm, row-scaled)
  int max_iter = 60;
};

// Linear and nonlinear data of a discretized Liouville equation.
// Residual F(w) = A w + c - K * M0 .* exp(2w) - b; rows with pde[i] = 0 are constraints.
struct DiscreteSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd c, M0, b;
  Eigen::VectorXd q;  // area quadrature: area = sum q_i exp(2 w_i)
  std::vector<char> pde;
  int K = 1;

  int size() const { return static_cast<int>(c.size()); }
  Eigen::VectorXd residual(const Eigen::VectorXd& w) const;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& w) const;
  double area(const Eigen::VectorXd& w) const;
};

struct Grid;  // discretization geometry, defined in the implementation

struct SolveDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  double area = 0.0;
  double area_expected = 0.0;
  std::vector<std::string> warnings;
};

struct DiscreteConicMetric {
  ConicProblem problem;
  MeshParams mesh;
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const DiscreteSystem> system;
  Eigen::VectorXd w;  // bounded part, one value per unknown
  SolveDiagnostics diag;

  bool axisym() const;
  // Singular part coefficients (beta_j - 1) of log chordal distance.
  std::vector<double> singular_part() const;
  // Conformal factor u = v + w at the unknowns.
  Eigen::VectorXd u() const;
  double area() const { return system->area(w); }
  // Replaces w and refreshes the diagnostics.
  DiscreteConicMetric with_w(const Eigen::VectorXd& neww) const;
};

// v = sum (beta_j - 1) log d(P, P_j), with d the chordal distance (or |z - p| on the flat disk).
double singular_background(const ConicProblem& p, const Point3& P);

DiscreteConicMetric solve_liouville(const ConicProblem& problem, const MeshParams& mesh = {});

// Builds the discretization without solving; w is the initial guess.
DiscreteConicMetric discretize(const ConicProblem& problem, const MeshParams& mesh);

// A discrete function: nodal values (mode = -1), or for rotationally symmetric metrics a
// radial profile times cos(mode*theta) (parity 0) or sin(mode*theta) (parity 1).
struct DiscreteFunction {
  int mode = -1;
  int parity = 0;
  Eigen::VectorXd values;
};

struct LinearizedOperator {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd mass;  // M0 exp(2w) on pde rows, zero elsewhere
  std::vector<char> pde;
  int K = 1;
  // L psi = Delta_g psi - 2K psi on pde rows, the constraint residual elsewhere.
  Eigen::VectorXd apply(const Eigen::VectorXd& psi) const;
  // Largest |S_ij - S_ji| / max|S| for S = mass^{-1/2} A mass^{-1/2} on pde rows.
  double asymmetry() const;
};

LinearizedOperator linearized_operator(const DiscreteConicMetric& metric);

// e^{-2u} times the row-scaled residual: Delta_g psi + K_g - K e^{2 psi} for the metric's w.
Eigen::VectorXd normalized_residual(const DiscreteConicMetric& metric, const Eigen::VectorXd& psi);

struct ObstructionBundleFiber {
  std::vector<double> eigenvalues;
  std::vector<DiscreteFunction> eigenvectors;  // L^2(g) orthonormal
  std::vector<double> residuals;
  int ell = 0;
  double window = 0.0;
};

ObstructionBundleFiber spectrum_near_two(const DiscreteConicMetric& metric, double window = 0.5);

// Lowest eigenvalues of Delta_g, all Fourier modes (rotationally symmetric case) or near `shift`.
std::vector<double> low_spectrum(const DiscreteConicMetric& metric, int count, double shift = -0.5);

// Lowest eigenvalues of one Fourier mode of a rotationally symmetric metric.
std::vector<double> mode_spectrum(const DiscreteConicMetric& metric, int mode, int count);

struct ProjectedSolution {
  DiscreteFunction u;
  std::vector<double> Lambda;
  double residual = 0.0;  // row-scaled sup of the projected equation residual
  int iterations = 0;
};

ProjectedSolution projected_solve(const DiscreteConicMetric& metric, const ObstructionBundleFiber& fiber);

// L^2(g) inner product.
double inner(const DiscreteConicMetric& metric, const DiscreteFunction& a, const DiscreteFunction& b);

// Values of a discrete function near a cone point, in the normalized cone coordinate
// r (metric ~ dr^2 + beta^2 r^2 dtheta^2) restricted to r_lo <= r <= r_hi.
struct ConeSample {
  double r, theta, value;
};
std::vector<ConeSample> cone_samples(const DiscreteConicMetric& metric, int point, const DiscreteFunction& f,
                                     double r_lo, double r_hi);
std::vector<ConeSample> cone_samples_w(const DiscreteConicMetric& metric, int point, double r_lo, double r_hi);

struct FriedrichsFit {
  double a0 = 0.0;
  std::vector<double> a, b;  // coefficients of r^{j/beta} cos/sin(j theta), j = 1..J
  double slope = 0.0;        // decay rate of the remainder
  std::vector<double> radii, remainder;
};

// Removes the indicial terms j/beta < 2 from w near a cone point and fits the remainder decay.
FriedrichsFit friedrichs_fit(const DiscreteConicMetric& metric, int point, double r_lo = 0.05, double r_hi = 0.2);

// Closed-form conformal factor of the football relative to the round metric, at chart
// coordinate z (south cone point at z = 0).
double football_u(double beta, cplx z);

}  // namespace conemetric
