#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "conemetric/common.hpp"
#include "conemetric/factorization.hpp"
#include "conemetric/liouville.hpp"

namespace conemetric {

// Expansion coefficients of one eigenfunction near one cone point.
// beta > 1: a1[l-1], a2[l-1] multiply r^{l/beta} cos/sin(l theta), l = 1..[beta].
// beta < 1: c0 is the constant, a1[0], a2[0] are c'_1, c''_1.
struct PointCoeffs {
  int point = 0;
  double beta = 1.0;
  double c0 = 0.0;
  std::vector<double> a1, a2;
  double residual = 0.0;      // rms fit residual
  double disagreement = 0.0;  // largest coefficient difference between the two annuli
  bool reliable = true;
};

struct EigenCoeffs {
  std::vector<PointCoeffs> points;
};

// Least-squares fit on the annuli [r0, r1] and [r1, r2]; the reported coefficients come from
// the union. Flags the fit when the residual or the annulus disagreement exceeds 1e-4.
PointCoeffs extract_eigf_coeffs(const std::vector<ConeSample>& samples, double beta, int point = 0,
                                double r0 = 0.05, double r1 = 0.1, double r2 = 0.2);

// Same, sampling a discrete function of a solved metric.
PointCoeffs extract_eigf_coeffs(const DiscreteConicMetric& metric, const DiscreteFunction& phi, int point);

struct DirectionCoeffs {
  std::vector<double> beta;                       // per cone point
  std::vector<std::vector<double>> e1, e2;        // e'_{jm}, e''_{jm} (or d'_{j1}, d''_{j1})
  Eigen::VectorXd flat() const;                   // vector in R^{2K}
  int K() const;
};

// Inverts A_j = beta0^{j/beta0} (e'_j + i e''_j).
void direction_coeffs(const CoeffVector& A, double beta0, std::vector<double>& e1, std::vector<double>& e2);
DirectionCoeffs direction_coeffs(const std::vector<CoeffVector>& A, const std::vector<double>& beta);

// Number of direction components at a cone point: max([beta], 1).
int point_components(double beta);

double pairing_B(const EigenCoeffs& eig, const DirectionCoeffs& dir);

// Row i of the l x 2K matrix so that B(phi_i, v) = row_i . dir.flat().
Eigen::MatrixXd pairing_matrix(const std::vector<EigenCoeffs>& eig);

// A term r^{gamma} (a cos(k theta) + b sin(k theta)).
struct ExpansionTerm {
  double gamma = 0.0;
  int k = 0;
  double a = 0.0, b = 0.0;
};

struct PairingIntegral {
  double limit = 0.0;
  double closed_form = 0.0;  // 2 pi sum m (a'e' + a''e'') over matching pure modes
  std::vector<double> values;  // integral at each epsilon
  double variation = 0.0;      // max - min of the values
};

// Quadrature of the circle integral (vdot d_r phi - phi d_r vdot) beta r dtheta at r = eps,
// extrapolated to eps -> 0.
PairingIntegral boundary_pairing_integral(const std::vector<ExpansionTerm>& phi, const std::vector<ExpansionTerm>& vdot,
                                          const std::vector<double>& epsilons, double beta);

struct SolutionSpace {
  int rank = 0;
  int dim = 0;
  Eigen::MatrixXd kernel;  // 2K x dim, orthonormal columns
  Eigen::VectorXd singular_values;
};

// Singular values below max(rel_tol * sigma_max, kAbsRankFloor) count as zero. The floor is
// absolute because the rows come from L^2-normalized eigenfunctions.
constexpr double kAbsRankFloor = 1e-12;
SolutionSpace solution_space(const Eigen::MatrixXd& B, double rel_tol = 1e-8);

enum class DeformationCase { unobstructed, partial_rigidity, rigidity };
const char* to_string(DeformationCase c);

struct CaseReport {
  DeformationCase kind = DeformationCase::unobstructed;
  int dimension = 0;       // nominal 2K - l
  int kernel_dim = 0;      // 2K - rank
  bool degenerate = false; // rank < l, as for footballs
};

// k is the number of cone points; the bound l <= 2 K0 is enforced when k >= 3.
CaseReport classify_case(int ell, int K, int K0, int rank, int k = 3);

// k-th central difference in rho (step h) of log|z^J + rho^J (A_1 z^{J-1} + ... + A_J)| at rho = 0,
// on |z| = 0.5. For k < J returns the sup of the difference; for k = J the sup distance to
// J! Re sum A_l z^{-l}.
double vdot_vanishing_check(const CoeffVector& A, int J, int k, double h);

struct FlatnessReport {
  int J = 0;
  std::vector<double> rho;
  std::vector<double> lambda_rho;   // d lambda / d rho
  std::vector<double> lambda_shift; // lambda(rho) - 2 from integrating lambda_rho
  double slope_derivative = 0.0;
  double slope_shift = 0.0;
  bool vanishing = true;            // slope_shift >= J (always true when J = 1)
};

// First-order eigenvalue variation of cos r on the football when the south pole splits along A,
// with v(rho) = ((beta-1)/J) log|z^J + rho^J(A_1 z^{J-1} + ... )|. The angular integrals are exact
// (Jensen's formula); the radial ones use Gauss-Legendre quadrature.
FlatnessReport eigenvalue_flatness_check(double football_beta, const CoeffVector& split_A,
                                         const std::vector<double>& rho);

}  // namespace conemetric
