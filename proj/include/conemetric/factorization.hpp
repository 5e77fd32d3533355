#pragma once

#include <Eigen/Dense>
#include <vector>

#include "conemetric/common.hpp"

namespace conemetric {

struct WeightVector {
  std::vector<double> b;

  int J() const { return static_cast<int>(b.size()); }
  // Checks sum = J, nonzero entries and no vanishing subset sum.
  void validate(double tol = 1e-9) const;
  bool all_ones(double tol = 1e-14) const;
};

struct CoeffVector {
  std::vector<cplx> A;  // A_1 .. A_J

  int J() const { return static_cast<int>(A.size()); }
  double rho() const;
  double theta() const;
  std::vector<cplx> Atilde() const;
};

struct RootConfiguration {
  std::vector<cplx> z;
  int branch_id = 0;
  double min_distance = 0.0;
  bool distinct = true;
  double condition = 1.0;
  bool near_discriminant = false;
};

struct ExpansionData {
  Eigen::MatrixXcd c;  // c(i, k-1) multiplies rho^k in z_i
  double theta = 0.0;
  int branch_id = 0;
};

CoeffVector forward_map(const std::vector<cplx>& z, const WeightVector& w);
inline CoeffVector forward_map(const RootConfiguration& Z, const WeightVector& w) { return forward_map(Z.z, w); }

// Newton recursion R_l = sum of l-th powers of the roots of z^J + A_1 z^{J-1} + ... + A_J.
std::vector<cplx> power_sums(const CoeffVector& A);

// Weighted power sums sum_j b_j z_j^l, l = 1..J.
std::vector<cplx> weighted_power_sums(const std::vector<cplx>& z, const std::vector<cplx>& b);

// Roots of the monic polynomial, Newton polished.
std::vector<cplx> monic_roots(const std::vector<cplx>& A);

struct InverseOptions {
  double min_step = 1e-8;
  double max_step = 0.05;
  double newton_tol = 1e-12;
  double detour = 0.7;  // size of the imaginary bend of the weight path
  double near_discriminant = 1e8;
};

struct InverseResult {
  std::vector<RootConfiguration> branches;  // J! entries, branch_id = start permutation rank
  bool collapse = false;                    // two branches ended at the same configuration
  bool near_discriminant = false;
};

// Thrown when a branch cannot be continued.
class ContinuationFailure : public SolverFailure {
public:
  ContinuationFailure(int branch, double s, const std::string& what)
      : SolverFailure(what), branch_(branch), s_(s) {}
  int branch() const { return branch_; }
  double s() const { return s_; }

private:
  int branch_;
  double s_;
};

InverseResult inverse_map(const CoeffVector& A, const WeightVector& w, const InverseOptions& opt = {});

struct JacobianResult {
  Eigen::MatrixXcd M;  // M(l-1, j) = l b_j z_j^{l-1}
  cplx determinant;
  double condition = 0.0;
  int rank = 0;
};

JacobianResult jacobian(const std::vector<cplx>& z, const WeightVector& w);

double multiplicative_error(const CoeffVector& A, const std::vector<cplx>& z, const WeightVector& w,
                            const std::vector<cplx>& samples);

ExpansionData expansion_coeffs(double theta, const std::vector<cplx>& Atilde, const WeightVector& w, int branch);

// Evaluates sum_k c_{ik} rho^k.
std::vector<cplx> expansion_eval(const ExpansionData& e, double rho);

// Q_{l,k}: coefficient of rho^{l+k} in (c_1 rho + ... + c_K rho^K)^l restricted to l_1 < l-1.
cplx q_term(int l, int k, const std::vector<cplx>& c);

struct BlowupChart {
  // Exact values from the explicit branch formulas.
  double R = 0.0, phi = 0.0;
  cplx z0, z0_1, z0_2;
  // Leading terms.
  double R_lead = 0.0, phi_lead = 0.0;
  cplx z0_2_lead;
  cplx c;          // c(theta, b)
  double cprime;   // |c'(theta, b)|
  cplx z1, z2;     // the branch itself
};

BlowupChart blowup_chart_J2(const CoeffVector& A, const WeightVector& w);

struct ClusterNode {
  std::vector<int> members;  // sorted indices
  double radius = 0.0;       // diameter of the subcluster
  double link = 0.0;         // single-linkage merge distance
};

std::vector<ClusterNode> cluster_tree(const std::vector<cplx>& points);

}  // namespace conemetric
