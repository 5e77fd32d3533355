#pragma once

#include <Eigen/Dense>
#include <vector>

namespace conemetric {

// Symmetric tridiagonal matrix: diagonal d (n), off-diagonal e (n-1).
struct SymTridiag {
  std::vector<double> d, e;
  int size() const { return static_cast<int>(d.size()); }
};

// Number of eigenvalues of A x = lambda M x below sigma (M diagonal, positive).
int sturm_count(const SymTridiag& A, const std::vector<double>& m, double sigma);

// k-th smallest generalized eigenvalue (0-based) by bisection.
double tridiag_eigenvalue(const SymTridiag& A, const std::vector<double>& m, int k, double rel_tol = 1e-15);

// Eigenvector for a computed eigenvalue by inverse iteration, normalized so x^T M x = 1.
Eigen::VectorXd tridiag_eigenvector(const SymTridiag& A, const std::vector<double>& m, double lambda);

// Solves (A - sigma M) x = b with partial pivoting.
Eigen::VectorXd tridiag_solve(const SymTridiag& A, const std::vector<double>& m, double sigma, const Eigen::VectorXd& b);

}  // namespace conemetric
