#include "conemetric/tridiag.hpp"

#include <cmath>
#include <limits>

#include "conemetric/common.hpp"

namespace conemetric {

int sturm_count(const SymTridiag& A, const std::vector<double>& m, double sigma) {
  const int n = A.size();
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < n; ++i) {
    double a = A.d[i] - sigma * m[i];
    q = i == 0 ? a : a - A.e[i - 1] * A.e[i - 1] / q;
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

double tridiag_eigenvalue(const SymTridiag& A, const std::vector<double>& m, int k, double rel_tol) {
  if (k < 0 || k >= A.size()) throw InvalidInput("tridiag_eigenvalue: index out of range");
  double lo = -1.0, hi = 1.0;
  while (sturm_count(A, m, lo) > k) lo *= 2.0;
  while (sturm_count(A, m, hi) <= k) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (sturm_count(A, m, mid) > k)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd tridiag_solve(const SymTridiag& A, const std::vector<double>& m, double sigma, const Eigen::VectorXd& b) {
  const int n = A.size();
  // Banded LU with partial pivoting (one extra superdiagonal of fill).
  std::vector<double> dl(n, 0.0), dd(n), du(n, 0.0), du2(n, 0.0);
  for (int i = 0; i < n; ++i) dd[i] = A.d[i] - sigma * m[i];
  for (int i = 0; i + 1 < n; ++i) {
    dl[i] = A.e[i];
    du[i] = A.e[i];
  }
  Eigen::VectorXd x = b;
  std::vector<int> piv(n, 0);
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i])) {
      double f = dd[i] != 0.0 ? dl[i] / dd[i] : 0.0;
      dl[i] = f;
      dd[i + 1] -= f * du[i];
      if (i + 2 < n) du2[i] = 0.0;
    } else {
      piv[i] = 1;
      double f = dd[i] / dl[i];
      dd[i] = dl[i];
      dl[i] = f;
      double t = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = t - f * dd[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (piv[i]) std::swap(x(i), x(i + 1));
    x(i + 1) -= dl[i] * x(i);
  }
  const double tiny = 1e-300;
  for (int i = n - 1; i >= 0; --i) {
    double s = x(i);
    if (i + 1 < n) s -= du[i] * x(i + 1);
    if (i + 2 < n) s -= du2[i] * x(i + 2);
    x(i) = s / (dd[i] != 0.0 ? dd[i] : tiny);
  }
  return x;
}

Eigen::VectorXd tridiag_eigenvector(const SymTridiag& A, const std::vector<double>& m, double lambda) {
  const int n = A.size();
  double shift = lambda + 1e-12 * std::max(1.0, std::abs(lambda));
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) x(i) += 0.01 * std::sin(1.0 + 7.0 * i);
  for (int it = 0; it < 3; ++it) {
    Eigen::VectorXd mx(n);
    for (int i = 0; i < n; ++i) mx(i) = m[i] * x(i);
    x = tridiag_solve(A, m, shift, mx);
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += m[i] * x(i) * x(i);
    x /= std::sqrt(nrm);
  }
  // Sign convention: largest component positive.
  Eigen::Index imax;
  x.cwiseAbs().maxCoeff(&imax);
  if (x(imax) < 0) x = -x;
  return x;
}

}  // namespace conemetric
