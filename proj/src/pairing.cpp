#include "conemetric/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace conemetric {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int point_components(double beta) {
  if (!(beta > 0.0)) throw InvalidInput("pairing: beta must be positive");
  return beta > 1.0 ? std::max(int_part(beta), 1) : 1;
}

namespace {

struct Fit {
  double c0 = 0.0;
  std::vector<double> a1, a2;
  double rms = 0.0;
  bool ok = false;
};

Fit fit_annulus(const std::vector<ConeSample>& s, double beta, double lo, double hi) {
  const int L = point_components(beta);
  std::vector<const ConeSample*> pts;
  for (auto& x : s)
    if (x.r >= lo && x.r <= hi) pts.push_back(&x);
  const int nb = 3 + 4 * L;
  Fit f;
  if (static_cast<int>(pts.size()) < 2 * nb) return f;
  MatrixXd M(pts.size(), nb);
  VectorXd y(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    double r = pts[i]->r, th = pts[i]->theta;
    M(i, 0) = 1.0;
    M(i, 1) = r * r;
    M(i, 2) = r * r * r * r;
    for (int l = 1; l <= L; ++l) {
      double p = std::pow(r, l / beta), c = std::cos(l * th), sn = std::sin(l * th);
      M(i, 4 * l - 1) = p * c;
      M(i, 4 * l) = p * sn;
      M(i, 4 * l + 1) = p * r * r * c;
      M(i, 4 * l + 2) = p * r * r * sn;
    }
    y(i) = pts[i]->value;
  }
  // Column scaling keeps the normal equations out of it; QR handles the rest.
  VectorXd scale = M.colwise().norm().transpose();
  for (int j = 0; j < nb; ++j)
    if (scale(j) > 0.0) M.col(j) /= scale(j);
  VectorXd c = M.colPivHouseholderQr().solve(y);
  f.rms = std::sqrt((M * c - y).squaredNorm() / y.size());
  for (int j = 0; j < nb; ++j)
    if (scale(j) > 0.0) c(j) /= scale(j);
  f.c0 = c(0);
  for (int l = 1; l <= L; ++l) {
    f.a1.push_back(c(4 * l - 1));
    f.a2.push_back(c(4 * l));
  }
  f.ok = true;
  return f;
}

}  // namespace

PointCoeffs extract_eigf_coeffs(const std::vector<ConeSample>& samples, double beta, int point, double r0, double r1,
                                double r2) {
  if (!(r0 > 0.0 && r1 > r0 && r2 > r1)) throw InvalidInput("extract_eigf_coeffs: radii must increase");
  Fit all = fit_annulus(samples, beta, r0, r2);
  if (!all.ok) throw InvalidInput("extract_eigf_coeffs: too few samples in the annulus");
  PointCoeffs pc;
  pc.point = point;
  pc.beta = beta;
  pc.c0 = all.c0;
  pc.a1 = all.a1;
  pc.a2 = all.a2;
  pc.residual = all.rms;
  Fit in = fit_annulus(samples, beta, r0, r1), out = fit_annulus(samples, beta, r1, r2);
  if (in.ok && out.ok) {
    for (size_t l = 0; l < in.a1.size(); ++l)
      pc.disagreement = std::max({pc.disagreement, std::abs(in.a1[l] - out.a1[l]), std::abs(in.a2[l] - out.a2[l])});
  }
  pc.reliable = pc.residual <= 1e-4 && pc.disagreement <= 1e-4;
  return pc;
}

PointCoeffs extract_eigf_coeffs(const DiscreteConicMetric& metric, const DiscreteFunction& phi, int point) {
  auto s = cone_samples(metric, point, phi, 0.05, 0.2);
  return extract_eigf_coeffs(s, metric.problem.beta.beta.at(point), point);
}

Eigen::VectorXd DirectionCoeffs::flat() const {
  VectorXd v(2 * K());
  int k = 0;
  for (size_t j = 0; j < beta.size(); ++j)
    for (size_t m = 0; m < e1[j].size(); ++m) {
      v(k++) = e1[j][m];
      v(k++) = e2[j][m];
    }
  return v;
}

int DirectionCoeffs::K() const {
  int k = 0;
  for (auto& e : e1) k += static_cast<int>(e.size());
  return k;
}

void direction_coeffs(const CoeffVector& A, double beta0, std::vector<double>& e1, std::vector<double>& e2) {
  if (!(beta0 > 0.0)) throw InvalidInput("direction_coeffs: beta0 must be positive");
  e1.clear();
  e2.clear();
  for (int j = 1; j <= A.J(); ++j) {
    double s = std::pow(beta0, -double(j) / beta0);
    e1.push_back(s * A.A[j - 1].real());
    e2.push_back(s * A.A[j - 1].imag());
  }
}

DirectionCoeffs direction_coeffs(const std::vector<CoeffVector>& A, const std::vector<double>& beta) {
  if (A.size() != beta.size()) throw InvalidInput("direction_coeffs: one coefficient vector per cone point");
  DirectionCoeffs d;
  d.beta = beta;
  for (size_t j = 0; j < A.size(); ++j) {
    if (A[j].J() != point_components(beta[j]))
      throw InvalidInput("direction_coeffs: cone point needs max([beta], 1) coefficients");
    std::vector<double> a, b;
    direction_coeffs(A[j], beta[j], a, b);
    d.e1.push_back(a);
    d.e2.push_back(b);
  }
  return d;
}

Eigen::MatrixXd pairing_matrix(const std::vector<EigenCoeffs>& eig) {
  if (eig.empty()) return MatrixXd(0, 0);
  int K = 0;
  for (auto& p : eig[0].points) K += point_components(p.beta);
  MatrixXd B = MatrixXd::Zero(eig.size(), 2 * K);
  for (size_t i = 0; i < eig.size(); ++i) {
    if (eig[i].points.size() != eig[0].points.size()) throw InvalidInput("pairing_matrix: shape mismatch");
    int col = 0;
    for (auto& p : eig[i].points) {
      const int L = point_components(p.beta);
      if (static_cast<int>(p.a1.size()) != L || static_cast<int>(p.a2.size()) != L)
        throw InvalidInput("pairing_matrix: shape mismatch");
      // The weight m appears only for points with beta > 1.
      for (int m = 1; m <= L; ++m) {
        double wm = p.beta > 1.0 ? m : 1.0;
        B(i, col++) = wm * p.a1[m - 1];
        B(i, col++) = wm * p.a2[m - 1];
      }
    }
  }
  return B;
}

double pairing_B(const EigenCoeffs& eig, const DirectionCoeffs& dir) {
  if (eig.points.size() != dir.beta.size()) throw InvalidInput("pairing_B: shape mismatch");
  for (size_t j = 0; j < dir.beta.size(); ++j)
    if (dir.e1[j].size() != eig.points[j].a1.size()) throw InvalidInput("pairing_B: shape mismatch");
  MatrixXd row = pairing_matrix({eig});
  return row.row(0).dot(dir.flat());
}

PairingIntegral boundary_pairing_integral(const std::vector<ExpansionTerm>& phi, const std::vector<ExpansionTerm>& vdot,
                                          const std::vector<double>& epsilons, double beta) {
  if (epsilons.empty()) throw InvalidInput("boundary_pairing_integral: no radii");
  if (!(beta > 0.0)) throw InvalidInput("boundary_pairing_integral: beta must be positive");
  int kmax = 0;
  for (auto& t : phi) kmax = std::max(kmax, t.k);
  for (auto& t : vdot) kmax = std::max(kmax, t.k);
  const int N = 4 * kmax + 16;
  PairingIntegral out;
  // Exponents of eps that survive the angular integration.
  std::vector<double> powers;
  for (auto& a : phi)
    for (auto& b : vdot) {
      if (a.k != b.k) continue;
      double prod = a.k == 0 ? a.a * b.a : a.a * b.a + a.b * b.b;
      if (prod == 0.0 || a.gamma == b.gamma) continue;
      double p = a.gamma + b.gamma;
      if (std::abs(p) < 1e-12) {
        out.closed_form += M_PI * beta * (a.gamma - b.gamma) * prod * (a.k == 0 ? 2.0 : 1.0);
        continue;
      }
      if (p < 0.0) throw InvalidInput("boundary_pairing_integral: divergent term, exponents do not match");
      if (std::none_of(powers.begin(), powers.end(), [&](double q) { return std::abs(q - p) < 1e-12; }))
        powers.push_back(p);
    }
  std::sort(powers.begin(), powers.end());
  auto eval = [](const std::vector<ExpansionTerm>& f, double r, double th, double& val, double& dr) {
    val = dr = 0.0;
    for (auto& t : f) {
      double ang = t.a * std::cos(t.k * th) + t.b * std::sin(t.k * th);
      double p = std::pow(r, t.gamma);
      val += p * ang;
      dr += t.gamma * p / r * ang;
    }
  };
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw InvalidInput("boundary_pairing_integral: radii must be positive");
    double sum = 0.0;
    for (int k = 0; k < N; ++k) {
      double th = 2.0 * M_PI * k / N, f, fr, v, vr;
      eval(phi, eps, th, f, fr);
      eval(vdot, eps, th, v, vr);
      sum += (v * fr - f * vr) * beta * eps;
    }
    out.values.push_back(sum * 2.0 * M_PI / N);
  }
  auto [mn, mx] = std::minmax_element(out.values.begin(), out.values.end());
  out.variation = *mx - *mn;
  if (powers.empty()) {
    double s = 0.0;
    for (double v : out.values) s += v;
    out.limit = s / out.values.size();
    return out;
  }
  if (epsilons.size() < powers.size() + 1)
    throw InvalidInput("boundary_pairing_integral: too few radii to extrapolate");
  MatrixXd M(epsilons.size(), powers.size() + 1);
  VectorXd y(epsilons.size());
  for (size_t i = 0; i < epsilons.size(); ++i) {
    M(i, 0) = 1.0;
    for (size_t j = 0; j < powers.size(); ++j) M(i, j + 1) = std::pow(epsilons[i], powers[j]);
    y(i) = out.values[i];
  }
  out.limit = M.colPivHouseholderQr().solve(y)(0);
  return out;
}

SolutionSpace solution_space(const MatrixXd& B, double rel_tol) {
  SolutionSpace s;
  const int n = static_cast<int>(B.cols());
  if (B.rows() == 0) {
    s.dim = n;
    s.kernel = MatrixXd::Identity(n, n);
    return s;
  }
  Eigen::JacobiSVD<MatrixXd> svd(B, Eigen::ComputeFullV);
  s.singular_values = svd.singularValues();
  double smax = s.singular_values.size() ? s.singular_values(0) : 0.0;
  // A matrix of pure roundoff has rank 0, not full rank relative to itself.
  const double cut = std::max(rel_tol * smax, kAbsRankFloor);
  for (int i = 0; i < s.singular_values.size(); ++i)
    if (s.singular_values(i) > cut) ++s.rank;
  s.dim = n - s.rank;
  s.kernel = svd.matrixV().rightCols(s.dim);
  return s;
}

const char* to_string(DeformationCase c) {
  switch (c) {
    case DeformationCase::unobstructed: return "unobstructed";
    case DeformationCase::partial_rigidity: return "partial_rigidity";
    case DeformationCase::rigidity: return "rigidity";
  }
  return "?";
}

CaseReport classify_case(int ell, int K, int K0, int rank, int k) {
  if (ell < 0 || K < 1 || K0 < 0 || K0 > K || rank < 0 || rank > ell)
    throw InvalidInput("classify_case: inconsistent inputs");
  if (k >= 3 && ell > 2 * K0) throw InvalidInput("classify_case: l exceeds 2 K0, impossible with three or more cone points");
  if (ell > 2 * K) throw InvalidInput("classify_case: l exceeds 2K");
  CaseReport r;
  r.dimension = 2 * K - ell;
  r.kernel_dim = 2 * K - rank;
  r.degenerate = rank < ell;
  if (ell == 0)
    r.kind = DeformationCase::unobstructed;
  else if (K == K0 && ell == 2 * K0)
    r.kind = DeformationCase::rigidity;
  else
    r.kind = DeformationCase::partial_rigidity;
  return r;
}

namespace {

double vfun(const CoeffVector& A, int J, double rho, cplx z) {
  cplx q = 0.0;
  for (int l = 1; l <= J; ++l) q += A.A[l - 1] * std::pow(z, J - l);
  return std::log(std::abs(std::pow(z, J) + std::pow(rho, J) * q));
}

// Central difference weights for the k-th derivative on nodes -p..p (Fornberg).
std::vector<double> central_weights(int k, int p) {
  const int n = 2 * p + 1;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = i - p;
  std::vector<std::vector<double>> c(n, std::vector<double>(k + 1, 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, k);
    double c2 = 1.0, c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s) c[i][s] = c1 * (s * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s) c[j][s] = (c4 * c[j][s] - s * c[j][s - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][k];
  return w;
}

}  // namespace

double vdot_vanishing_check(const CoeffVector& A, int J, int k, double h) {
  if (J < 1 || A.J() != J) throw InvalidInput("vdot_vanishing_check: A must have J components");
  if (k < 1 || k > J) throw InvalidInput("vdot_vanishing_check: need 1 <= k <= J");
  if (!(h > 0.0)) throw InvalidInput("vdot_vanishing_check: step must be positive");
  const int p = (k + 1) / 2;
  auto w = central_weights(k, p);
  double fact = 1.0;
  for (int i = 2; i <= J; ++i) fact *= i;
  double sup = 0.0;
  const int N = 64;
  for (int t = 0; t < N; ++t) {
    cplx z = std::polar(0.5, 2.0 * M_PI * t / N);
    double d = 0.0;
    for (int i = -p; i <= p; ++i) d += w[i + p] * vfun(A, J, i * h, z);
    d /= std::pow(h, k);
    if (k == J) {
      cplx s = 0.0;
      for (int l = 1; l <= J; ++l) s += A.A[l - 1] / std::pow(z, l);
      d -= fact * s.real();
    }
    sup = std::max(sup, std::abs(d));
  }
  return sup;
}

FlatnessReport eigenvalue_flatness_check(double beta, const CoeffVector& split_A, const std::vector<double>& rho) {
  if (!(beta > 1.0)) throw InvalidInput("eigenvalue_flatness_check: the split pole needs beta > 1");
  const int J = split_A.J();
  if (J < 1 || J > int_part(beta)) throw InvalidInput("eigenvalue_flatness_check: need 1 <= J <= [beta]");
  if (rho.size() < 2) throw InvalidInput("eigenvalue_flatness_check: need at least two values of rho");
  // Roots of z^J + A_1 z^{J-1} + ... + A_J; the split points are rho times these.
  auto w = monic_roots(split_A.A);
  // With u = s^{2 beta}: cos r = (1-u)/(1+u) and the radial area density is 2 beta du / (1+u)^2.
  const double lambda = 2.0;
  const double norm2 = 2.0 * M_PI * beta * (2.0 / 3.0);  // int cos^2 r dA
  auto radial = [&](double a) {
    // int_0^a phi^2 (area density in s) ds, via u = s^{2 beta}
    double U = std::pow(a, 2.0 * beta);
    static const double xg[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static const double wg[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) {
      double u = 0.5 * U * (xg[i] + 1.0);
      double c = (1.0 - u) / (1.0 + u);
      sum += wg[i] * c * c * 2.0 * beta / ((1.0 + u) * (1.0 + u));
    }
    return 0.5 * U * sum / norm2;
  };
  FlatnessReport rep;
  rep.J = J;
  rep.rho = rho;
  std::vector<double> sorted = rho;
  std::sort(sorted.begin(), sorted.end());
  for (double r : rho) {
    if (!(r > 0.0)) throw InvalidInput("eigenvalue_flatness_check: rho must be positive");
    // Jensen: the angular mean of log|P| at radius s is sum_i log max(s, r|w_i|), so its rho-derivative is
    // (number of roots outside s) / rho.
    double acc = 0.0;
    for (auto& wi : w) acc += 2.0 * M_PI * radial(r * std::abs(wi)) / r;
    rep.lambda_rho.push_back(-2.0 * lambda * (beta - 1.0) / J * acc);
    // lambda(rho) - 2 = int_0^rho lambda_rho, midpoint rule.
    double shift = 0.0;
    for (auto& wi : w) {
      const int n = 64;
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        double t = r * (i + 0.5) / n;
        s += 2.0 * M_PI * radial(t * std::abs(wi)) / t;
      }
      shift += s * r / n;
    }
    rep.lambda_shift.push_back(-2.0 * lambda * (beta - 1.0) / J * shift);
  }
  std::vector<double> ad, as;
  for (size_t i = 0; i < rho.size(); ++i) {
    ad.push_back(std::abs(rep.lambda_rho[i]));
    as.push_back(std::abs(rep.lambda_shift[i]));
  }
  rep.slope_derivative = loglog_slope(rho, ad);
  rep.slope_shift = loglog_slope(rho, as);
  rep.vanishing = J == 1 || rep.slope_shift >= J - 1e-6;
  return rep;
}

}  // namespace conemetric
