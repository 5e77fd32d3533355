#include "conemetric/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "conemetric/tridiag.hpp"

namespace conemetric {

double football_lambda(double beta, int j, int ell) {
  double s = j / beta + ell;
  return s * (s + 1.0);
}

std::vector<EigenMode> football_eigenvalues(double beta, double lambda_max) {
  if (!(beta > 0.0) || !(lambda_max > 0.0)) throw InvalidInput("football_eigenvalues: beta and lambda_max must be positive");
  const double tol = 1e-12 * std::max(1.0, lambda_max);
  std::vector<EigenMode> out;
  for (int j = 0; football_lambda(beta, j, 0) <= lambda_max + tol; ++j)
    for (int l = 0; football_lambda(beta, j, l) <= lambda_max + tol; ++l)
      out.push_back({j, l, football_lambda(beta, j, l), j == 0 ? 1 : 2, j == 0});
  std::sort(out.begin(), out.end(), [](const EigenMode& a, const EigenMode& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.j != b.j) return a.j < b.j;
    return a.ell < b.ell;
  });
  return out;
}

int football_count(double beta, double lambda, bool strict, double tol) {
  int n = 0;
  for (int j = 0; football_lambda(beta, j, 0) <= lambda + tol; ++j)
    for (int l = 0; football_lambda(beta, j, l) <= lambda + tol; ++l) {
      double v = football_lambda(beta, j, l);
      bool in = strict ? v < lambda - tol : v <= lambda + tol;
      if (in) n += j == 0 ? 1 : 2;
    }
  return n;
}

FootballEigenfunction::FootballEigenfunction(double beta, int j, int ell) : beta_(beta), j_(j), ell_(ell) {
  if (!(beta > 0.0) || j < 0 || ell < 0) throw InvalidInput("football_eigenfunction: invalid mode");
  nu_ = j / beta;
  alpha_ = nu_ + 0.5;
  // Gegenbauer norm: int (1-t^2)^{alpha-1/2} C_l^alpha(t)^2 dt.
  double logh = std::log(M_PI) + (1.0 - 2.0 * alpha_) * std::log(2.0) + std::lgamma(ell + 2.0 * alpha_) -
                std::lgamma(ell + 1.0) - std::log(ell + alpha_) - 2.0 * std::lgamma(alpha_);
  double angular = j == 0 ? 2.0 * M_PI : M_PI;
  norm_ = std::exp(-0.5 * (logh + std::log(beta * angular)));
}

double FootballEigenfunction::gegenbauer(int n, double a, double t) const {
  if (n < 0) return 0.0;
  double c0 = 1.0;
  if (n == 0) return c0;
  double c1 = 2.0 * a * t;
  for (int k = 1; k < n; ++k) {
    double c2 = (2.0 * t * (k + a) * c1 - (k + 2.0 * a - 1.0) * c0) / (k + 1.0);
    c0 = c1;
    c1 = c2;
  }
  return c1;
}

double FootballEigenfunction::operator()(double r) const {
  double s = std::sin(r);
  return norm_ * std::pow(s, nu_) * gegenbauer(ell_, alpha_, std::cos(r));
}

double FootballEigenfunction::derivative(double r) const {
  double s = std::sin(r), c = std::cos(r);
  double C = gegenbauer(ell_, alpha_, c);
  double dC = ell_ > 0 ? 2.0 * alpha_ * gegenbauer(ell_ - 1, alpha_ + 1.0, c) : 0.0;
  double lead = nu_ > 0.0 ? nu_ * std::pow(s, nu_ - 1.0) * c * C : 0.0;
  return norm_ * (lead - std::pow(s, nu_ + 1.0) * dC);
}

double FootballEigenfunction::lambda() const { return football_lambda(beta_, j_, ell_); }

FootballEigenfunction football_eigenfunction(double beta, int j, int ell) { return FootballEigenfunction(beta, j, ell); }

namespace {

// -phi'' + nu^2 phi = lambda sech^2(y) phi on the cylinder coordinate y = log tan(r/2),
// cell-centred grid, decaying (or bounded) exponential ghost values at the ends.
std::vector<double> sl_level(double nu, int n, double Y, int count) {
  const double h = 2.0 * Y / n;
  SymTridiag A;
  A.d.assign(n, 2.0 / (h * h) + nu * nu);
  A.e.assign(n - 1, -1.0 / (h * h));
  const double ghost = std::exp(-nu * h);
  A.d[0] -= ghost / (h * h);
  A.d[n - 1] -= ghost / (h * h);
  std::vector<double> m(n);
  for (int i = 0; i < n; ++i) {
    double y = -Y + (i + 0.5) * h;
    double c = std::cosh(y);
    m[i] = 1.0 / (c * c);
  }
  std::vector<double> ev(count);
  for (int k = 0; k < count; ++k) ev[k] = tridiag_eigenvalue(A, m, k);
  return ev;
}

}  // namespace

SturmLiouvilleResult radial_sturm_liouville(double beta, int j, int n_grid, int count) {
  if (!(beta > 0.0) || j < 0) throw InvalidInput("radial_sturm_liouville: invalid mode");
  if (n_grid < 64) throw InvalidInput("radial_sturm_liouville: n_grid must be at least 64");
  const double nu = j / beta;
  // Eigenfunctions decay like exp(-nu|y|); the potential like exp(-2|y|).
  const double Y = nu > 0.0 ? std::min(20.0, std::max(10.0, 40.0 / nu)) : 20.0;
  SturmLiouvilleResult res;
  for (int f = 1; f <= 4; f *= 2) {
    res.grids.push_back(n_grid * f);
    res.levels.push_back(sl_level(nu, n_grid * f, Y, count));
  }
  res.eigenvalues.resize(count);
  for (int k = 0; k < count; ++k) {
    double a = res.levels[0][k], b = res.levels[1][k], c = res.levels[2][k];
    double r1 = (4.0 * b - a) / 3.0, r2 = (4.0 * c - b) / 3.0;
    res.eigenvalues[k] = (16.0 * r2 - r1) / 15.0;
  }
  return res;
}

int numeric_football_count(double beta, double lambda, bool strict, int n_grid, double tol) {
  int total = 0;
  for (int j = 0;; ++j) {
    auto sl = radial_sturm_liouville(beta, j, n_grid, 5);
    int here = 0;
    for (double v : sl.eigenvalues) {
      bool in = strict ? v < lambda - tol : v <= lambda + tol;
      if (in) ++here;
    }
    if (sl.eigenvalues.front() > lambda + tol) break;
    total += j == 0 ? here : 2 * here;
  }
  return total;
}

std::vector<TriangleMode> triangle_dirichlet_eigenvalues(double beta, double lambda_max) {
  if (!(beta > 0.0)) throw InvalidInput("triangle_dirichlet_eigenvalues: beta must be positive");
  const double tol = 1e-12 * std::max(1.0, lambda_max);
  std::vector<TriangleMode> out;
  auto lam = [&](int j, int l) {
    double s = j / beta + 2.0 * l;
    return s * (s + 1.0);
  };
  for (int j = 1; lam(j, 0) <= lambda_max + tol; ++j)
    for (int l = 0; lam(j, l) <= lambda_max + tol; ++l) out.push_back({j, l, lam(j, l)});
  std::sort(out.begin(), out.end(), [](const TriangleMode& a, const TriangleMode& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.j < b.j;
  });
  return out;
}

int triangle_count(double beta, double lambda, bool strict, double tol) {
  int n = 0;
  for (auto& m : triangle_dirichlet_eigenvalues(beta, lambda + 2.0 * tol)) {
    bool in = strict ? m.lambda < lambda - tol : m.lambda <= lambda + tol;
    if (in) ++n;
  }
  return n;
}

FlowReport eigenvalue_flow(const std::vector<double>& beta_path, int j_max) {
  if (beta_path.empty()) throw InvalidInput("eigenvalue_flow: empty path");
  if (j_max < 0) throw InvalidInput("eigenvalue_flow: j_max must be nonnegative");
  for (double b : beta_path)
    if (!(b > 0.0)) throw InvalidInput("eigenvalue_flow: path angles must be positive");
  FlowReport rep;
  rep.beta = beta_path;
  auto count = [&](double b, bool strict) {
    int n = 0;
    for (int j = 0; j <= j_max; ++j)
      for (int l = 0; football_lambda(b, j, l) <= 2.0; ++l) {
        double v = football_lambda(b, j, l);
        if (strict ? v < 2.0 : v <= 2.0) n += j == 0 ? 1 : 2;
      }
    return n;
  };
  for (double b : beta_path) {
    rep.below.push_back(count(b, true));
    rep.at_most.push_back(count(b, false));
  }
  for (size_t s = 0; s + 1 < beta_path.size(); ++s) {
    double b0 = beta_path[s], b1 = beta_path[s + 1];
    for (int j = 0; j <= j_max; ++j)
      for (int l = 0; l < 4; ++l) {
        auto f = [&](double b) { return football_lambda(b, j, l) - 2.0; };
        bool s0 = f(b0) >= 0.0, s1 = f(b1) >= 0.0;
        if (s0 == s1) continue;
        double lo = b0, hi = b1;
        for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
          double mid = 0.5 * (lo + hi);
          ((f(mid) >= 0.0) == s0 ? lo : hi) = mid;
        }
        double star = 0.5 * (lo + hi);
        if (std::abs(star - std::round(star)) <= 1e-9) star = std::round(star);
        FlowCrossing c;
        c.interval = static_cast<int>(s);
        c.beta_lo = b0;
        c.beta_hi = b1;
        c.beta_star = star;
        c.j = j;
        c.ell = l;
        c.jump = rep.below[s + 1] - rep.below[s];
        rep.crossings.push_back(c);
      }
  }
  return rep;
}

}  // namespace conemetric
