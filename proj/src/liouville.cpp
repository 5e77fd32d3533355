#include "conemetric/liouville.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conemetric/tridiag.hpp"
#include "liouville_internal.hpp"

namespace conemetric {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

Point3 sphere_point(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return north_pole();
  double n = std::norm(z);
  return {2.0 * z.real() / (1.0 + n), 2.0 * z.imag() / (1.0 + n), (n - 1.0) / (1.0 + n)};
}

Point3 north_pole() { return {0.0, 0.0, 1.0}; }

cplx chart_coord(const Point3& P, int chart) {
  const double inf = std::numeric_limits<double>::infinity();
  if (chart == 0) {
    if (P[2] >= 1.0) return {inf, inf};
    return cplx(P[0], P[1]) / (1.0 - P[2]);
  }
  if (P[2] <= -1.0) return {inf, inf};
  return cplx(P[0], -P[1]) / (1.0 + P[2]);
}

double chordal(const Point3& a, const Point3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

double log_sech(double y) {
  double a = std::abs(y);
  return std::log(2.0) - a - std::log1p(std::exp(-2.0 * a));
}

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

namespace {

bool is_pole(const Point3& P, double z) { return std::abs(P[0]) < 1e-14 && std::abs(P[1]) < 1e-14 && P[2] * z > 0.0; }

double expected_area(const ConicProblem& p) {
  if (p.K == 0) return 4.0 * M_PI;
  return 2.0 * M_PI * std::abs(conic_euler_char(p.beta));
}

}  // namespace

void ConicProblem::validate() const {
  beta.validate();
  if (beta.genus != 0) throw InvalidInput("liouville: only genus 0 is supported");
  if (points.size() != beta.beta.size()) throw InvalidInput("liouville: points and beta differ in length");
  if (K < -1 || K > 1) throw InvalidInput("liouville: curvature must be -1, 0 or 1");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (chordal(points[i], points[j]) < 1e-9) throw InvalidInput("liouville: cone points must be distinct");
  if (background == Background::flat_disk) {
    if (points.size() != 1 || std::hypot(points[0][0], points[0][1]) > 1e-14)
      throw InvalidInput("liouville: the flat disk supports one cone point at the centre");
    return;
  }
  double chi = conic_euler_char(beta);
  int sign = chi > 1e-12 ? 1 : (chi < -1e-12 ? -1 : 0);
  if (sign != K) throw InvalidInput("liouville: the sign of chi(M, beta) must equal the curvature");
  if (K == 1 && !points.empty() && !subcritical && !axisymmetric)
    throw InvalidInput("liouville: K = 1 needs a subcritical or rotationally symmetric configuration");
  if (K == 1 && axisymmetric && !subcritical && std::abs(beta.beta[0] - beta.beta[1]) > 1e-12)
    throw InvalidInput("liouville: a K = 1 metric with two cone points needs equal angles");
}

namespace {

void fill_flags(ConicProblem& p) {
  double chi = conic_euler_char(p.beta);
  if (chi > 0.0 && !p.beta.beta.empty()) {
    try {
      p.troyanov = troyanov_check(p.beta);
    } catch (const InvalidInput&) {
      p.troyanov = false;
    }
  }
  p.subcritical = !p.beta.beta.empty() && subcritical_check(p.beta);
  p.axisymmetric = p.points.size() == 2 && chordal(p.points[0], p.points[1]) > 2.0 - 1e-12;
}

}  // namespace

ConicProblem sphere_problem(const std::vector<cplx>& z, const std::vector<double>& beta, int K) {
  ConicProblem p;
  p.background = Background::round_sphere;
  for (auto& c : z) p.points.push_back(sphere_point(c));
  p.beta.genus = 0;
  p.beta.beta = beta;
  p.K = K;
  if (z.size() != beta.size()) throw InvalidInput("sphere_problem: points and beta differ in length");
  for (double b : beta)
    if (!(b > 0.0)) throw InvalidInput("sphere_problem: beta must be positive");
  if (!beta.empty()) fill_flags(p);
  return p;
}

ConicProblem football_problem(double beta_south, double beta_north, int K) {
  ConicProblem p;
  p.points = {sphere_point(0.0), north_pole()};
  p.beta.genus = 0;
  p.beta.beta = {beta_south, beta_north};
  p.K = K;
  p.beta.validate();
  fill_flags(p);
  return p;
}

ConicProblem disk_problem(double beta, int K, std::function<double(double)> boundary) {
  ConicProblem p;
  p.background = Background::flat_disk;
  p.points = {Point3{0.0, 0.0, 0.0}};
  p.beta.genus = 0;
  p.beta.beta = {beta};
  p.K = K;
  p.boundary = boundary ? boundary : [](double) { return 0.0; };
  p.beta.validate();
  return p;
}

VectorXd DiscreteSystem::residual(const VectorXd& w) const {
  VectorXd e = (2.0 * w.array()).exp().matrix();
  return A * w + c - double(K) * M0.cwiseProduct(e) - b;
}

SpMat DiscreteSystem::jacobian(const VectorXd& w) const {
  SpMat J = A;
  if (K != 0)
    for (int i = 0; i < size(); ++i)
      if (M0(i) != 0.0) J.coeffRef(i, i) -= 2.0 * K * M0(i) * std::exp(2.0 * w(i));
  J.makeCompressed();
  return J;
}

double DiscreteSystem::area(const VectorXd& w) const { return q.dot((2.0 * w.array()).exp().matrix()); }

double singular_background(const ConicProblem& p, const Point3& P) {
  double v = 0.0;
  for (size_t j = 0; j < p.points.size(); ++j) {
    double d = p.background == Background::flat_disk
                   ? std::hypot(P[0] - p.points[j][0], P[1] - p.points[j][1])
                   : chordal(P, p.points[j]);
    v += (p.beta.beta[j] - 1.0) * std::log(d);
  }
  return v;
}

bool DiscreteConicMetric::axisym() const { return grid->kind == GridKind::axisym; }

std::vector<double> DiscreteConicMetric::singular_part() const {
  std::vector<double> s;
  for (double b : problem.beta.beta) s.push_back(b - 1.0);
  return s;
}

VectorXd DiscreteConicMetric::u() const { return grid->v + w; }

DiscreteConicMetric DiscreteConicMetric::with_w(const VectorXd& neww) const {
  if (neww.size() != w.size()) throw InvalidInput("with_w: size mismatch");
  DiscreteConicMetric m = *this;
  m.w = neww;
  m.diag.residual = system->residual(neww).lpNorm<Eigen::Infinity>();
  m.diag.area = system->area(neww);
  return m;
}

namespace {

struct NewtonOut {
  int iterations = 0;
  double residual = 0.0;
};

NewtonOut damped_newton(const DiscreteSystem& s, VectorXd& w, double tol, int max_iter) {
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  VectorXd F = s.residual(w);
  double r = F.lpNorm<Eigen::Infinity>();
  NewtonOut out;
  for (int it = 0; it < max_iter && r > tol; ++it) {
    SpMat J = s.jacobian(w);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw SolverFailure("liouville: singular linearization", r);
    VectorXd dw = lu.solve(-F);
    double alpha = 1.0, rn = r;
    VectorXd wn, Fn;
    for (int k = 0; k < 12; ++k, alpha *= 0.5) {
      wn = w + alpha * dw;
      Fn = s.residual(wn);
      rn = Fn.allFinite() ? Fn.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
      if (rn < (1.0 - 1e-4 * alpha) * r) break;
    }
    if (!(rn < r)) throw SolverFailure("liouville: Newton line search failed to reduce the residual", r);
    w = wn;
    F = Fn;
    r = rn;
    out.iterations = it + 1;
  }
  out.residual = r;
  if (r > tol) throw SolverFailure("liouville: Newton did not converge", r);
  return out;
}

void constant_start(const DiscreteSystem& s, VectorXd& w, double area) {
  double a0 = s.area(VectorXd::Zero(s.size()));
  for (int i = 0; i < s.size(); ++i)
    if (s.pde[i]) w(i) = 0.5 * std::log(area / a0);
}

}  // namespace

DiscreteConicMetric discretize(const ConicProblem& problem, const MeshParams& mesh) {
  problem.validate();
  if (mesh.n < 8 || mesh.n_theta < 8 || mesh.n_theta % 2) throw InvalidInput("liouville: mesh too coarse");
  if (!(mesh.tol > 0.0) || mesh.max_iter < 1) throw InvalidInput("liouville: invalid solver tolerance");
  DiscreteConicMetric m;
  m.problem = problem;
  m.mesh = mesh;
  auto g = std::make_shared<Grid>();
  auto s = std::make_shared<DiscreteSystem>();
  if (problem.background == Background::flat_disk) {
    build_disk(problem, mesh, *g, *s);
  } else if (mesh.axisym) {
    if (problem.points.size() != 2 || !is_pole(problem.points[0], -1.0) || !is_pole(problem.points[1], 1.0))
      throw InvalidInput("liouville: the rotationally symmetric solver needs cone points at z = 0 and z = infinity");
    build_axisym(problem, mesh, false, *g, *s, m.diag.warnings);
  } else {
    build_overset(problem, mesh, *g, *s, m.diag.warnings);
  }
  m.grid = g;
  m.system = s;
  m.w = VectorXd::Zero(s->size());
  for (int i = 0; i < s->size(); ++i)
    if (!s->pde[i]) m.w(i) = s->b(i);
  m.diag.area_expected = expected_area(problem);
  if (problem.background == Background::round_sphere) constant_start(*s, m.w, m.diag.area_expected);
  m.diag.residual = s->residual(m.w).lpNorm<Eigen::Infinity>();
  m.diag.area = s->area(m.w);
  return m;
}

DiscreteConicMetric solve_liouville(const ConicProblem& problem, const MeshParams& mesh) {
  DiscreteConicMetric m = discretize(problem, mesh);
  const DiscreteSystem& s = *m.system;
  if (problem.background == Background::round_sphere && problem.K == 0) {
    // Flat metrics form a scaling family; fix the area of the round sphere.
    m.diag.warnings.push_back("K = 0: bounded part fixed by the area normalization 4*pi");
    return m.with_w(m.w);
  }
  bool mirror = m.axisym() && problem.K == 1 && std::abs(problem.beta.beta[0] - problem.beta.beta[1]) <= 1e-12;
  if (mirror) {
    // Equal angles: the dilations z -> t z act on solutions; solve on y >= 0 with w'(0) = 0.
    Grid gh;
    DiscreteSystem sh;
    std::vector<std::string> dummy;
    build_axisym(problem, mesh, true, gh, sh, dummy);
    VectorXd wh = VectorXd::Zero(sh.size());
    constant_start(sh, wh, m.diag.area_expected);
    NewtonOut o = damped_newton(sh, wh, mesh.tol, mesh.max_iter);
    const int N = s.size(), H = sh.size();
    for (int i = 0; i < H; ++i) {
      m.w(H + i) = wh(i);
      m.w(H - 1 - i) = wh(i);
    }
    (void)N;
    m.diag.iterations = o.iterations;
  } else {
    NewtonOut o = damped_newton(s, m.w, mesh.tol, mesh.max_iter);
    m.diag.iterations = o.iterations;
  }
  m.diag.residual = s.residual(m.w).lpNorm<Eigen::Infinity>();
  m.diag.area = s.area(m.w);
  return m;
}

VectorXd LinearizedOperator::apply(const VectorXd& psi) const {
  VectorXd r = A * psi;
  for (int i = 0; i < r.size(); ++i)
    if (pde[i]) r(i) = r(i) / mass(i) - 2.0 * K * psi(i);
  return r;
}

double LinearizedOperator::asymmetry() const {
  double big = 0.0, diff = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      int i = it.row(), j = it.col();
      if (!pde[i] || !pde[j]) continue;
      double s = it.value() / std::sqrt(mass(i) * mass(j));
      double t = A.coeff(j, i) / std::sqrt(mass(i) * mass(j));
      big = std::max(big, std::abs(s));
      diff = std::max(diff, std::abs(s - t));
    }
  return big > 0.0 ? diff / big : 0.0;
}

LinearizedOperator linearized_operator(const DiscreteConicMetric& metric) {
  const DiscreteSystem& s = *metric.system;
  LinearizedOperator L;
  L.A = s.A;
  L.pde = s.pde;
  L.K = metric.problem.K;
  L.mass = VectorXd::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s.pde[i]) L.mass(i) = s.M0(i) * std::exp(2.0 * metric.w(i));
  return L;
}

VectorXd normalized_residual(const DiscreteConicMetric& metric, const VectorXd& psi) {
  const DiscreteSystem& s = *metric.system;
  VectorXd F = s.residual(metric.w + psi);
  for (int i = 0; i < s.size(); ++i)
    if (s.pde[i]) F(i) /= s.M0(i) * std::exp(2.0 * metric.w(i));
  return F;
}

double inner(const DiscreteConicMetric& metric, const DiscreteFunction& a, const DiscreteFunction& b) {
  const DiscreteSystem& s = *metric.system;
  if (a.values.size() != s.size() || b.values.size() != s.size()) throw InvalidInput("inner: size mismatch");
  double factor = 1.0;
  if (metric.axisym()) {
    int ma = std::max(a.mode, 0), mb = std::max(b.mode, 0);
    if (ma != mb) return 0.0;
    if (ma > 0 && a.parity != b.parity) return 0.0;
    factor = ma == 0 ? 1.0 : 0.5;
  }
  double sum = 0.0;
  for (int i = 0; i < s.size(); ++i) sum += s.q(i) * std::exp(2.0 * metric.w(i)) * a.values(i) * b.values(i);
  return factor * sum;
}

namespace {

double mass_at(const DiscreteConicMetric& m, int i) { return m.system->M0(i) * std::exp(2.0 * m.w(i)); }

// Axisymmetric spectrum of one mode, eigenvalues with index < count or within [lo, hi].
void mode_pairs(const DiscreteConicMetric& m, int mode, int count, std::vector<double>& lam,
                std::vector<VectorXd>* vecs) {
  SymTridiag T;
  std::vector<double> mass;
  axisym_mode(m, mode, T.d, T.e, mass);
  const double h = m.grid->hy;
  const double angular = mode == 0 ? 2.0 * M_PI : M_PI;
  for (int k = 0; k < count; ++k) {
    double l = tridiag_eigenvalue(T, mass, k);
    lam.push_back(l);
    if (vecs) vecs->push_back(tridiag_eigenvector(T, mass, l) / std::sqrt(angular * h));
  }
}

double mode_residual(const DiscreteConicMetric& m, int mode, double lam, const VectorXd& v) {
  SymTridiag T;
  std::vector<double> mass;
  axisym_mode(m, mode, T.d, T.e, mass);
  const int n = T.size();
  double res = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = T.d[i] * v(i);
    if (i > 0) a += T.e[i - 1] * v(i - 1);
    if (i + 1 < n) a += T.e[i] * v(i + 1);
    res = std::max(res, std::abs(a - lam * mass[i] * v(i)));
    scale = std::max(scale, std::abs(a));
  }
  return scale > 0.0 ? res / scale : res;
}

void normalize_nodal(const DiscreteConicMetric& m, VectorXd& v) {
  DiscreteFunction f{-1, 0, v};
  v /= std::sqrt(inner(m, f, f));
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0.0) v = -v;
}

EigenPairs nodal_pairs(const DiscreteConicMetric& m, double sigma, int nev) {
  const DiscreteSystem& s = *m.system;
  VectorXd mass = VectorXd::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s.pde[i]) mass(i) = mass_at(m, i);
  EigenPairs ep = shift_invert(s.A, mass, sigma, nev, 1e-10);
  for (auto& v : ep.vectors) normalize_nodal(m, v);
  return ep;
}

ObstructionBundleFiber fiber_attempt(const DiscreteConicMetric& m, double window, bool& too_close) {
  ObstructionBundleFiber f;
  f.window = window;
  too_close = false;
  auto take = [&](double lam, DiscreteFunction fn, double res) {
    double d = std::abs(lam - 2.0);
    if (std::abs(d - window) < 0.1 * window) too_close = true;
    if (d < window) {
      f.eigenvalues.push_back(lam);
      f.eigenvectors.push_back(std::move(fn));
      f.residuals.push_back(res);
    }
  };
  if (m.axisym()) {
    for (int mode = 0; mode < 64; ++mode) {
      std::vector<double> lam;
      std::vector<VectorXd> vec;
      mode_pairs(m, mode, 1, lam, nullptr);
      if (lam[0] > 2.0 + 1.2 * window) break;
      lam.clear();
      int count = 1;
      while (true) {
        lam.clear();
        mode_pairs(m, mode, count, lam, nullptr);
        if (lam.back() > 2.0 + 1.2 * window || count >= 12) break;
        ++count;
      }
      lam.clear();
      mode_pairs(m, mode, count, lam, &vec);
      for (int k = 0; k < count; ++k) {
        double res = mode_residual(m, mode, lam[k], vec[k] * std::sqrt((mode == 0 ? 2.0 : 1.0) * M_PI * m.grid->hy));
        for (int par = 0; par < (mode == 0 ? 1 : 2); ++par) take(lam[k], DiscreteFunction{mode, par, vec[k]}, res);
      }
    }
  } else {
    int nev = 6;
    EigenPairs ep;
    while (true) {
      ep = nodal_pairs(m, 2.0, nev);
      double far = 0.0;
      for (double l : ep.lambda) far = std::max(far, std::abs(l - 2.0));
      if (far > 1.2 * window || nev >= 24) break;
      nev *= 2;
    }
    for (size_t k = 0; k < ep.lambda.size(); ++k)
      take(ep.lambda[k], DiscreteFunction{-1, 0, ep.vectors[k]}, ep.residuals[k]);
  }
  f.ell = static_cast<int>(f.eigenvalues.size());
  return f;
}

}  // namespace

ObstructionBundleFiber spectrum_near_two(const DiscreteConicMetric& metric, double window) {
  if (!(window > 0.0)) throw InvalidInput("spectrum_near_two: window must be positive");
  bool close = false;
  ObstructionBundleFiber f = fiber_attempt(metric, window, close);
  if (!close) return f;
  f = fiber_attempt(metric, 1.5 * window, close);
  if (close) throw SolverFailure("spectrum_near_two: an eigenvalue sits on the window boundary");
  return f;
}

std::vector<double> mode_spectrum(const DiscreteConicMetric& metric, int mode, int count) {
  if (!metric.axisym()) throw InvalidInput("mode_spectrum: needs a rotationally symmetric metric");
  if (mode < 0 || count < 1) throw InvalidInput("mode_spectrum: invalid mode or count");
  std::vector<double> lam;
  mode_pairs(metric, mode, count, lam, nullptr);
  return lam;
}

std::vector<double> low_spectrum(const DiscreteConicMetric& metric, int count, double shift) {
  if (count < 1) throw InvalidInput("low_spectrum: count must be positive");
  std::vector<double> all;
  if (metric.axisym()) {
    for (int mode = 0; mode <= count; ++mode) {
      std::vector<double> lam;
      mode_pairs(metric, mode, count, lam, nullptr);
      for (double l : lam)
        for (int r = 0; r < (mode == 0 ? 1 : 2); ++r) all.push_back(l);
    }
  } else {
    all = nodal_pairs(metric, shift, count).lambda;
  }
  std::sort(all.begin(), all.end());
  if (static_cast<int>(all.size()) > count) all.resize(count);
  return all;
}

ProjectedSolution projected_solve(const DiscreteConicMetric& metric, const ObstructionBundleFiber& fiber) {
  const DiscreteSystem& s = *metric.system;
  const int n = s.size();
  std::vector<int> used;
  for (size_t i = 0; i < fiber.eigenvectors.size(); ++i) {
    const auto& f = fiber.eigenvectors[i];
    if (f.values.size() != n) throw InvalidInput("projected_solve: fiber does not match the metric");
    if (f.mode <= 0 && f.parity == 0) used.push_back(static_cast<int>(i));
  }
  ProjectedSolution out;
  out.u.mode = metric.axisym() ? 0 : -1;
  out.Lambda.assign(fiber.eigenvectors.size(), 0.0);
  VectorXd mass = VectorXd::Zero(n), omega(n);
  for (int i = 0; i < n; ++i) {
    if (s.pde[i]) mass(i) = mass_at(metric, i);
    omega(i) = s.q(i) * std::exp(2.0 * metric.w(i));
  }
  const int l = static_cast<int>(used.size());
  VectorXd u = VectorXd::Zero(n), Lam = VectorXd::Zero(l);
  auto G = [&](const VectorXd& uu, const VectorXd& LL, VectorXd& g1, VectorXd& g2) {
    g1 = s.residual(metric.w + uu);
    for (int a = 0; a < l; ++a) g1 -= LL(a) * mass.cwiseProduct(fiber.eigenvectors[used[a]].values);
    g2.resize(l);
    for (int a = 0; a < l; ++a) g2(a) = omega.dot(uu.cwiseProduct(fiber.eigenvectors[used[a]].values));
  };
  VectorXd g1, g2;
  G(u, Lam, g1, g2);
  auto norm = [&](const VectorXd& a, const VectorXd& b) {
    return std::max(a.lpNorm<Eigen::Infinity>(), l ? b.lpNorm<Eigen::Infinity>() : 0.0);
  };
  double r = norm(g1, g2);
  const double tol = std::min(metric.mesh.tol, 1e-10);
  for (int it = 0; it < metric.mesh.max_iter && r > tol; ++it) {
    SpMat J = s.jacobian(metric.w + u);
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(J.nonZeros() + 2 * l * n);
    for (int k = 0; k < J.outerSize(); ++k)
      for (SpMat::InnerIterator e(J, k); e; ++e) tr.emplace_back(e.row(), e.col(), e.value());
    for (int a = 0; a < l; ++a) {
      const VectorXd& phi = fiber.eigenvectors[used[a]].values;
      for (int i = 0; i < n; ++i) {
        if (mass(i) * phi(i) != 0.0) tr.emplace_back(i, n + a, -mass(i) * phi(i));
        if (omega(i) * phi(i) != 0.0) tr.emplace_back(n + a, i, omega(i) * phi(i));
      }
    }
    SpMat B(n + l, n + l);
    B.setFromTriplets(tr.begin(), tr.end());
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(B);
    if (lu.info() != Eigen::Success) throw SolverFailure("projected_solve: singular bordered system", r);
    VectorXd rhs(n + l);
    rhs << -g1, -g2;
    VectorXd d = lu.solve(rhs);
    double alpha = 1.0, rn = r;
    VectorXd un, Ln, h1, h2;
    for (int k = 0; k < 12; ++k, alpha *= 0.5) {
      un = u + alpha * d.head(n);
      Ln = Lam + alpha * d.tail(l);
      G(un, Ln, h1, h2);
      rn = h1.allFinite() ? norm(h1, h2) : std::numeric_limits<double>::infinity();
      if (rn < (1.0 - 1e-4 * alpha) * r) break;
    }
    if (!(rn < r)) throw SolverFailure("projected_solve: contraction failed", r);
    u = un;
    Lam = Ln;
    g1 = h1;
    g2 = h2;
    r = rn;
    out.iterations = it + 1;
  }
  if (r > tol) throw SolverFailure("projected_solve: contraction failed", r);
  for (int a = 0; a < l; ++a) out.Lambda[used[a]] = Lam(a);
  out.u.values = u;
  // Row-scaled, as in solve_liouville; dividing by the mass blows up near the poles.
  out.residual = r;
  return out;
}

std::vector<ConeSample> cone_samples(const DiscreteConicMetric& metric, int point, const DiscreteFunction& f,
                                     double r_lo, double r_hi) {
  const auto& p = metric.problem;
  const Grid& g = *metric.grid;
  if (point < 0 || point >= static_cast<int>(p.points.size())) throw InvalidInput("cone_samples: no such cone point");
  if (f.values.size() != metric.w.size()) throw InvalidInput("cone_samples: size mismatch");
  const double beta = p.beta.beta[point];
  std::vector<ConeSample> out;
  if (g.kind == GridKind::axisym) {
    const int N = static_cast<int>(g.y.size());
    const double other = p.beta.beta[1 - point];
    const double wp = point == 0 ? metric.w(0) : metric.w(N - 1);
    const double logk = 2.0 * beta * std::log(2.0) + 2.0 * (other - 1.0) * std::log(2.0) + 2.0 * wp;
    const int nth = metric.mesh.n_theta;
    for (int i = 0; i < N; ++i) {
      double ls = point == 0 ? g.y[i] : -g.y[i];
      double r = std::exp(0.5 * logk + beta * ls) / beta;
      if (r < r_lo || r > r_hi) continue;
      for (int k = 0; k < nth; ++k) {
        double th = 2.0 * M_PI * k / nth;
        double gth = point == 0 ? th : -th;
        int mode = std::max(f.mode, 0);
        double ang = mode == 0 ? 1.0 : (f.parity == 0 ? std::cos(mode * gth) : std::sin(mode * gth));
        out.push_back({r, th, f.values(i) * ang});
      }
    }
    return out;
  }
  if (f.mode >= 0) throw InvalidInput("cone_samples: expected a nodal function");
  const PatchGrid& pg = g.patches[point];
  double wp = 0.0;
  for (int k = 0; k < pg.nth; ++k) wp += metric.w(pg.node(pg.nx - 1, k));
  wp /= pg.nth;
  const double logk = pg.log_kappa0 + 2.0 * wp;
  for (int i = 1; i < pg.nx; ++i) {
    double r = std::exp(0.5 * logk + beta * pg.x(i)) / beta;
    if (r < r_lo || r > r_hi) continue;
    for (int k = 0; k < pg.nth; ++k) out.push_back({r, 2.0 * M_PI * k / pg.nth, f.values(pg.node(i, k))});
  }
  return out;
}

std::vector<ConeSample> cone_samples_w(const DiscreteConicMetric& metric, int point, double r_lo, double r_hi) {
  DiscreteFunction f{metric.axisym() ? 0 : -1, 0, metric.w};
  return cone_samples(metric, point, f, r_lo, r_hi);
}

FriedrichsFit friedrichs_fit(const DiscreteConicMetric& metric, int point, double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw InvalidInput("friedrichs_fit: invalid radii");
  const double beta = metric.problem.beta.beta.at(point);
  int J = 0;
  while ((J + 1) / beta < 2.0 - 1e-12) ++J;
  // Indicial coefficients from the small-r region, where the tail is negligible.
  auto inner_s = cone_samples_w(metric, point, r_lo * 1e-3, r_lo);
  auto outer_s = cone_samples_w(metric, point, r_lo, r_hi);
  if (inner_s.size() < static_cast<size_t>(4 * (2 * J + 2)) || outer_s.empty())
    throw InvalidInput("friedrichs_fit: too few samples in the fitting range");
  const int nb = 2 + 2 * J;
  auto basis = [&](double r, double th, auto&& row) {
    row(0) = 1.0;
    for (int j = 1; j <= J; ++j) {
      double rp = std::pow(r, j / beta);
      row(2 * j - 1) = rp * std::cos(j * th);
      row(2 * j) = rp * std::sin(j * th);
    }
    row(nb - 1) = r * r;
  };
  Eigen::MatrixXd M(inner_s.size(), nb);
  VectorXd rhs(inner_s.size());
  for (size_t k = 0; k < inner_s.size(); ++k) {
    basis(inner_s[k].r, inner_s[k].theta, M.row(k));
    rhs(k) = inner_s[k].value;
  }
  VectorXd coef = M.colPivHouseholderQr().solve(rhs);
  FriedrichsFit fit;
  fit.a0 = coef(0);
  for (int j = 1; j <= J; ++j) {
    fit.a.push_back(coef(2 * j - 1));
    fit.b.push_back(coef(2 * j));
  }
  // Remainder per ring: sup over theta.
  std::vector<std::pair<double, double>> ring;
  Eigen::RowVectorXd row(nb);
  for (auto& smp : outer_s) {
    basis(smp.r, smp.theta, row);
    double model = row.head(nb - 1).dot(coef.head(nb - 1));
    double rem = std::abs(smp.value - model);
    if (ring.empty() || std::abs(ring.back().first - smp.r) > 1e-14 * smp.r)
      ring.push_back({smp.r, rem});
    else
      ring.back().second = std::max(ring.back().second, rem);
  }
  std::sort(ring.begin(), ring.end());
  for (auto& [r, v] : ring) {
    fit.radii.push_back(r);
    fit.remainder.push_back(v);
  }
  fit.slope = loglog_slope(fit.radii, fit.remainder);
  return fit;
}

double football_u(double beta, cplx z) {
  double s = std::abs(z);
  double ls = std::log(s);
  // log(beta s^{beta-1} (1+s^2) / (1+s^{2 beta})) without overflow
  return std::log(beta) + (beta - 1.0) * ls + softplus(2.0 * ls) - softplus(2.0 * beta * ls);
}

}  // namespace conemetric
