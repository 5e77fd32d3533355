#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "liouville_internal.hpp"

namespace conemetric {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;
using Trip = Eigen::Triplet<double>;

namespace {

constexpr double kRint = 1.6;       // charts carry the equation on |zeta| <= kRint
constexpr double kChartBlend = 0.22314355131420976;  // log 1.25

enum NodeState : char { OUTSIDE = 0, DISC = 1, INTERP = 2 };

double lagrange4(const double t, int k) {
  // nodes 0,1,2,3
  static const double den[4] = {-6.0, 2.0, -2.0, 6.0};
  double num = 1.0;
  for (int j = 0; j < 4; ++j)
    if (j != k) num *= t - j;
  return num / den[k];
}

// Periodic cardinal function for an even number of equispaced nodes.
double trig_cardinal(int N, double t) {
  t = std::remainder(t, 2.0 * M_PI);
  if (std::abs(t) < 1e-14) return 1.0;
  return std::sin(0.5 * N * t) / (N * std::tan(0.5 * t));
}

// Fourier second-derivative matrix, N even.
Eigen::MatrixXd fourier_d2(int N) {
  Eigen::MatrixXd D(N, N);
  const double hth = 2.0 * M_PI / N;
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      if (j == k) {
        D(j, k) = -(N * N) / 12.0 - 1.0 / 6.0;
      } else {
        double s = std::sin(0.5 * (j - k) * hth);
        D(j, k) = -((j - k) % 2 ? -1.0 : 1.0) * 0.5 / (s * s);
      }
    }
  return D;
}

struct Overset {
  const ConicProblem& p;
  Grid& g;
  std::vector<std::vector<char>> state{2};
  std::vector<Point3> P;  // cone points

  Overset(const ConicProblem& pr, Grid& gr) : p(pr), g(gr), P(pr.points) {}

  // Distance from a sphere point to cone point j in that point's home chart.
  double patch_s(const Point3& X, int j, cplx* local = nullptr) const {
    const PatchGrid& pg = g.patches[j];
    cplx zeta = chart_coord(X, pg.home);
    if (!std::isfinite(zeta.real())) return 1e300;
    if (local) *local = zeta - pg.center;
    return std::abs(zeta - pg.center);
  }

  Point3 chart_point(int c, cplx zeta) const {
    if (c == 0) return sphere_point(zeta);
    if (std::abs(zeta) == 0.0) return north_pole();
    return sphere_point(1.0 / zeta);
  }

  // Bicubic donors in chart c; false when the stencil leaves the unknowns.
  bool chart_donors(int c, cplx zeta, std::vector<std::pair<int, double>>& out) const {
    const ChartGrid& cg = g.charts[c];
    double fx = (zeta.real() + cg.L) / cg.h, fy = (zeta.imag() + cg.L) / cg.h;
    int i0 = static_cast<int>(std::floor(fx)) - 1, j0 = static_cast<int>(std::floor(fy)) - 1;
    if (i0 < 0 || j0 < 0 || i0 + 3 >= cg.n || j0 + 3 >= cg.n) return false;
    std::vector<std::pair<int, double>> tmp;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        int idx = cg.index[(i0 + a) * cg.n + (j0 + b)];
        if (idx < 0) return false;
        tmp.push_back({idx, lagrange4(fx - i0, a) * lagrange4(fy - j0, b)});
      }
    out.insert(out.end(), tmp.begin(), tmp.end());
    return true;
  }

  // Donors on patch j at local offset zl: 4 rings in x, all angles in theta.
  bool patch_donors(int j, cplx zl, std::vector<std::pair<int, double>>& out) const {
    const PatchGrid& pg = g.patches[j];
    double x = std::log(std::abs(zl)), th = std::arg(zl);
    double fi = (pg.xmax - x) / pg.hx;
    int i0 = static_cast<int>(std::floor(fi)) - 1;
    if (i0 < 1) i0 = 1;
    if (i0 + 3 > pg.nx - 1) return false;
    if (fi < 1.0 || fi > pg.nx - 1) return false;
    for (int a = 0; a < 4; ++a) {
      double la = lagrange4(fi - i0, a);
      for (int k = 0; k < pg.nth; ++k)
        out.push_back({pg.node(i0 + a, k), la * trig_cardinal(pg.nth, th - 2.0 * M_PI * k / pg.nth)});
    }
    return true;
  }

  double v_at(const Point3& X) const {
    double v = 0.0;
    for (size_t j = 0; j < P.size(); ++j) v += (p.beta.beta[j] - 1.0) * std::log(chordal(X, P[j]));
    return v;
  }
};

void add_interp_row(std::vector<Trip>& tr, int row, const std::vector<std::pair<int, double>>& donors) {
  tr.emplace_back(row, row, 1.0);
  for (auto& [c, wgt] : donors)
    if (wgt != 0.0) tr.emplace_back(row, c, -wgt);
}

void set_constraint(DiscreteSystem& s, int i) {
  s.c(i) = 0.0;
  s.M0(i) = 0.0;
  s.b(i) = 0.0;
  s.q(i) = 0.0;
  s.pde[i] = 0;
}

}  // namespace

void build_overset(const ConicProblem& p, const MeshParams& m, Grid& g, DiscreteSystem& s,
                   std::vector<std::string>& warnings) {
  g.kind = GridKind::overset;
  Overset O(p, g);
  const int npts = static_cast<int>(p.points.size());
  const double h = 3.2 / m.n;
  const double chi = conic_euler_char(p.beta);

  // Patches around cone points.
  int offset = 0;
  g.patches.resize(npts);
  for (int j = 0; j < npts; ++j) {
    PatchGrid& pg = g.patches[j];
    pg.point = j;
    cplx z0 = chart_coord(p.points[j], 0);
    pg.home = (std::isfinite(z0.real()) && std::abs(z0) <= 1.0) ? 0 : 1;
    pg.center = chart_coord(p.points[j], pg.home);
    pg.beta = p.beta.beta[j];
    double dmin = 1e300;
    for (int q = 0; q < npts; ++q) {
      if (q == j) continue;
      cplx zq = chart_coord(p.points[q], pg.home);
      if (std::isfinite(zq.real())) dmin = std::min(dmin, std::abs(zq - pg.center));
    }
    pg.smax = std::min(0.4, 0.35 * dmin);
    if (pg.smax < 0.4) {
      std::ostringstream os;
      os << "cone point " << j << ": neighbourhood radius shrunk to " << pg.smax;
      warnings.push_back(os.str());
    }
    if (pg.smax < 3.0 * h) throw InvalidInput("liouville: cone points too close for the mesh resolution");
    pg.shole = 0.35 * pg.smax;
    int ncut = 2 * static_cast<int>(std::ceil(pg.beta)) + 4;
    pg.nth = std::max(m.n_theta, 2 * ncut + 2);
    if (pg.nth % 2) ++pg.nth;
    pg.hx = 2.5 * h;
    double Lx = std::clamp(18.0 / pg.beta, 6.0, 40.0);
    pg.nx = static_cast<int>(std::ceil(Lx / pg.hx)) + 1;
    pg.xmax = std::log(pg.smax);
    pg.offset = offset;
    offset += pg.nx * pg.nth;
    double lc = std::log(2.0 / (1.0 + std::norm(pg.center)));
    pg.log_kappa0 = 2.0 * pg.beta * lc;
    for (int q = 0; q < npts; ++q)
      if (q != j) pg.log_kappa0 += 2.0 * (p.beta.beta[q] - 1.0) * std::log(chordal(p.points[j], p.points[q]));
  }

  // Chart nodes.
  for (int c = 0; c < 2; ++c) {
    ChartGrid& cg = g.charts[c];
    cg.chart = c;
    cg.h = h;
    cg.R = kRint;
    int half = static_cast<int>(std::ceil(kRint / h)) + 3;
    cg.L = half * h;
    cg.n = 2 * half + 1;
    cg.index.assign(cg.n * cg.n, -1);
    auto& st = O.state[c];
    st.assign(cg.n * cg.n, OUTSIDE);
    for (int a = 0; a < cg.n; ++a)
      for (int b = 0; b < cg.n; ++b) {
        cplx zeta(cg.coord(a), cg.coord(b));
        if (std::abs(zeta) > kRint) continue;
        Point3 X = O.chart_point(c, zeta);
        bool hole = false;
        for (int j = 0; j < npts; ++j)
          if (O.patch_s(X, j) < g.patches[j].shole) hole = true;
        if (!hole) st[a * cg.n + b] = DISC;
      }
    for (int a = 0; a < cg.n; ++a)
      for (int b = 0; b < cg.n; ++b) {
        if (st[a * cg.n + b] != OUTSIDE) continue;
        bool nb = false;
        const int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int aa = a + da[k], bb = b + db[k];
          if (aa >= 0 && bb >= 0 && aa < cg.n && bb < cg.n && st[aa * cg.n + bb] == DISC) nb = true;
        }
        if (nb) st[a * cg.n + b] = INTERP;
      }
    for (int k = 0; k < cg.n * cg.n; ++k)
      if (st[k] != OUTSIDE) cg.index[k] = offset++;
  }
  const int N = offset;
  g.unknowns = N;
  s.K = p.K;
  s.c = VectorXd::Zero(N);
  s.M0 = VectorXd::Zero(N);
  s.b = VectorXd::Zero(N);
  s.q = VectorXd::Zero(N);
  s.pde.assign(N, 1);
  g.v = VectorXd::Zero(N);
  g.pos.assign(N, Point3{0, 0, 0});
  std::vector<Trip> tr;

  auto psi = [&](int j, double sd) { return 1.0 - smoothstep((sd / g.patches[j].smax - 0.4) / 0.55); };

  // Patch rows.
  for (int j = 0; j < npts; ++j) {
    const PatchGrid& pg = g.patches[j];
    Eigen::MatrixXd D2 = fourier_d2(pg.nth);
    const double ihx2 = 1.0 / (pg.hx * pg.hx);
    const double dth = 2.0 * M_PI / pg.nth;
    const double lc = 0.5 * std::log1p(std::norm(pg.center));
    for (int i = 0; i < pg.nx; ++i) {
      const double x = pg.x(i);
      for (int k = 0; k < pg.nth; ++k) {
        const int row = pg.node(i, k);
        const double th = k * dth;
        cplx zl = std::polar(std::exp(x), th);
        cplx zeta = pg.center + zl;
        Point3 X = O.chart_point(pg.home, zeta);
        g.pos[row] = X;
        // Own chordal term analytically: log d = log 2 + x - log(1+|zeta|^2)/2 - log(1+|c|^2)/2.
        double lz = 0.5 * std::log1p(std::norm(zeta));
        double v = (pg.beta - 1.0) * (std::log(2.0) + x - lz - lc);
        for (int q = 0; q < npts; ++q)
          if (q != j) v += (p.beta.beta[q] - 1.0) * std::log(chordal(X, p.points[q]));
        g.v(row) = v;
        if (i == 0) {
          std::vector<std::pair<int, double>> d;
          if (!O.chart_donors(pg.home, zeta, d))
            throw InvalidInput("liouville: patch boundary leaves the chart grid; increase the resolution");
          add_interp_row(tr, row, d);
          set_constraint(s, row);
          continue;
        }
        const double phi0 = std::log(2.0) - 2.0 * lz;
        const double lS = 2.0 * x + 2.0 * phi0;
        s.c(row) = std::exp(lS) * 0.5 * chi;
        s.M0(row) = std::exp(lS + 2.0 * v);
        double wx = i == pg.nx - 1 ? 0.5 : 1.0;
        s.q(row) = psi(j, std::exp(x)) * s.M0(row) * pg.hx * dth * wx;
        // -(d_xx + d_thth) w, Neumann ghost at the inner ring
        double diag = 2.0 * ihx2 - D2(k, k);
        tr.emplace_back(row, pg.node(i - 1, k), -ihx2);
        if (i + 1 < pg.nx)
          tr.emplace_back(row, pg.node(i + 1, k), -ihx2);
        else
          diag -= ihx2;
        tr.emplace_back(row, row, diag);
        for (int kk = 0; kk < pg.nth; ++kk)
          if (kk != k) tr.emplace_back(row, pg.node(i, kk), -D2(k, kk));
      }
    }
  }

  // Chart rows.
  for (int c = 0; c < 2; ++c) {
    const ChartGrid& cg = g.charts[c];
    const double ih2 = 1.0 / (h * h);
    for (int a = 0; a < cg.n; ++a)
      for (int b = 0; b < cg.n; ++b) {
        const int row = cg.index[a * cg.n + b];
        if (row < 0) continue;
        cplx zeta(cg.coord(a), cg.coord(b));
        Point3 X = O.chart_point(c, zeta);
        g.pos[row] = X;
        if (O.state[c][a * cg.n + b] == INTERP) {
          std::vector<std::pair<int, double>> d;
          bool ok = false;
          for (int j = 0; j < npts && !ok; ++j) {
            cplx zl;
            double sd = O.patch_s(X, j, &zl);
            if (sd < g.patches[j].smax) ok = O.patch_donors(j, zl, d);
            if (!ok) d.clear();
          }
          if (!ok) {
            cplx other = chart_coord(X, 1 - c);
            ok = std::isfinite(other.real()) && O.chart_donors(1 - c, other, d);
          }
          if (!ok) throw InvalidInput("liouville: no interpolation stencil for a chart boundary node");
          g.v(row) = O.v_at(X);
          add_interp_row(tr, row, d);
          set_constraint(s, row);
          continue;
        }
        const double lz = std::log1p(std::norm(zeta));
        const double lS = 2.0 * (std::log(2.0) - lz);
        const double v = O.v_at(X);
        g.v(row) = v;
        s.c(row) = std::exp(lS) * 0.5 * chi;
        s.M0(row) = std::exp(lS + 2.0 * v);
        double t = 0.5 * std::log(std::max(std::norm(zeta), 1e-300));
        double wchart = 1.0 - smoothstep((t + kChartBlend) / (2.0 * kChartBlend));
        double wpatch = 1.0;
        for (int j = 0; j < npts; ++j) wpatch -= psi(j, O.patch_s(X, j));
        s.q(row) = wchart * wpatch * s.M0(row) * h * h;
        tr.emplace_back(row, row, 4.0 * ih2);
        const int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) tr.emplace_back(row, cg.index[(a + da[k]) * cg.n + (b + db[k])], -ih2);
      }
  }
  s.A.resize(N, N);
  s.A.setFromTriplets(tr.begin(), tr.end());
  s.A.makeCompressed();
}

// Flat unit disk with one cone point at the centre: a single log-polar patch, x in [-X, 0],
// Dirichlet data on the outer ring.
void build_disk(const ConicProblem& p, const MeshParams& m, Grid& g, DiscreteSystem& s) {
  g.kind = GridKind::disk;
  g.patches.resize(1);
  PatchGrid& pg = g.patches[0];
  pg.beta = p.beta.beta[0];
  pg.home = 0;
  pg.center = 0.0;
  pg.smax = 1.0;
  pg.shole = 0.0;
  int ncut = 2 * static_cast<int>(std::ceil(pg.beta)) + 4;
  pg.nth = std::max(m.n_theta, 2 * ncut + 2);
  if (pg.nth % 2) ++pg.nth;
  pg.hx = 2.5 * 3.2 / m.n;
  double Lx = std::clamp(18.0 / pg.beta, 6.0, 40.0);
  pg.nx = static_cast<int>(std::ceil(Lx / pg.hx)) + 1;
  pg.xmax = 0.0;
  pg.log_kappa0 = 0.0;
  const int N = pg.nx * pg.nth;
  g.unknowns = N;
  s.K = p.K;
  s.c = VectorXd::Zero(N);
  s.M0 = VectorXd::Zero(N);
  s.b = VectorXd::Zero(N);
  s.q = VectorXd::Zero(N);
  s.pde.assign(N, 1);
  g.v = VectorXd::Zero(N);
  g.pos.assign(N, Point3{0, 0, 0});
  Eigen::MatrixXd D2 = fourier_d2(pg.nth);
  const double ihx2 = 1.0 / (pg.hx * pg.hx), dth = 2.0 * M_PI / pg.nth;
  std::vector<Trip> tr;
  for (int i = 0; i < pg.nx; ++i) {
    const double x = pg.x(i);
    for (int k = 0; k < pg.nth; ++k) {
      const int row = pg.node(i, k);
      const double th = k * dth;
      g.pos[row] = {std::exp(x) * std::cos(th), std::exp(x) * std::sin(th), 0.0};
      g.v(row) = (pg.beta - 1.0) * x;
      if (i == 0) {
        tr.emplace_back(row, row, 1.0);
        s.pde[row] = 0;
        s.b(row) = p.boundary ? p.boundary(th) : 0.0;
        s.q(row) = 0.5 * pg.hx * dth;
        continue;
      }
      s.M0(row) = std::exp(2.0 * pg.beta * x);
      s.q(row) = s.M0(row) * pg.hx * dth * (i == pg.nx - 1 ? 0.5 : 1.0);
      double diag = 2.0 * ihx2 - D2(k, k);
      tr.emplace_back(row, pg.node(i - 1, k), -ihx2);
      if (i + 1 < pg.nx)
        tr.emplace_back(row, pg.node(i + 1, k), -ihx2);
      else
        diag -= ihx2;
      tr.emplace_back(row, row, diag);
      for (int kk = 0; kk < pg.nth; ++kk)
        if (kk != k) tr.emplace_back(row, pg.node(i, kk), -D2(k, kk));
    }
  }
  s.A.resize(N, N);
  s.A.setFromTriplets(tr.begin(), tr.end());
  s.A.makeCompressed();
}

EigenPairs shift_invert(const SpMat& A, const VectorXd& mass, double sigma, int nev, double tol) {
  const int n = static_cast<int>(A.rows());
  SpMat S = A;
  for (int i = 0; i < n; ++i)
    if (mass(i) != 0.0) S.coeffRef(i, i) -= sigma * mass(i);
  S.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(S);
  if (lu.info() != Eigen::Success) throw SolverFailure("shift_invert: shift is an eigenvalue");
  auto op = [&](const VectorXd& x) -> VectorXd { return lu.solve(mass.cwiseProduct(x)); };

  const int p = 4;
  const int m = std::min(n, std::max(48, 4 * nev + 16));
  std::mt19937 rng(12345);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd start(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) start(i, j) = nd(rng);

  EigenPairs out;
  for (int cycle = 0; cycle < 12; ++cycle) {
    Eigen::MatrixXd V(n, m), W(n, m);
    int cols = 0;
    auto push = [&](VectorXd x) {
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < cols; ++j) x -= V.col(j).dot(x) * V.col(j);
      double nr = x.norm();
      if (nr < 1e-12 || cols >= m) return false;
      V.col(cols++) = x / nr;
      return true;
    };
    for (int j = 0; j < p; ++j) push(op(start.col(j)));
    int done = 0;
    while (done < cols && cols < m) {
      W.col(done) = op(V.col(done));
      push(W.col(done));
      ++done;
    }
    for (; done < cols; ++done) W.col(done) = op(V.col(done));
    Eigen::MatrixXd H = V.leftCols(cols).transpose() * W.leftCols(cols);
    Eigen::EigenSolver<Eigen::MatrixXd> es(H);
    std::vector<int> idx(cols);
    for (int i = 0; i < cols; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b)); });
    out = EigenPairs{};
    bool ok = true;
    const int want = std::min(nev, cols);
    for (int k = 0; k < want; ++k) {
      std::complex<double> th = es.eigenvalues()(idx[k]);
      VectorXd x = (V.leftCols(cols) * es.eigenvectors().col(idx[k]).real()).eval();
      if (x.norm() < 1e-14) x = V.leftCols(cols) * es.eigenvectors().col(idx[k]).imag();
      x.normalize();
      double lam = sigma + (1.0 / th).real();
      VectorXd Ax = A * x, Mx = mass.cwiseProduct(x);
      double res = (Ax - lam * Mx).norm() / std::max(Ax.norm(), 1e-300);
      out.lambda.push_back(lam);
      out.vectors.push_back(x);
      out.residuals.push_back(res);
      if (res > tol) ok = false;
    }
    if (ok) break;
    for (int j = 0; j < p; ++j)
      start.col(j) = j < want ? out.vectors[j] : VectorXd(V.col(cols - 1 - j));
    if (want > p) {
      // fold the remaining wanted vectors into the block
      for (int k = p; k < want; ++k) start.col(k % p) += out.vectors[k];
    }
  }
  std::vector<int> ord(out.lambda.size());
  for (size_t i = 0; i < ord.size(); ++i) ord[i] = static_cast<int>(i);
  std::sort(ord.begin(), ord.end(), [&](int a, int b) { return out.lambda[a] < out.lambda[b]; });
  EigenPairs sorted;
  for (int i : ord) {
    sorted.lambda.push_back(out.lambda[i]);
    sorted.vectors.push_back(out.vectors[i]);
    sorted.residuals.push_back(out.residuals[i]);
  }
  return sorted;
}

}  // namespace conemetric
