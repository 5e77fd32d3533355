#include "conemetric/factorization.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace conemetric {

namespace {

const cplx I1(0.0, 1.0);

double vnorm(const Eigen::VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

void WeightVector::validate(double tol) const {
  const int n = J();
  if (n == 0) throw InvalidInput("weight vector is empty");
  if (n > 20) throw InvalidInput("weight vector too long");
  double s = 0.0;
  for (double x : b) {
    if (!std::isfinite(x) || std::abs(x) <= tol) throw InvalidInput("weights must be finite and nonzero");
    s += x;
  }
  if (std::abs(s - n) > tol * n) throw InvalidInput("weights must sum to J");
  for (long long mask = 1; mask < (1LL << n); ++mask) {
    double t = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) t += b[i];
    if (std::abs(t) <= tol) throw InvalidInput("a nonempty subset of the weights sums to zero");
  }
}

bool WeightVector::all_ones(double tol) const {
  return std::all_of(b.begin(), b.end(), [&](double x) { return std::abs(x - 1.0) <= tol; });
}

double CoeffVector::rho() const { return A.empty() ? 0.0 : std::pow(std::abs(A.back()), 1.0 / J()); }
double CoeffVector::theta() const { return A.empty() ? 0.0 : std::arg(A.back()); }

std::vector<cplx> CoeffVector::Atilde() const {
  double m = A.empty() ? 0.0 : std::abs(A.back());
  if (m == 0.0) throw InvalidInput("A_J = 0: normalization undefined");
  std::vector<cplx> t(A);
  for (auto& x : t) x /= m;
  return t;
}

CoeffVector forward_map(const std::vector<cplx>& z, const WeightVector& w) {
  const int J = w.J();
  if (static_cast<int>(z.size()) != J) throw InvalidInput("forward_map: size mismatch");
  const int order = J + 2;
  // Product of the binomial series of (1 - z_j/z)^{b_j} in powers of 1/z.
  std::vector<cplx> prod(order + 1, 0.0);
  prod[0] = 1.0;
  for (int j = 0; j < J; ++j) {
    std::vector<cplx> s(order + 1);
    double coef = 1.0;
    cplx p = 1.0;
    for (int k = 0; k <= order; ++k) {
      s[k] = coef * p;
      coef *= (w.b[j] - k) / (k + 1.0);
      p *= -z[j];
    }
    std::vector<cplx> next(order + 1, 0.0);
    for (int a = 0; a <= order; ++a)
      for (int c = 0; a + c <= order; ++c) next[a + c] += prod[a] * s[c];
    prod.swap(next);
  }
  CoeffVector out;
  out.A.assign(prod.begin() + 1, prod.begin() + 1 + J);
  return out;
}

std::vector<cplx> power_sums(const CoeffVector& A) {
  const int J = A.J();
  std::vector<cplx> R(J);
  for (int l = 1; l <= J; ++l) {
    cplx s = static_cast<double>(l) * A.A[l - 1];
    for (int i = 1; i < l; ++i) s += A.A[i - 1] * R[l - i - 1];
    R[l - 1] = -s;
  }
  return R;
}

std::vector<cplx> weighted_power_sums(const std::vector<cplx>& z, const std::vector<cplx>& b) {
  const int J = static_cast<int>(z.size());
  std::vector<cplx> p(J, 0.0);
  for (int j = 0; j < J; ++j) {
    cplx zp = 1.0;
    for (int l = 0; l < J; ++l) {
      zp *= z[j];
      p[l] += b[j] * zp;
    }
  }
  return p;
}

std::vector<cplx> monic_roots(const std::vector<cplx>& A) {
  const int J = static_cast<int>(A.size());
  if (J == 0) return {};
  std::vector<cplx> roots;
  if (J == 1) {
    roots.push_back(-A[0]);
  } else {
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(J, J);
    for (int i = 1; i < J; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < J; ++i) C(i, J - 1) = -A[J - 1 - i];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    for (int i = 0; i < J; ++i) roots.push_back(es.eigenvalues()(i));
  }
  auto P = [&](cplx z, cplx& dP) {
    cplx p = 1.0;
    dP = 0.0;
    for (int i = 0; i < J; ++i) {
      dP = dP * z + p;
      p = p * z + A[i];
    }
    return p;
  };
  for (auto& r : roots) {
    for (int it = 0; it < 4; ++it) {
      cplx d;
      cplx p = P(r, d);
      if (std::abs(d) == 0.0) break;
      cplx step = p / d;
      if (!std::isfinite(std::abs(step))) break;
      r -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(r))) break;
    }
  }
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

JacobianResult jacobian(const std::vector<cplx>& z, const WeightVector& w) {
  const int J = w.J();
  if (static_cast<int>(z.size()) != J) throw InvalidInput("jacobian: size mismatch");
  JacobianResult r;
  r.M.resize(J, J);
  for (int j = 0; j < J; ++j) {
    cplx p = 1.0;
    for (int l = 1; l <= J; ++l) {
      r.M(l - 1, j) = static_cast<double>(l) * w.b[j] * p;
      p *= z[j];
    }
  }
  r.determinant = r.M.determinant();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r.M);
  const auto& sv = svd.singularValues();
  double smax = sv(0), smin = sv(J - 1);
  r.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  r.rank = 0;
  for (int i = 0; i < J; ++i)
    if (sv(i) > 1e-12 * J * smax) ++r.rank;
  return r;
}

namespace {

struct Tracker {
  int J;
  std::vector<cplx> target;  // scaled power sums
  std::vector<double> b;
  std::vector<double> g;
  double kappa;

  cplx weight(int j, double s) const { return (1.0 - s) + s * b[j] + I1 * kappa * s * (1.0 - s) * g[j]; }
  cplx dweight(int j, double s) const { return (b[j] - 1.0) + I1 * kappa * (1.0 - 2.0 * s) * g[j]; }

  Eigen::VectorXcd H(const Eigen::VectorXcd& z, double s) const {
    Eigen::VectorXcd h(J);
    for (int l = 0; l < J; ++l) h(l) = -target[l];
    for (int j = 0; j < J; ++j) {
      cplx w = weight(j, s), p = 1.0;
      for (int l = 0; l < J; ++l) {
        p *= z(j);
        h(l) += w * p;
      }
    }
    return h;
  }
  Eigen::MatrixXcd Hz(const Eigen::VectorXcd& z, double s) const {
    Eigen::MatrixXcd M(J, J);
    for (int j = 0; j < J; ++j) {
      cplx w = weight(j, s), p = 1.0;
      for (int l = 1; l <= J; ++l) {
        M(l - 1, j) = static_cast<double>(l) * w * p;
        p *= z(j);
      }
    }
    return M;
  }
  Eigen::VectorXcd tangent(const Eigen::VectorXcd& z, double s) const {
    Eigen::VectorXcd hs = Eigen::VectorXcd::Zero(J);
    for (int j = 0; j < J; ++j) {
      cplx dw = dweight(j, s), p = 1.0;
      for (int l = 0; l < J; ++l) {
        p *= z(j);
        hs(l) += dw * p;
      }
    }
    return -Hz(z, s).partialPivLu().solve(hs);
  }
  // Returns iterations used, or -1 on failure.
  int correct(Eigen::VectorXcd& z, double s, double tol, int max_it) const {
    for (int it = 0; it < max_it; ++it) {
      Eigen::VectorXcd d = Hz(z, s).partialPivLu().solve(H(z, s));
      if (!d.allFinite()) return -1;
      z -= d;
      if (vnorm(d) <= tol * std::max(1.0, vnorm(z))) return it + 1;
    }
    return -1;
  }
};

}  // namespace

InverseResult inverse_map(const CoeffVector& A, const WeightVector& w, const InverseOptions& opt) {
  w.validate();
  const int J = w.J();
  if (A.J() != J) throw InvalidInput("inverse_map: coefficient and weight sizes differ");
  for (auto& a : A.A)
    if (!std::isfinite(std::abs(a))) throw InvalidInput("inverse_map: non-finite coefficient");

  double sigma = 0.0;
  for (int i = 1; i <= J; ++i) sigma = std::max(sigma, std::pow(std::abs(A.A[i - 1]), 1.0 / i));

  std::vector<int> perm(J);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  const int nb = static_cast<int>(perms.size());

  InverseResult res;
  res.branches.resize(nb);
  if (sigma == 0.0) {
    for (int k = 0; k < nb; ++k) {
      res.branches[k].z.assign(J, 0.0);
      res.branches[k].branch_id = k;
      res.branches[k].distinct = J < 2;
      res.branches[k].near_discriminant = J >= 2;
      res.branches[k].condition = J >= 2 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    res.collapse = J >= 2;
    res.near_discriminant = J >= 2;
    return res;
  }

  std::vector<cplx> R = power_sums(A);
  std::vector<cplx> roots = monic_roots(A.A);
  Tracker tr;
  tr.J = J;
  tr.b = w.b;
  tr.kappa = opt.detour;
  for (int l = 0; l < J; ++l) tr.target.push_back(R[l] / std::pow(sigma, l + 1));
  for (int j = 0; j < J; ++j) tr.g.push_back(1.0 + 0.37 * j);
  for (auto& r : roots) r /= sigma;

  const bool equal = w.all_ones();
  parallel_for(nb, [&](int k) {
    Eigen::VectorXcd z(J);
    for (int j = 0; j < J; ++j) z(j) = roots[perms[k][j]];
    if (!equal) {
      double s = 0.0, ds = 0.02;
      while (s < 1.0) {
        double h = std::min(ds, 1.0 - s);
        // Runge-Kutta predictor on the tangent field, Newton corrector.
        Eigen::VectorXcd k1 = tr.tangent(z, s);
        Eigen::VectorXcd k2 = tr.tangent(z + 0.5 * h * k1, s + 0.5 * h);
        Eigen::VectorXcd k3 = tr.tangent(z + 0.5 * h * k2, s + 0.5 * h);
        Eigen::VectorXcd k4 = tr.tangent(z + h * k3, s + h);
        Eigen::VectorXcd pred = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        Eigen::VectorXcd corr = pred;
        int its = pred.allFinite() ? tr.correct(corr, s + h, opt.newton_tol, 6) : -1;
        double jump = vnorm(corr - z), pstep = vnorm(pred - z);
        bool ok = its > 0 && its <= 4 && jump <= 10.0 * pstep + 1e-12 && vnorm(corr - pred) <= 0.05 * (1.0 + vnorm(z));
        if (ok) {
          z = corr;
          s += h;
          if (its <= 2) ds = std::min(opt.max_step, ds * 1.5);
        } else {
          ds *= 0.5;
          if (ds < opt.min_step) {
            std::ostringstream os;
            os << "continuation failed on branch " << k << " at s = " << s;
            throw ContinuationFailure(k, s, os.str());
          }
        }
      }
    }
    tr.correct(z, 1.0, 1e-15, 3);
    auto& br = res.branches[k];
    br.branch_id = k;
    br.z.resize(J);
    for (int j = 0; j < J; ++j) br.z[j] = z(j) * sigma;
    std::vector<cplx> zs(z.data(), z.data() + J);
    auto jr = jacobian(zs, w);
    br.condition = jr.condition;
    br.near_discriminant = jr.condition > opt.near_discriminant;
    double md = std::numeric_limits<double>::infinity();
    for (int a = 0; a < J; ++a)
      for (int c = a + 1; c < J; ++c) md = std::min(md, std::abs(br.z[a] - br.z[c]));
    br.min_distance = J > 1 ? md : 0.0;
    br.distinct = J < 2 || md > 1e-8 * sigma;
  });

  for (int a = 0; a < nb; ++a) {
    res.near_discriminant = res.near_discriminant || res.branches[a].near_discriminant;
    for (int c = a + 1; c < nb; ++c) {
      double d = 0.0;
      for (int j = 0; j < J; ++j) d = std::max(d, std::abs(res.branches[a].z[j] - res.branches[c].z[j]));
      if (d <= 1e-8 * sigma) res.collapse = true;
    }
  }
  return res;
}

double multiplicative_error(const CoeffVector& A, const std::vector<cplx>& z, const WeightVector& w,
                            const std::vector<cplx>& samples) {
  const int J = w.J();
  if (A.J() != J || static_cast<int>(z.size()) != J) throw InvalidInput("multiplicative_error: size mismatch");
  double zmax = 0.0;
  for (auto& x : z) zmax = std::max(zmax, std::abs(x));
  double err = 0.0;
  for (auto& s : samples) {
    double r = std::abs(s);
    if (!(r > zmax) || !(r < 1.0)) throw InvalidInput("multiplicative_error: sample inside exclusion radius");
    cplx p = 1.0;
    for (int i = 0; i < J; ++i) p = p * s + A.A[i];
    double v = 0.0;
    for (int j = 0; j < J; ++j) v += w.b[j] * std::log(std::abs(s - z[j]));
    err = std::max(err, std::abs(std::log(std::abs(p)) - v));
  }
  return err;
}

namespace {

void enumerate_q(int l, int k, int idx, int left_count, int left_weight, const std::vector<cplx>& c,
                 std::vector<int>& mult, cplx& acc) {
  const int top = static_cast<int>(mult.size());
  if (idx > top) {
    if (left_count == 0 && left_weight == 0 && mult[0] < l - 1) {
      double coef = std::tgamma(l + 1.0);
      cplx term = 1.0;
      for (int j = 0; j < top; ++j) {
        coef /= std::tgamma(mult[j] + 1.0);
        for (int t = 0; t < mult[j]; ++t) term *= c[j];
      }
      acc += coef * term;
    }
    return;
  }
  for (int m = 0; m <= left_count && m * idx <= left_weight; ++m) {
    mult[idx - 1] = m;
    enumerate_q(l, k, idx + 1, left_count - m, left_weight - m * idx, c, mult, acc);
  }
  mult[idx - 1] = 0;
}

}  // namespace

cplx q_term(int l, int k, const std::vector<cplx>& c) {
  if (l < 1 || k < 0) throw InvalidInput("q_term: invalid indices");
  const int top = std::min(static_cast<int>(c.size()), k + 1);
  if (top == 0) return 0.0;
  std::vector<int> mult(top, 0);
  cplx acc = 0.0;
  enumerate_q(l, k, 1, l, l + k, c, mult, acc);
  return acc;
}

ExpansionData expansion_coeffs(double theta, const std::vector<cplx>& Atilde, const WeightVector& w, int branch) {
  w.validate();
  const int J = w.J();
  if (static_cast<int>(Atilde.size()) != J) throw InvalidInput("expansion_coeffs: Atilde must have J entries");
  CoeffVector lead;
  lead.A.assign(J, 0.0);
  lead.A[J - 1] = std::polar(1.0, theta);
  auto inv = inverse_map(lead, w);
  if (branch < 0 || branch >= static_cast<int>(inv.branches.size()))
    throw InvalidInput("expansion_coeffs: branch out of range");
  const auto& c1 = inv.branches[branch].z;

  for (int a = 0; a < J; ++a)
    for (int b = a + 1; b < J; ++b)
      if (std::abs(c1[a] - c1[b]) < 1e-10) {
        std::ostringstream os;
        os << "expansion_coeffs: leading coefficients c_" << a + 1 << "1 and c_" << b + 1 << "1 coincide";
        throw InvalidInput(os.str());
      }

  ExpansionData e;
  e.theta = theta;
  e.branch_id = branch;
  e.c = Eigen::MatrixXcd::Zero(J, J);
  Eigen::MatrixXcd T(J, J);
  for (int i = 0; i < J; ++i) {
    e.c(i, 0) = c1[i];
    cplx p = 1.0;
    for (int l = 1; l <= J; ++l) {
      T(l - 1, i) = static_cast<double>(l) * w.b[i] * p;
      p *= c1[i];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(T);
  for (int k = 2; k <= J; ++k) {
    Eigen::VectorXcd y(J);
    for (int l = 1; l <= J; ++l) {
      cplx v = (l + k - 1 == J) ? -static_cast<double>(l) * Atilde[l - 1] : cplx(0.0);
      for (int i = 0; i < J; ++i) {
        std::vector<cplx> ci(k - 1);
        for (int m = 0; m < k - 1; ++m) ci[m] = e.c(i, m);
        v -= w.b[i] * q_term(l, k - 1, ci);
      }
      y(l - 1) = v;
    }
    e.c.col(k - 1) = lu.solve(y);
  }
  return e;
}

std::vector<cplx> expansion_eval(const ExpansionData& e, double rho) {
  const int J = static_cast<int>(e.c.rows());
  std::vector<cplx> z(J, 0.0);
  for (int i = 0; i < J; ++i) {
    double p = 1.0;
    for (int k = 0; k < e.c.cols(); ++k) {
      p *= rho;
      z[i] += e.c(i, k) * p;
    }
  }
  return z;
}

BlowupChart blowup_chart_J2(const CoeffVector& A, const WeightVector& w) {
  w.validate();
  if (w.J() != 2 || A.J() != 2) throw InvalidInput("blowup_chart_J2 requires J = 2");
  if (std::abs(A.A[1]) == 0.0) throw InvalidInput("A_2 = 0 lies outside Omega");
  BlowupChart ch;
  const double rho = A.rho(), theta = A.theta();
  const cplx At1 = A.A[0] / std::abs(A.A[1]);
  const cplx bb = std::sqrt(cplx(w.b[1] / w.b[0]));
  const cplx eh = std::polar(1.0, theta / 2.0);
  const cplx S = 2.0 * I1 * rho * eh * std::sqrt(1.0 - rho * rho * At1 * At1 / (4.0 * std::polar(1.0, theta)));
  ch.z1 = -0.5 * A.A[0] + 0.5 * bb * S;
  ch.z2 = -0.5 * A.A[0] - 0.5 * S / bb;
  ch.z0 = 0.5 * (ch.z1 + ch.z2);
  const cplx zt = 0.5 * (ch.z1 - ch.z2);
  ch.c = 0.5 * (bb - 1.0 / bb) * I1 * eh;
  const cplx cp = 0.5 * (bb + 1.0 / bb) * I1;
  ch.cprime = std::abs(cp);
  ch.R = std::abs(zt);
  double a = std::arg(zt / (cp / ch.cprime)) - theta / 2.0;
  a = std::remainder(a, 2.0 * M_PI);
  ch.phi = theta / 2.0 + a;
  const double Rn = ch.R / ch.cprime;
  ch.z0_1 = ch.z0 / Rn;
  ch.z0_2 = (ch.z0_1 - ch.c) / Rn;
  ch.R_lead = ch.cprime * rho;
  ch.phi_lead = theta / 2.0;
  ch.z0_2_lead = -0.5 * At1;
  return ch;
}

std::vector<ClusterNode> cluster_tree(const std::vector<cplx>& points) {
  const int K = static_cast<int>(points.size());
  if (K < 2) throw InvalidInput("cluster_tree requires at least two points");
  struct Edge {
    double d;
    int a, b;
  };
  std::vector<Edge> edges;
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b) edges.push_back({std::abs(points[a] - points[b]), a, b});
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.d < y.d; });

  std::vector<int> parent(K);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };

  std::vector<ClusterNode> nodes;
  size_t e = 0;
  while (e < edges.size()) {
    const double d0 = edges[e].d;
    const double tol = 1e-12 * std::max(1.0, d0);
    std::vector<int> touched;
    while (e < edges.size() && edges[e].d <= d0 + tol) {
      int ra = find(edges[e].a), rb = find(edges[e].b);
      if (ra != rb) {
        parent[ra] = rb;
        touched.push_back(edges[e].a);
      }
      ++e;
    }
    std::vector<int> roots;
    for (int t : touched) roots.push_back(find(t));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    for (int r : roots) {
      ClusterNode n;
      n.link = d0;
      for (int i = 0; i < K; ++i)
        if (find(i) == r) n.members.push_back(i);
      for (size_t x = 0; x < n.members.size(); ++x)
        for (size_t y = x + 1; y < n.members.size(); ++y)
          n.radius = std::max(n.radius, std::abs(points[n.members[x]] - points[n.members[y]]));
      nodes.push_back(std::move(n));
    }
  }
  return nodes;
}

}  // namespace conemetric
