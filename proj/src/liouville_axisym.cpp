#include <algorithm>
#include <cmath>

#include "liouville_internal.hpp"

namespace conemetric {

namespace {

// Half-width of the cylinder: the bounded part settles like exp(-2 min(beta, 1)|y|).
double cylinder_half_width(const ConicProblem& p) {
  double b = std::min({p.beta.beta[0], p.beta.beta[1], 1.0});
  return std::min(40.0, 15.0 / b);
}

}  // namespace

// Rotationally symmetric reduction on the cylinder y = log|z|, cell centred grid.
// Row i: -w'' + sech^2(y) (chi/2 - K e^{2v+2w}) with Neumann ends.
void build_axisym(const ConicProblem& p, const MeshParams& m, bool half, Grid& g, DiscreteSystem& s,
                  std::vector<std::string>& warnings) {
  (void)warnings;
  const double h = 4.0 / m.n;
  const int H = static_cast<int>(std::ceil(cylinder_half_width(p) / h));
  const int N = half ? H : 2 * H;
  g.kind = GridKind::axisym;
  g.hy = h;
  g.Y = H * h;
  g.y.resize(N);
  for (int i = 0; i < N; ++i) g.y[i] = half ? (i + 0.5) * h : -g.Y + (i + 0.5) * h;
  g.unknowns = N;
  const double bs = p.beta.beta[0], bn = p.beta.beta[1];
  const double chi = conic_euler_char(p.beta);
  s.K = p.K;
  s.c.resize(N);
  s.M0.resize(N);
  s.b = Eigen::VectorXd::Zero(N);
  s.q.resize(N);
  s.pde.assign(N, 1);
  g.v.resize(N);
  g.pos.resize(N);
  std::vector<Eigen::Triplet<double>> tr;
  const double ih2 = 1.0 / (h * h);
  for (int i = 0; i < N; ++i) {
    double y = g.y[i];
    double lds = std::log(2.0) - 0.5 * softplus(-2.0 * y);
    double ldn = std::log(2.0) - 0.5 * softplus(2.0 * y);
    double v = (bs - 1.0) * lds + (bn - 1.0) * ldn;
    double ls = log_sech(y);
    s.c(i) = std::exp(2.0 * ls) * 0.5 * chi;
    s.M0(i) = std::exp(2.0 * ls + 2.0 * v);
    s.q(i) = (half ? 4.0 : 2.0) * M_PI * h * s.M0(i);
    g.v(i) = v;
    g.pos[i] = sphere_point(std::exp(y));
    double diag = 2.0 * ih2;
    if (i == 0 || i == N - 1) diag -= ih2;
    tr.emplace_back(i, i, diag);
    if (i > 0) tr.emplace_back(i, i - 1, -ih2);
    if (i + 1 < N) tr.emplace_back(i, i + 1, -ih2);
  }
  s.A.resize(N, N);
  s.A.setFromTriplets(tr.begin(), tr.end());
}

void axisym_mode(const DiscreteConicMetric& metric, int mode, std::vector<double>& d, std::vector<double>& e,
                 std::vector<double>& mass) {
  const Grid& g = *metric.grid;
  const int N = static_cast<int>(g.y.size());
  const double h = g.hy, ih2 = 1.0 / (h * h);
  d.assign(N, 2.0 * ih2 + double(mode) * mode);
  e.assign(N - 1, -ih2);
  // Ghost values decay like exp(-mode |y|); mode 0 gets a Neumann end.
  const double ghost = std::exp(-mode * h);
  d[0] -= ghost * ih2;
  d[N - 1] -= ghost * ih2;
  mass.resize(N);
  for (int i = 0; i < N; ++i) mass[i] = metric.system->M0(i) * std::exp(2.0 * metric.w(i));
}

}  // namespace conemetric
