#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "conemetric/factorization.hpp"

using namespace conemetric;

namespace {

const cplx I(0.0, 1.0);

WeightVector random_weights(std::mt19937_64& rng, int J) {
  std::uniform_real_distribution<double> u(0.5, 1.5);
  WeightVector w;
  double s = 0.0;
  for (int j = 0; j < J; ++j) s += w.b.emplace_back(u(rng));
  for (auto& b : w.b) b *= J / s;
  return w;
}

CoeffVector random_coeffs(std::mt19937_64& rng, int J, double radius) {
  std::normal_distribution<double> g;
  CoeffVector A;
  double n = 0.0;
  for (int j = 0; j < J; ++j) {
    A.A.emplace_back(g(rng), g(rng));
    n += std::norm(A.A.back());
  }
  for (auto& a : A.A) a *= radius / std::sqrt(n);
  return A;
}

// Series of (1 - x)^b to the given order.
std::vector<double> binom(double b, int order) {
  std::vector<double> c(order + 1);
  c[0] = 1.0;
  for (int k = 1; k <= order; ++k) c[k] = c[k - 1] * (b - k + 1) / k * -1.0;
  return c;
}

}  // namespace

TEST_CASE("forward map examples") {
  auto A = forward_map(std::vector<cplx>{1.0, -1.0}, WeightVector{{1, 1}});
  CHECK(std::abs(A.A[0]) < 1e-15);
  CHECK(std::abs(A.A[1] + 1.0) < 1e-15);
  const cplx tau = std::polar(1.0, 2.0 * M_PI / 3.0);
  auto B = forward_map(std::vector<cplx>{1.0, tau, tau * tau}, WeightVector{{1, 1, 1}});
  CHECK(std::abs(B.A[0]) < 1e-14);
  CHECK(std::abs(B.A[1]) < 1e-14);
  CHECK(std::abs(B.A[2] + 1.0) < 1e-14);
}

TEST_CASE("forward map matches a series product for fractional weights") {
  // (z - 0.1)^{3/2} (z + 0.1)^{1/2} / z^2 = (1 - 0.1/z)^{3/2} (1 + 0.1/z)^{1/2}; keep powers 0..J of 1/z.
  auto s1 = binom(1.5, 6), s2 = binom(0.5, 6);
  std::vector<double> prod(7, 0.0);
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; a + b <= 6; ++b) prod[a + b] += s1[a] * std::pow(0.1, a) * s2[b] * std::pow(-0.1, b);
  auto A = forward_map(std::vector<cplx>{0.1, -0.1}, WeightVector{{1.5, 0.5}});
  CHECK(std::abs(A.A[0] - prod[1]) < 1e-15);
  CHECK(std::abs(A.A[1] - prod[2]) < 1e-15);
}

TEST_CASE("power sums") {
  cplx a1(0.3, -0.2), a2(0.1, 0.4), a3(-0.2, 0.05);
  auto R = power_sums(CoeffVector{{a1, a2}});
  CHECK(std::abs(R[0] + a1) < 1e-15);
  CHECK(std::abs(R[1] - (a1 * a1 - 2.0 * a2)) < 1e-15);
  auto R3 = power_sums(CoeffVector{{a1, a2, a3}});
  CHECK(std::abs(R3[2] - (-a1 * a1 * a1 + 3.0 * a1 * a2 - 3.0 * a3)) < 1e-15);
  for (auto r : power_sums(CoeffVector{{0.0, 0.0, 0.0, 0.0}})) CHECK(std::abs(r) == 0.0);
}

TEST_CASE("inverse map examples") {
  auto inv = inverse_map(CoeffVector{{0.0, -1.0}}, WeightVector{{1, 1}});
  REQUIRE(inv.branches.size() == 2);
  for (auto& b : inv.branches) {
    CHECK(std::abs(std::abs(b.z[0]) - 1.0) < 1e-12);
    CHECK(std::abs(b.z[0] + b.z[1]) < 1e-12);
  }
  auto w = inverse_map(CoeffVector{{0.0, -1.0}}, WeightVector{{1.5, 0.5}});
  bool found = false;
  for (auto& b : w.branches)
    found = found || (std::abs(b.z[0] - std::sqrt(1.0 / 3.0)) < 1e-10 && std::abs(b.z[1] + std::sqrt(3.0)) < 1e-10);
  CHECK(found);
}

TEST_CASE("inverse branches satisfy the power sums") {
  std::mt19937_64 rng(11);
  for (int J = 1; J <= 4; ++J)
    for (int t = 0; t < 10; ++t) {
      auto w = random_weights(rng, J);
      auto A = random_coeffs(rng, J, 0.3);
      auto R = power_sums(A);
      auto inv = inverse_map(A, w);
      int fact = 1;
      for (int i = 2; i <= J; ++i) fact *= i;
      CHECK(static_cast<int>(inv.branches.size()) == fact);
      for (auto& b : inv.branches) {
        std::vector<cplx> bw(w.b.begin(), w.b.end());
        auto P = weighted_power_sums(b.z, bw);
        for (int l = 0; l < J; ++l) CHECK(std::abs(P[l] - R[l]) < 1e-10);
      }
    }
}

TEST_CASE("invalid weights are rejected") {
  CHECK_THROWS_AS(WeightVector({{1.5, 1.0}}).validate(), InvalidInput);
  CHECK_THROWS_AS(WeightVector({{3.0, -1.0, 1.0}}).validate(), InvalidInput);
  CHECK_THROWS_AS(inverse_map(CoeffVector{{0.1}}, WeightVector{{1, 1}}), InvalidInput);
}

TEST_CASE("jacobian") {
  auto j = jacobian(std::vector<cplx>{1.0, -1.0}, WeightVector{{1, 1}});
  CHECK(j.rank == 2);
  CHECK(std::abs(j.determinant) == doctest::Approx(4.0));
  auto s = jacobian(std::vector<cplx>{0.3, 0.3, -0.6}, WeightVector{{1, 1, 1}});
  CHECK(s.rank < 3);
  auto z = jacobian(std::vector<cplx>{0.0, 0.5}, WeightVector{{1.2, 0.8}});
  CHECK(std::abs(z.M(0, 0) - 1.2) < 1e-15);
  CHECK(std::abs(z.M(0, 1) - 0.8) < 1e-15);
}

TEST_CASE("multiplicative error") {
  std::vector<cplx> ring;
  for (int k = 0; k < 32; ++k) ring.push_back(std::polar(0.8, 2.0 * M_PI * k / 32));
  CoeffVector A{{cplx(0.01, 0.02), cplx(-0.01, 0.005)}};
  WeightVector ones{{1, 1}};
  auto inv = inverse_map(A, ones);
  CHECK(multiplicative_error(A, inv.branches[0].z, ones, ring) < 1e-13);
  CHECK(multiplicative_error(CoeffVector{{0.0, 0.0}}, std::vector<cplx>{0.0, 0.0}, WeightVector{{1.5, 0.5}}, ring) <
        1e-15);
  WeightVector w{{1.5, 0.5}};
  std::vector<double> ts, es;
  for (double t = 0.02; t > 1e-4; t /= 2) {
    CoeffVector At{{t * 1.0, t * 1.0}};
    ts.push_back(t);
    es.push_back(multiplicative_error(At, inverse_map(At, w).branches[0].z, w, ring));
  }
  CHECK(loglog_slope(ts, es) > 1.2);
  CHECK_THROWS_AS(multiplicative_error(A, inv.branches[0].z, ones, {cplx(0.01, 0.0)}), InvalidInput);
}

TEST_CASE("roots are bounded by the coefficient scale along rays") {
  std::mt19937_64 rng(12);
  for (int J = 2; J <= 4; ++J) {
    auto w = random_weights(rng, J);
    auto A = random_coeffs(rng, J, 0.3);
    double worst = 0.0;
    for (double t = 1.0; t > 1e-6; t /= 4) {
      CoeffVector At;
      double scale = 0.0;
      for (int i = 0; i < J; ++i) {
        At.A.push_back(t * A.A[i]);
        scale = std::max(scale, std::pow(std::abs(At.A[i]), 1.0 / (i + 1)));
      }
      for (auto& b : inverse_map(At, w).branches)
        for (auto& z : b.z) worst = std::max(worst, std::abs(z) / scale);
    }
    CHECK(worst < 20.0);
  }
}

TEST_CASE("ray limit depends only on A_J") {
  std::mt19937_64 rng(13);
  const int J = 3;
  WeightVector w = random_weights(rng, J);
  cplx AJ(0.12, -0.07);
  auto scaled = [&](const CoeffVector& A, double t) {
    CoeffVector At;
    for (auto& a : A.A) At.A.push_back(t * a);
    auto z = inverse_map(At, w).branches[0].z;
    for (auto& x : z) x /= std::pow(t, 1.0 / J);
    return z;
  };
  std::vector<std::vector<cplx>> limits;
  for (int v = 0; v < 3; ++v) {
    auto A = random_coeffs(rng, J, 0.2);
    A.A[J - 1] = AJ;
    // z(tA)/t^{1/J} = zeta + O(t^{1/J}); one Richardson step in t^{1/J}.
    const double t = 1e-9;
    auto f1 = scaled(A, t), f2 = scaled(A, t / 8);
    std::vector<cplx> lim;
    for (auto& x : f2) {
      auto it = std::min_element(f1.begin(), f1.end(), [&](cplx a, cplx b) { return std::abs(a - x) < std::abs(b - x); });
      lim.push_back(2.0 * x - *it);
    }
    std::sort(lim.begin(), lim.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    limits.push_back(lim);
  }
  for (int v = 1; v < 3; ++v)
    for (int i = 0; i < J; ++i) CHECK(std::abs(limits[v][i] - limits[0][i]) < 1e-6);
}

TEST_CASE("derivative identity at A = 0") {
  // The derivative of sum b_j log|z - z_j(A)| at A = 0 along a direction d is Re sum d_l z^{-l}.
  // Along A = s d the roots scale like s^{1/J}, so the central difference carries powers of
  // t = s^{1/J}; Richardson in t removes them. d_J != 0 keeps the continuation off the discriminant.
  std::mt19937_64 rng(14);
  const int J = 3;
  auto w = random_weights(rng, J);
  for (int trial = 0; trial < 4; ++trial) {
    auto d = random_coeffs(rng, J, 1.0);
    for (int k = 0; k < 6; ++k) {
      cplx z = std::polar(0.5, 2.0 * M_PI * (k + 0.3) / 6);
      auto v = [&](double s) {
        CoeffVector A;
        for (auto& x : d.A) A.A.push_back(s * x);
        auto zz = inverse_map(A, w).branches[0].z;
        double acc = 0.0;
        for (int j = 0; j < J; ++j) acc += w.b[j] * std::log(std::abs(1.0 - zz[j] / z));
        return acc;
      };
      const int levels = 5;
      std::vector<double> D;
      double h = 1e-3;
      for (int i = 0; i < levels; ++i, h /= 8.0) D.push_back((v(h) - v(-h)) / (2 * h));
      for (int order = 1; order < levels; ++order)
        for (int i = 0; i + order < levels; ++i) {
          double f = std::pow(2.0, order);
          D[i] = (f * D[i + 1] - D[i]) / (f - 1.0);
        }
      cplx expect = 0.0;
      for (int l = 1; l <= J; ++l) expect += d.A[l - 1] * std::pow(z, -l);
      CHECK(std::abs(D[0] - expect.real()) < 1e-6);
    }
  }
}

TEST_CASE("expansion examples") {
  WeightVector ones{{1, 1, 1}};
  const double theta = 0.7;
  std::vector<cplx> At{cplx(0.3, 0.1), cplx(-0.2, 0.4), std::polar(1.0, theta)};
  auto e = expansion_coeffs(theta, At, ones, 0);
  const cplx tau(-0.5, std::sqrt(3.0) / 2.0);
  for (int i = 0; i < 3; ++i) {
    double best = 1e300;
    for (int j = 1; j <= 3; ++j) best = std::min(best, std::abs(e.c(i, 0) + std::polar(1.0, theta / 3) * std::pow(tau, j)));
    CHECK(best < 1e-12);
    CHECK(std::abs(e.c(i, 2) + At[0] / 3.0) < 1e-12);
  }
  // J = 2: the centre of mass moves like -A~_1 rho^2 / 2.
  WeightVector two{{1, 1}};
  std::vector<cplx> A2{cplx(0.4, -0.3), std::polar(1.0, theta)};
  auto e2 = expansion_coeffs(theta, A2, two, 0);
  CHECK(std::abs((e2.c(0, 1) + e2.c(1, 1)) / 2.0 + 0.5 * A2[0]) < 1e-12);
}

TEST_CASE("expansion reproduces the inverse map along rays") {
  std::mt19937_64 rng(15);
  for (int J = 2; J <= 3; ++J) {
    auto w = random_weights(rng, J);
    auto A = random_coeffs(rng, J, 1.0);
    CoeffVector unit = A;
    double rho0 = A.rho();
    auto e = expansion_coeffs(A.theta(), A.Atilde(), w, 0);
    std::vector<double> rs, errs;
    for (double rho = 0.02; rho > 0.002; rho /= 1.5) {
      // A(rho) has |A_J| = rho^J and the same normalized direction.
      CoeffVector Ar;
      for (int i = 0; i < J; ++i) Ar.A.push_back(unit.A[i] * std::pow(rho / rho0, J));
      auto pred = expansion_eval(e, rho);
      double err = 1e300;
      for (auto& b : inverse_map(Ar, w).branches) {
        double m = 0.0;
        for (int i = 0; i < J; ++i) m = std::max(m, std::abs(b.z[i] - pred[i]));
        err = std::min(err, m);
      }
      rs.push_back(rho);
      errs.push_back(err);
    }
    CHECK(loglog_slope(rs, errs) > J + 0.8);
  }
}

TEST_CASE("blowup chart J = 2") {
  WeightVector ones{{1, 1}};
  CoeffVector A{{cplx(0.02, 0.01), cplx(-0.003, 0.004)}};
  auto b = blowup_chart_J2(A, ones);
  CHECK(std::abs(b.c) < 1e-14);
  CHECK(std::abs(b.z0 + 0.5 * A.A[0]) < 1e-14);
  CHECK_THROWS_AS(blowup_chart_J2(CoeffVector{{0.1, 0.0}}, ones), InvalidInput);

  WeightVector w{{1.3, 0.7}};
  std::vector<double> rs, dphi, dz;
  for (double rho = 1e-1; rho > 1e-4; rho /= 3) {
    CoeffVector Ar{{cplx(0.4, 0.2) * rho * rho, std::polar(rho * rho, 0.9)}};
    auto c = blowup_chart_J2(Ar, w);
    rs.push_back(rho);
    dz.push_back(std::abs(c.z0_2 - c.z0_2_lead));
    dphi.push_back(std::abs(c.phi - c.phi_lead));
  }
  CHECK(loglog_slope(rs, dz) >= 0.95);
  CHECK(dphi.back() < 1e-6);
}

TEST_CASE("cluster tree") {
  auto t = cluster_tree({0.0, 1e-3, 1.0});
  REQUIRE(t.size() >= 2);
  CHECK(t[0].members == std::vector<int>{0, 1});
  CHECK(t[0].radius == doctest::Approx(1e-3));
  CHECK(t.back().members == std::vector<int>{0, 1, 2});
  CHECK(t.back().radius == doctest::Approx(1.0));
  auto same = cluster_tree({0.5, 0.5, 0.5});
  CHECK(same.back().radius == 0.0);
  CHECK(same.back().members.size() == 3);
  double tt = 1e-2;
  auto n = cluster_tree({0.0, tt, tt * tt});
  CHECK(n[0].members == std::vector<int>{0, 2});
}
