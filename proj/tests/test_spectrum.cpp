#include <doctest.h>

#include <cmath>
#include <set>

#include "conemetric/spectrum.hpp"

using namespace conemetric;

namespace {

int total_multiplicity(const std::vector<EigenMode>& v) {
  int n = 0;
  for (auto& m : v) n += m.multiplicity;
  return n;
}

// RK4 for sin^2 R'' + sin cos R' + (lambda sin^2 - nu^2) R = 0 written as a first-order system.
std::pair<double, double> integrate(double nu, double lambda, double r0, double R0, double dR0, double r1, int steps) {
  auto f = [&](double r, double R, double P, double& dR, double& dP) {
    double s = std::sin(r), c = std::cos(r);
    dR = P;
    dP = -(c / s) * P - (lambda - nu * nu / (s * s)) * R;
  };
  double h = (r1 - r0) / steps, r = r0, R = R0, P = dR0;
  for (int i = 0; i < steps; ++i) {
    double k1, l1, k2, l2, k3, l3, k4, l4;
    f(r, R, P, k1, l1);
    f(r + h / 2, R + h / 2 * k1, P + h / 2 * l1, k2, l2);
    f(r + h / 2, R + h / 2 * k2, P + h / 2 * l2, k3, l3);
    f(r + h, R + h * k3, P + h * l3, k4, l4);
    R += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    P += h / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
    r += h;
  }
  return {R, P};
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("football eigenvalue examples") {
  auto round = football_eigenvalues(1.0, 2.0);
  CHECK(total_multiplicity(round) == 4);
  CHECK(round[0].lambda == doctest::Approx(0.0));
  for (size_t i = 1; i < round.size(); ++i) CHECK(round[i].lambda == doctest::Approx(2.0));
  CHECK(total_multiplicity(football_eigenvalues(2.5, 2.0)) == 6);
  CHECK(football_lambda(3.7, 0, 1) == doctest::Approx(2.0));
  for (auto& m : football_eigenvalues(2.5, 10.0)) {
    CHECK(m.multiplicity == (m.j == 0 ? 1 : 2));
    CHECK(m.simple == (m.j == 0));
  }
}

TEST_CASE("count formula from the closed form and the oracle") {
  for (double b : {1.5, 2.5, 3.5, 4.25}) {
    CHECK(football_count(b, 2.0, false) == 2 + 2 * int_part(b));
    CHECK(numeric_football_count(b, 2.0, false) == 2 + 2 * int_part(b));
  }
  // At integer beta the pair j = beta sits at 2, so the two counts differ by 3.
  CHECK(football_count(2.0, 2.0, false) == 6);
  CHECK(football_count(2.0, 2.0, true) == 3);
  CHECK(numeric_football_count(2.0, 2.0, true) == 3);
}

TEST_CASE("Sturm-Liouville oracle matches the closed form") {
  for (double b : {0.5, 1.5, 2.7, M_PI})
    for (int j = 0; j <= 3; ++j) {
      auto sl = radial_sturm_liouville(b, j, 2048, 5);
      for (int l = 0; l < 5; ++l)
        CHECK(sl.eigenvalues[l] == doctest::Approx(football_lambda(b, j, l)).epsilon(1e-6).scale(1.0));
    }
  auto one = radial_sturm_liouville(1.0, 0, 2048, 5);
  const double expect[5] = {0, 2, 6, 12, 20};
  for (int l = 0; l < 5; ++l) CHECK(std::abs(one.eigenvalues[l] - expect[l]) < 1e-6);
  CHECK(radial_sturm_liouville(0.5, 1, 2048, 1).eigenvalues[0] == doctest::Approx(6.0));
  CHECK_THROWS_AS(radial_sturm_liouville(1.0, 0, 32), InvalidInput);
}

TEST_CASE("eigenfunction closed forms") {
  auto c = football_eigenfunction(1.7, 0, 1);
  for (double r : {0.3, 1.0, 2.0, 2.9}) CHECK(c(r) / c(0.1) == doctest::Approx(std::cos(r) / std::cos(0.1)));
  auto s = football_eigenfunction(1.0, 1, 0);
  for (double r : {0.3, 1.0, 2.0}) CHECK(s(r) / s(0.5) == doctest::Approx(std::sin(r) / std::sin(0.5)));
  // r^{j/beta} behaviour at the cone point.
  auto e = football_eigenfunction(2.5, 2, 1);
  double ratio = e(1e-4) / e(2e-4);
  CHECK(ratio == doctest::Approx(std::pow(0.5, 2.0 / 2.5)).epsilon(1e-6));
}

TEST_CASE("eigenfunction agrees with ODE integration") {
  for (double b : {0.7, 2.5, 3.3})
    for (int j = 0; j <= 3; ++j)
      for (int l = 0; l <= 2; ++l) {
        auto f = football_eigenfunction(b, j, l);
        const double r0 = 0.2, r1 = 2.6;
        auto [R, P] = integrate(f.order(), f.lambda(), r0, f(r0), f.derivative(r0), r1, 4000);
        double scale = std::max(1.0, std::abs(f(r1)));
        CHECK(std::abs(R - f(r1)) < 1e-8 * scale);
        CHECK(std::abs(P - f.derivative(r1)) < 1e-7 * std::max(1.0, std::abs(f.derivative(r1))));
      }
}

TEST_CASE("eigenfunction residual by finite differences") {
  for (double b : {0.5, 1.5, 2.7}) {
    auto f = football_eigenfunction(b, 2, 1);
    const double nu = f.order(), lam = f.lambda(), h = 1e-3;
    double worst = 0.0;
    for (double r = 0.3; r < 2.9; r += 0.1) {
      double s = std::sin(r), c = std::cos(r);
      auto d2h = [&](double k) { return (f(r + k) - 2 * f(r) + f(r - k)) / (k * k); };
      auto d1h = [&](double k) { return (f(r + k) - f(r - k)) / (2 * k); };
      double d2 = (4 * d2h(h / 2) - d2h(h)) / 3, d1 = (4 * d1h(h / 2) - d1h(h)) / 3;
      worst = std::max(worst, std::abs(s * s * d2 + s * c * d1 + (lam * s * s - nu * nu) * f(r)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("eigenfunctions are normalized and orthogonal") {
  const double b = 2.2;
  for (int j = 0; j <= 2; ++j) {
    double ang = j == 0 ? 2 * M_PI : M_PI;
    for (int l1 = 0; l1 <= 2; ++l1)
      for (int l2 = l1; l2 <= 2; ++l2) {
        auto f = football_eigenfunction(b, j, l1), g = football_eigenfunction(b, j, l2);
        double ip = ang * b * simpson([&](double r) { return f(r) * g(r) * std::sin(r); }, 0.0, M_PI, 4000);
        CHECK(ip == doctest::Approx(l1 == l2 ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
      }
  }
}

TEST_CASE("triangle eigenvalues") {
  // j/5 < 1 gives j = 1..4.
  CHECK(triangle_count(5.0, 2.0, true) == 4);
  CHECK(triangle_count(5.0, 2.0, false) == 5);
  auto one = triangle_dirichlet_eigenvalues(1.0, 2.0);
  REQUIRE_FALSE(one.empty());
  CHECK(one[0].lambda == doctest::Approx(2.0));
  auto t = triangle_dirichlet_eigenvalues(2.5, 2.0);
  std::set<int> js;
  for (auto& m : t)
    if (m.lambda < 2.0) js.insert(m.j);
  CHECK(js == std::set<int>{1, 2});
}

TEST_CASE("spectral flow crossings") {
  auto path = [](double a, double b, int n) {
    std::vector<double> p;
    for (int i = 0; i < n; ++i) p.push_back(a + (b - a) * i / (n - 1));
    return p;
  };
  auto r = eigenvalue_flow(path(1.5, 2.5, 41), 6);
  REQUIRE(r.crossings.size() == 1);
  CHECK(r.crossings[0].beta_star == doctest::Approx(2.0));
  CHECK(r.crossings[0].j == 2);
  CHECK(r.crossings[0].ell == 0);
  CHECK(eigenvalue_flow(std::vector<double>(5, 2.3), 6).crossings.empty());
  auto w = eigenvalue_flow(path(0.5, 3.5, 61), 6);
  std::set<int> at;
  for (auto& c : w.crossings) at.insert(static_cast<int>(std::lround(c.beta_star)));
  CHECK(at == std::set<int>{1, 2, 3});
  for (size_t i = 0; i < r.beta.size(); ++i) CHECK(r.below[i] <= r.at_most[i]);
}
