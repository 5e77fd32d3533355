#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "conemetric/tridiag.hpp"

using namespace conemetric;

namespace {

struct Case {
  SymTridiag A;
  std::vector<double> m;
  Eigen::MatrixXd dense;
};

Case random_case(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.5, 2.0);
  Case c;
  c.A.d.resize(n);
  c.A.e.resize(n - 1);
  c.m.resize(n);
  c.dense = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    c.A.d[i] = 3.0 * u(rng);
    c.m[i] = pos(rng);
    c.dense(i, i) = c.A.d[i];
  }
  for (int i = 0; i + 1 < n; ++i) {
    c.A.e[i] = u(rng);
    c.dense(i, i + 1) = c.dense(i + 1, i) = c.A.e[i];
  }
  return c;
}

Eigen::VectorXd dense_eigs(const Case& c) {
  Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(c.m.data(), c.m.size()).cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd S = s.asDiagonal() * c.dense * s.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues();
}

}  // namespace

TEST_CASE("eigenvalues match a dense generalized solve") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    auto c = random_case(rng, 5 + t);
    auto ref = dense_eigs(c);
    for (int k = 0; k < c.A.size(); ++k)
      CHECK(tridiag_eigenvalue(c.A, c.m, k) == doctest::Approx(ref(k)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("sturm count brackets the spectrum") {
  std::mt19937_64 rng(22);
  auto c = random_case(rng, 30);
  auto ref = dense_eigs(c);
  for (int k = 0; k + 1 < c.A.size(); ++k) {
    double mid = 0.5 * (ref(k) + ref(k + 1));
    CHECK(sturm_count(c.A, c.m, mid) == k + 1);
  }
  CHECK(sturm_count(c.A, c.m, ref(0) - 1.0) == 0);
}

TEST_CASE("eigenvectors are mass normalized and satisfy the equation") {
  std::mt19937_64 rng(23);
  auto c = random_case(rng, 40);
  Eigen::VectorXd M = Eigen::Map<const Eigen::VectorXd>(c.m.data(), c.m.size());
  for (int k : {0, 7, 39}) {
    double lam = tridiag_eigenvalue(c.A, c.m, k);
    auto x = tridiag_eigenvector(c.A, c.m, lam);
    CHECK(x.dot(M.asDiagonal() * x) == doctest::Approx(1.0));
    CHECK((c.dense * x - lam * (M.asDiagonal() * x)).norm() < 1e-9);
  }
}

TEST_CASE("tridiagonal solve matches a dense solve") {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    auto c = random_case(rng, 10 + 3 * t);
    Eigen::VectorXd M = Eigen::Map<const Eigen::VectorXd>(c.m.data(), c.m.size());
    Eigen::VectorXd b(c.A.size());
    for (int i = 0; i < b.size(); ++i) b(i) = g(rng);
    const double sigma = 0.37;
    Eigen::MatrixXd S = c.dense;
    S.diagonal() -= sigma * M;
    Eigen::VectorXd ref = S.fullPivLu().solve(b);
    auto x = tridiag_solve(c.A, c.m, sigma, b);
    CHECK((x - ref).norm() <= 1e-10 * (1.0 + ref.norm()));
  }
}
