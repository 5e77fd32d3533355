#include <doctest.h>

#include <cmath>
#include <random>

#include "conemetric/pairing.hpp"

using namespace conemetric;

namespace {

std::vector<ConeSample> sample(const std::function<double(double, double)>& f) {
  std::vector<ConeSample> s;
  for (int i = 0; i <= 60; ++i) {
    double r = 0.05 + 0.15 * i / 60.0;
    for (int k = 0; k < 32; ++k) {
      double t = 2.0 * M_PI * k / 32.0;
      s.push_back({r, t, f(r, t)});
    }
  }
  return s;
}

DirectionCoeffs one_point(double beta, std::vector<double> e1, std::vector<double> e2) {
  DirectionCoeffs d;
  d.beta = {beta};
  d.e1 = {e1};
  d.e2 = {e2};
  return d;
}

}  // namespace

TEST_CASE("extraction recovers manufactured coefficients") {
  const double b = 2.5;
  auto pc = extract_eigf_coeffs(
      sample([&](double r, double t) { return std::pow(r, 1 / b) * std::cos(t) + 0.5 * r * r; }), b);
  REQUIRE(pc.a1.size() == 2);
  CHECK(pc.a1[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(pc.a1[1]) < 1e-8);
  CHECK(std::abs(pc.a2[0]) < 1e-8);
  CHECK(pc.reliable);

  const double s = 0.6;
  auto q = extract_eigf_coeffs(sample([&](double r, double t) { return 3.0 + std::pow(r, 1 / s) * std::sin(t); }), s);
  REQUIRE(q.a1.size() == 1);
  CHECK(q.c0 == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(q.a2[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(q.a1[0]) < 1e-8);

  // A term outside the basis makes the two annuli disagree.
  auto bad = extract_eigf_coeffs(sample([](double r, double t) { return std::pow(r, 0.1) * std::cos(3 * t); }), b);
  CHECK_FALSE(bad.reliable);
  CHECK_THROWS_AS(extract_eigf_coeffs(sample([](double, double) { return 0.0; }), b, 0, 0.2, 0.1, 0.3), InvalidInput);
}

TEST_CASE("direction coefficients invert the scaling") {
  const double b = 3.4;
  CoeffVector A;
  for (int j = 1; j <= 3; ++j) A.A.push_back(std::pow(b, j / b) * cplx(0.3 * j, -0.2));
  std::vector<double> e1, e2;
  direction_coeffs(A, b, e1, e2);
  for (int j = 1; j <= 3; ++j) {
    CHECK(e1[j - 1] == doctest::Approx(0.3 * j));
    CHECK(e2[j - 1] == doctest::Approx(-0.2));
  }
  CHECK(point_components(0.6) == 1);
  CHECK(point_components(3.4) == 3);
  auto d = direction_coeffs({A, CoeffVector{{cplx(1.0, 0.0)}}}, {b, 0.6});
  CHECK(d.K() == 4);
  CHECK(d.flat().size() == 8);
  CHECK_THROWS_AS(direction_coeffs({A}, {2.5}), InvalidInput);
}

TEST_CASE("pairing weights and bilinearity") {
  PointCoeffs p;
  p.beta = 2.5;
  p.a1 = {1.0, 0.0};
  p.a2 = {0.0, 0.0};
  EigenCoeffs e{{p}};
  CHECK(pairing_B(e, one_point(2.5, {0.5, 0.0}, {0.0, 0.0})) == doctest::Approx(0.5));
  e.points[0].a1 = {0.0, 1.0};
  CHECK(pairing_B(e, one_point(2.5, {0.0, 0.5}, {0.0, 0.0})) == doctest::Approx(1.0));
  // No weight below angle 2 pi.
  PointCoeffs s;
  s.beta = 0.6;
  s.a1 = {2.0};
  s.a2 = {1.0};
  CHECK(pairing_B(EigenCoeffs{{s}}, one_point(0.6, {0.5}, {3.0})) == doctest::Approx(4.0));

  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    PointCoeffs a;
    a.beta = 3.2;
    a.a1 = {g(rng), g(rng), g(rng)};
    a.a2 = {g(rng), g(rng), g(rng)};
    EigenCoeffs ea{{a}};
    auto d1 = one_point(3.2, {g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng)});
    auto d2 = one_point(3.2, {g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng)});
    auto sum = d1;
    const double alpha = g(rng);
    for (int m = 0; m < 3; ++m) {
      sum.e1[0][m] = alpha * d1.e1[0][m] + d2.e1[0][m];
      sum.e2[0][m] = alpha * d1.e2[0][m] + d2.e2[0][m];
    }
    CHECK(pairing_B(ea, sum) == doctest::Approx(alpha * pairing_B(ea, d1) + pairing_B(ea, d2)));
    CHECK(pairing_matrix({ea}).row(0).dot(d1.flat()) == doctest::Approx(pairing_B(ea, d1)));
  }
  CHECK_THROWS_AS(pairing_B(e, one_point(2.5, {0.5}, {0.0})), InvalidInput);
  CHECK_THROWS_AS(pairing_B(e, DirectionCoeffs{}), InvalidInput);
}

TEST_CASE("boundary pairing integral examples") {
  const std::vector<double> eps{0.2, 0.1, 0.05};
  const double b = 2.5;
  auto pure = boundary_pairing_integral({{1 / b, 1, 1.0, 0.0}}, {{-1 / b, 1, 1.0, 0.0}}, eps, b);
  CHECK(pure.limit == doctest::Approx(2 * M_PI));
  CHECK(pure.closed_form == doctest::Approx(2 * M_PI));
  CHECK(pure.variation < 1e-12);
  auto orth = boundary_pairing_integral({{1 / b, 1, 1.0, 0.0}}, {{-2 / b, 2, 1.0, 0.0}}, eps, b);
  CHECK(std::abs(orth.limit) < 1e-12);
  auto sc = boundary_pairing_integral({{1 / b, 1, 1.0, 0.0}}, {{-1 / b, 1, 0.0, 1.0}}, eps, b);
  CHECK(std::abs(sc.limit) < 1e-12);
  auto consts = boundary_pairing_integral({{0.0, 0, 2.0, 0.0}}, {{0.0, 0, 3.0, 0.0}}, eps, b);
  CHECK(std::abs(consts.limit) < 1e-12);
  // Only the mode m = 2 pairs: 2 pi * 2 * (0.5 * 0.7).
  auto two = boundary_pairing_integral({{2 / b, 2, 0.5, 0.0}, {2.0, 0, 1.0, 0.0}},
                                       {{-2 / b, 2, 0.7, 0.0}, {2 / b, 2, 0.3, 0.0}, {0.0, 0, 1.0, 0.0}}, eps, b);
  CHECK(two.limit == doctest::Approx(2 * M_PI * 2 * 0.35).epsilon(1e-9));
  CHECK(two.closed_form == doctest::Approx(2 * M_PI * 2 * 0.35));
  CHECK_THROWS(boundary_pairing_integral({{1 / b, 1, 1.0, 0.0}}, {{-2 / b, 1, 1.0, 0.0}}, eps, b));
  CHECK_THROWS_AS(boundary_pairing_integral({}, {}, {}, b), InvalidInput);
}

TEST_CASE("solution space rank and kernel") {
  auto z = solution_space(Eigen::MatrixXd::Zero(3, 6));
  CHECK(z.rank == 0);
  CHECK(z.dim == 6);
  std::mt19937_64 rng(42);
  for (int r = 1; r <= 4; ++r) {
    Eigen::MatrixXd P(5, r), Q(r, 8);
    std::normal_distribution<double> g;
    for (int i = 0; i < P.size(); ++i) P.data()[i] = g(rng);
    for (int i = 0; i < Q.size(); ++i) Q.data()[i] = g(rng);
    Eigen::MatrixXd B = P * Q;
    auto s = solution_space(B);
    CHECK(s.rank == r);
    CHECK(s.dim + s.rank == 8);
    CHECK((B * s.kernel).norm() < 1e-10 * B.norm());
    CHECK((s.kernel.transpose() * s.kernel - Eigen::MatrixXd::Identity(s.dim, s.dim)).norm() < 1e-12);
  }
  // Roundoff-sized rows have rank zero.
  CHECK(solution_space(Eigen::MatrixXd::Constant(1, 4, 1e-14)).rank == 0);
}

TEST_CASE("case classification") {
  auto f = classify_case(1, 4, 2, 0, 2);
  CHECK(f.kind == DeformationCase::partial_rigidity);
  CHECK(f.dimension == 7);
  CHECK(f.kernel_dim == 8);
  CHECK(f.degenerate);
  CHECK(classify_case(0, 3, 3, 0).kind == DeformationCase::unobstructed);
  CHECK(classify_case(2, 1, 1, 2).kind == DeformationCase::rigidity);
  CHECK(classify_case(2, 3, 1, 2).kind == DeformationCase::partial_rigidity);
  CHECK_THROWS_AS(classify_case(3, 3, 1, 0), InvalidInput);
  CHECK_THROWS_AS(classify_case(1, 2, 2, 2), InvalidInput);
  CHECK_THROWS_AS(classify_case(5, 2, 2, 0, 2), InvalidInput);
  CHECK(std::string(to_string(DeformationCase::rigidity)).size() > 0);
}

TEST_CASE("vdot vanishing below the critical order") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g;
  for (int J : {1, 2, 3}) {
    CoeffVector A;
    for (int j = 0; j < J; ++j) A.A.emplace_back(0.1 * g(rng), 0.1 * g(rng));
    for (int k = 1; k < J; ++k) CHECK(vdot_vanishing_check(A, J, k, 5e-3) <= 10 * 25e-6);
    CHECK(vdot_vanishing_check(A, J, J, J == 3 ? 1e-3 : 1e-4) < 1e-6);
  }
}

TEST_CASE("eigenvalue flatness") {
  std::vector<double> rho;
  for (int i = 0; i < 8; ++i) rho.push_back(0.2 * std::pow(0.7, i));
  auto two = eigenvalue_flatness_check(2.5, CoeffVector{{cplx(0.3, 0.1), cplx(-0.2, 0.4)}}, rho);
  CHECK(two.J == 2);
  CHECK(two.vanishing);
  CHECK(two.slope_shift >= 2.0 - 1e-6);
  CHECK(std::abs(two.lambda_shift.back()) < std::abs(two.lambda_shift.front()));
  auto one = eigenvalue_flatness_check(1.5, CoeffVector{{cplx(0.3, 0.0)}}, rho);
  CHECK(one.vanishing);
  CHECK_THROWS_AS(eigenvalue_flatness_check(0.8, CoeffVector{{cplx(0.3, 0.0)}}, rho), InvalidInput);
  CHECK_THROWS_AS(eigenvalue_flatness_check(1.5, CoeffVector{{cplx(0.3, 0.0), cplx(0.1, 0.0)}}, rho), InvalidInput);
}
