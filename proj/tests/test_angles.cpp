#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "conemetric/angles.hpp"

using namespace conemetric;

namespace {

// Brute-force l1 distance from x to integer vectors with odd sum, box of radius 2 around round(x).
double brute_mp(const std::vector<double>& beta) {
  const int k = static_cast<int>(beta.size());
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = static_cast<int>(std::lround(beta[i] - 1.0));
  double best = 1e300;
  std::vector<int> off(k, -2);
  while (true) {
    int sum = 0;
    double d = 0.0;
    for (int i = 0; i < k; ++i) {
      sum += c[i] + off[i];
      d += std::abs(beta[i] - 1.0 - (c[i] + off[i]));
    }
    if (((sum % 2) + 2) % 2 == 1) best = std::min(best, d);
    int i = 0;
    while (i < k && off[i] == 2) off[i++] = -2;
    if (i == k) break;
    ++off[i];
  }
  return best;
}

}  // namespace

TEST_CASE("euler characteristic examples") {
  CHECK(conic_euler_char({0, {1, 1}}) == doctest::Approx(2.0));
  CHECK(conic_euler_char({0, {0.5, 0.5}}) == doctest::Approx(1.0));
  CHECK(conic_euler_char({1, {1.5}}) == doctest::Approx(0.5));
}

TEST_CASE("euler characteristic is affine with slope one") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  for (int t = 0; t < 50; ++t) {
    AngleVector a{0, {u(rng), u(rng), u(rng)}};
    AngleVector b = a;
    b.beta[1] += 0.37;
    CHECK(conic_euler_char(b) - conic_euler_char(a) == doctest::Approx(0.37));
  }
}

TEST_CASE("invalid angle vectors are rejected") {
  CHECK_THROWS_AS(AngleVector({0, {}}).validate(), InvalidInput);
  CHECK_THROWS_AS(AngleVector({0, {0.5, -1.0}}).validate(), InvalidInput);
  CHECK_THROWS_AS(AngleVector({-1, {0.5}}).validate(), InvalidInput);
}

TEST_CASE("troyanov examples") {
  CHECK(troyanov_check({0, {0.5, 0.5, 0.5}}));
  CHECK(troyanov_check({0, {0.5, 0.5}}));
  CHECK_FALSE(troyanov_check({0, {0.25, 0.5, 0.75}}));
  CHECK_FALSE(troyanov_check({0, {0.5, 0.7}}));
  CHECK(troyanov_check({1, {1.5}}));
  CHECK_THROWS_AS(troyanov_check({0, {0.2, 0.2, 0.2}}), InvalidInput);
}

TEST_CASE("mp distance examples") {
  CHECK(mp_distance({0, {1, 1, 1}}) == doctest::Approx(1.0));
  CHECK(mp_membership({0, {1, 1, 1}}) == Membership::boundary);
  CHECK(mp_distance({0, {0.5, 0.5}}) == doctest::Approx(1.0));
  CHECK(mp_membership({0, {0.5, 0.5}}) == Membership::boundary);
  // The nearest odd-sum vector to (0.2, 0.2, 0.2) is a unit vector: 0.8 + 0.2 + 0.2.
  CHECK(mp_distance({0, {1.2, 1.2, 1.2}}) == doctest::Approx(1.2));
  CHECK(mp_membership({0, {1.2, 1.2, 1.2}}) == Membership::interior);
}

TEST_CASE("mp distance agrees with lattice search") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  std::uniform_int_distribution<int> kk(1, 6);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> b(kk(rng));
    for (auto& x : b) x = u(rng);
    CHECK(mp_distance({0, b}) == doctest::Approx(brute_mp(b)).epsilon(1e-12));
  }
}

TEST_CASE("troyanov region lies inside the MP region") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_int_distribution<int> kk(3, 6);
  int tested = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> b(kk(rng));
    for (auto& x : b) x = u(rng);
    AngleVector av{0, b};
    if (conic_euler_char(av) <= 0.0) continue;
    if (!troyanov_check(av)) continue;
    ++tested;
    CHECK(mp_distance(av) >= 1.0 - 1e-12);
  }
  CHECK(tested > 100);
}

TEST_CASE("subcritical examples") {
  CHECK(subcritical_check({0, {0.5, 0.5, 0.5}}));
  CHECK_FALSE(subcritical_check({0, {3, 3}}));
  CHECK(subcritical_check({1, {0.25}}));
}

TEST_CASE("coaxial examples") {
  auto a = coaxial_check({0, {2, 2, 2, 2}});
  CHECK(a.verdict == Tri::yes);
  CHECK(a.integer_case);
  auto b = coaxial_check({0, {0.5, 0.5}});
  CHECK(b.verdict == Tri::yes);
  CHECK(b.kprime == doctest::Approx(0.0));
  CHECK(b.kdoubleprime == doctest::Approx(0.0));
  CHECK(b.eps[0] * b.eps[1] == -1);
  CHECK(coaxial_check({0, {1.0 / 3.0, 0.5, 5}}).verdict == Tri::no);
}

TEST_CASE("coaxial witness satisfies the sign and evenness conditions") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> num(1, 9), den(1, 4), kk(2, 5);
  int found = 0;
  for (int t = 0; t < 300; ++t) {
    std::vector<double> b(kk(rng));
    for (auto& x : b) x = double(num(rng)) / den(rng);
    auto c = coaxial_check({0, b});
    if (c.verdict != Tri::yes || c.integer_case) continue;
    ++found;
    // n counts all cone points.
    double kp = 0.0, ints = 0.0;
    const int n = static_cast<int>(b.size());
    for (size_t i = 0; i < b.size(); ++i) {
      if (c.eps[i] == 0) {
        ints += b[i];
      } else {
        kp += c.eps[i] * b[i];
      }
    }
    CHECK(kp == doctest::Approx(c.kprime));
    CHECK(c.kprime >= -1e-9);
    double kpp = ints - n - kp + 2.0;
    CHECK(kpp == doctest::Approx(c.kdoubleprime));
    CHECK(c.kdoubleprime >= -1e-9);
    CHECK(std::abs(c.kdoubleprime / 2.0 - std::round(c.kdoubleprime / 2.0)) < 1e-9);
  }
  CHECK(found > 0);
}

TEST_CASE("rational recovery") {
  auto r = to_rational(0.75);
  REQUIRE(r);
  CHECK(r->num == 3);
  CHECK(r->den == 4);
  CHECK_FALSE(to_rational(M_PI, 100));
}

TEST_CASE("splitting spec examples") {
  auto s = splitting_spec({0, {2.5}}, {1.75, 1.75});
  CHECK(s.K == 2);
  CHECK(s.clusters[0].weights[0] == doctest::Approx(1.0));
  CHECK(s.clusters[0].weights[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(splitting_spec({0, {2.5}}, {2.5, 1.0}), AdmissibilityError);
  try {
    splitting_spec({0, {3.5}}, {1.5, 0.5, 2.5});
    FAIL("expected rejection");
  } catch (const AdmissibilityError& e) {
    CHECK_FALSE(e.violations().empty());
  }
  CHECK_THROWS_AS(splitting_spec({0, {2.5}}, {1.5, 1.5}), AdmissibilityError);
}

TEST_CASE("splitting spec point count") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 4.9);
  for (int t = 0; t < 100; ++t) {
    AngleVector av{0, {u(rng), u(rng), u(rng)}};
    std::vector<double> B;
    int K = 0;
    for (double b : av.beta) {
      int n = std::max(int_part(b), 1);
      K += n;
      // Equal split keeps every B_i - 1 of the same sign.
      for (int i = 0; i < n; ++i) B.push_back(1.0 + (b - 1.0) / n);
    }
    auto s = splitting_spec(av, B);
    CHECK(s.K == K);
    CHECK(point_count(av) == K);
    for (auto& c : s.clusters) {
      double sw = 0.0;
      for (double w : c.weights) sw += w;
      if (c.size > 1) CHECK(sw == doctest::Approx(c.size));
    }
  }
}
