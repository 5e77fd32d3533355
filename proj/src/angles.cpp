#include "conemetric/angles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace conemetric {

namespace {
constexpr double kTol = 1e-9;
}

void AngleVector::validate() const {
  if (genus < 0) throw InvalidInput("genus must be nonnegative");
  if (beta.empty()) throw InvalidInput("beta must be nonempty");
  for (double b : beta)
    if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("every beta_j must be a positive finite number");
}

double conic_euler_char(const AngleVector& av) {
  av.validate();
  double chi = 2.0 - 2.0 * av.genus;
  for (double b : av.beta) chi += b - 1.0;
  return chi;
}

bool troyanov_check(const AngleVector& av) {
  double chi = conic_euler_char(av);
  if (chi <= 0.0) throw InvalidInput("troyanov_check requires chi > 0");
  if (av.genus > 0) return true;
  const auto& b = av.beta;
  const int k = av.size();
  if (k == 1) return std::abs(b[0] - 1.0) <= kTol;
  if (k == 2) return std::abs(b[0] - b[1]) <= kTol;
  double total = 0.0;
  for (double x : b) total += x - 1.0;
  for (int j = 0; j < k; ++j) {
    double own = b[j] - 1.0;
    if (!(own > total - own)) return false;
  }
  return true;
}

double mp_distance(const AngleVector& av) {
  av.validate();
  if (av.genus != 0) throw InvalidInput("mp_distance is defined for genus 0");
  double dist = 0.0, flip = 1e300;
  long long parity = 0;
  for (double b : av.beta) {
    double x = b - 1.0;
    double n = std::round(x);
    double r = std::abs(x - n);
    dist += r;
    parity += static_cast<long long>(n);
    flip = std::min(flip, 1.0 - 2.0 * r);
  }
  if (parity % 2 == 0) dist += flip;
  return dist;
}

Membership mp_membership(const AngleVector& av, double tol) {
  double d = mp_distance(av) - 1.0;
  if (d > tol) return Membership::interior;
  if (d >= -tol) return Membership::boundary;
  return Membership::outside;
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::interior: return "interior";
    case Membership::boundary: return "boundary";
    default: return "outside";
  }
}

bool subcritical_check(const AngleVector& av) {
  double chi = conic_euler_char(av);
  double bmin = *std::min_element(av.beta.begin(), av.beta.end());
  return chi < std::min(2.0, 2.0 * bmin);
}

const char* to_string(Tri t) {
  switch (t) {
    case Tri::yes: return "true";
    case Tri::no: return "false";
    default: return "indeterminate";
  }
}

std::optional<Rational> to_rational(double x, long long max_den, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double y = x;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(y);
    long long ai = static_cast<long long>(a);
    long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol) return Rational{h1, k1};
    double frac = y - a;
    if (frac < 1e-15) break;
    y = 1.0 / frac;
  }
  return std::nullopt;
}

namespace {

// Third coaxial condition for one sign choice; nullopt when some beta is not rational.
std::optional<bool> gcd_condition(const std::vector<double>& beta, const std::vector<int>& nonint, long long ones,
                                  double max_int_beta, CoaxialResult& out) {
  std::vector<Rational> r;
  for (int i : nonint) {
    auto q = to_rational(beta[i]);
    if (!q) return std::nullopt;
    r.push_back(*q);
  }
  if (ones > 0) r.push_back(Rational{1, 1});
  long long L = 1;
  for (auto& q : r) L = std::lcm(L, q.den);
  long long G = 0;
  std::vector<long long> scaled;
  for (auto& q : r) {
    long long s = q.num * (L / q.den);
    scaled.push_back(s);
    G = std::gcd(G, s);
  }
  out.b.clear();
  long long sum = 0;
  for (size_t i = 0; i < scaled.size(); ++i) {
    long long bi = scaled[i] / G;
    if (ones > 0 && i + 1 == scaled.size()) {
      for (long long t = 0; t < ones; ++t) out.b.push_back(bi);
      sum += bi * ones;
    } else {
      out.b.push_back(bi);
      sum += bi;
    }
  }
  // eta = G / L
  long long g = std::gcd(G, L);
  out.eta_num = G / g;
  out.eta_den = L / g;
  out.rational = true;
  return 2.0 * max_int_beta <= static_cast<double>(sum) + kTol;
}

}  // namespace

CoaxialResult coaxial_check(const AngleVector& av) {
  av.validate();
  if (av.genus != 0) throw InvalidInput("coaxial_check is defined for genus 0");
  CoaxialResult res;
  const auto& beta = av.beta;
  const int n = av.size();
  std::vector<int> nonint, ints;
  for (int i = 0; i < n; ++i) (is_integer(beta[i]) ? ints : nonint).push_back(i);

  if (nonint.empty()) {
    res.integer_case = true;
    double maxx = -1e300, sum = 0.0;
    for (double b : beta) {
      maxx = std::max(maxx, b - 1.0);
      sum += b - 1.0;
    }
    bool ok = std::abs(mp_distance(av) - 1.0) <= kTol && 2.0 * maxx <= sum + kTol;
    res.verdict = ok ? Tri::yes : Tri::no;
    res.note = "integer angles";
    return res;
  }

  const int m = static_cast<int>(nonint.size());
  double int_sum = 0.0, max_int = 0.0;
  for (int i : ints) {
    int_sum += std::round(beta[i]);
    max_int = std::max(max_int, std::round(beta[i]));
  }

  bool saw_indeterminate = false;
  CoaxialResult pending;
  for (long long mask = 0; mask < (1LL << m); ++mask) {
    std::vector<int> eps(n, 0);
    double kp = 0.0;
    for (int t = 0; t < m; ++t) {
      int e = ((mask >> (m - 1 - t)) & 1) ? -1 : 1;
      eps[nonint[t]] = e;
      kp += e * beta[nonint[t]];
    }
    if (kp < -kTol || !is_integer(kp)) continue;
    kp = std::round(kp);
    double kpp = int_sum - n - kp + 2.0;
    if (kpp < -kTol) continue;
    long long kppi = std::llround(kpp);
    if (kppi % 2 != 0) continue;

    CoaxialResult cand;
    cand.eps = eps;
    cand.kprime = kp;
    cand.kdoubleprime = static_cast<double>(kppi);
    auto third = gcd_condition(beta, nonint, static_cast<long long>(kp) + kppi, max_int, cand);
    if (!third) {
      if (!saw_indeterminate) {
        pending = cand;
        pending.verdict = Tri::indeterminate;
        pending.note = "non-rational angle: gcd normalization undefined";
        saw_indeterminate = true;
      }
      continue;
    }
    if (*third) {
      cand.verdict = Tri::yes;
      cand.note = "mixed angles";
      return cand;
    }
  }
  if (saw_indeterminate) return pending;
  res.verdict = Tri::no;
  res.note = "no sign vector satisfies the coaxial conditions";
  return res;
}

AdmissibilityError::AdmissibilityError(std::vector<std::string> v)
    : InvalidInput([&] {
        std::string s = "inadmissible splitting:";
        for (auto& x : v) s += " [" + x + "]";
        return s;
      }()),
      violations_(std::move(v)) {}

int point_count(const AngleVector& av) {
  av.validate();
  int K = 0;
  for (double b : av.beta) K += std::max(int_part(b), 1);
  return K;
}

SplitSpec splitting_spec(const AngleVector& av, const std::vector<double>& B) {
  av.validate();
  SplitSpec spec;
  const int k = av.size();
  spec.K = point_count(av);
  if (static_cast<int>(B.size()) != spec.K) {
    std::ostringstream os;
    os << "expected " << spec.K << " target angles, got " << B.size();
    throw InvalidInput(os.str());
  }
  spec.order.resize(k);
  std::iota(spec.order.begin(), spec.order.end(), 0);
  std::stable_sort(spec.order.begin(), spec.order.end(),
                   [&](int a, int b) { return av.beta[a] > av.beta[b]; });
  for (double b : av.beta)
    if (b > 1.0 + kTol) ++spec.k0;

  std::vector<SplitCluster> by_original(k);
  std::vector<std::string> violations;
  int offset = 0;
  for (int j = 0; j < k; ++j) {
    SplitCluster c;
    c.original_index = j;
    c.beta = av.beta[j];
    c.size = std::max(int_part(c.beta), 1);
    c.B.assign(B.begin() + offset, B.begin() + offset + c.size);
    offset += c.size;

    for (size_t i = 0; i < c.B.size(); ++i)
      if (!(c.B[i] > 0.0)) {
        std::ostringstream os;
        os << "cluster " << j << ": B_" << i + 1 << " must be positive";
        violations.push_back(os.str());
      }
    double s = 0.0;
    for (double x : c.B) s += x - 1.0;
    if (std::abs(s - (c.beta - 1.0)) > kTol) {
      std::ostringstream os;
      os << "cluster " << j << ": sum of (B_i-1) is " << s << ", expected " << c.beta - 1.0;
      violations.push_back(os.str());
    }
    if (c.size >= 2) {
      for (size_t i = 0; i < c.B.size(); ++i)
        if (std::abs(c.B[i] - 1.0) <= kTol) {
          std::ostringstream os;
          os << "cluster " << j << ": B_" << i + 1 << " = 1 inside a split cluster";
          violations.push_back(os.str());
        }
      const int N = c.size;
      for (long long mask = 1; mask < (1LL << N); ++mask) {
        if (__builtin_popcountll(mask) < 2) continue;
        double t = 0.0;
        for (int i = 0; i < N; ++i)
          if (mask >> i & 1) t += c.B[i] - 1.0;
        if (std::abs(t) <= kTol) {
          std::ostringstream os;
          os << "cluster " << j << ": subcluster {";
          bool first = true;
          for (int i = 0; i < N; ++i)
            if (mask >> i & 1) {
              os << (first ? "" : ",") << i + 1;
              first = false;
            }
          os << "} merges to angle 2*pi";
          violations.push_back(os.str());
        }
      }
    }
    const double J = static_cast<double>(std::max(int_part(c.beta), 1));
    for (double x : c.B)
      c.weights.push_back(std::abs(c.beta - 1.0) > kTol ? J * (x - 1.0) / (c.beta - 1.0) : 1.0);
    by_original[j] = std::move(c);
  }
  if (!violations.empty()) throw AdmissibilityError(violations);
  for (int s = 0; s < k; ++s) spec.clusters.push_back(by_original[spec.order[s]]);
  return spec;
}

}  // namespace conemetric
