#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conemetric/common.hpp"

namespace conemetric {

struct AngleVector {
  int genus = 0;
  std::vector<double> beta;  // cone angle 2*pi*beta_j

  void validate() const;
  int size() const { return static_cast<int>(beta.size()); }
};

double conic_euler_char(const AngleVector& av);

// Throws InvalidInput when chi <= 0.
bool troyanov_check(const AngleVector& av);

double mp_distance(const AngleVector& av);

enum class Membership { interior, boundary, outside };
Membership mp_membership(const AngleVector& av, double tol = 1e-9);
const char* to_string(Membership m);

bool subcritical_check(const AngleVector& av);

enum class Tri { yes, no, indeterminate };
const char* to_string(Tri t);

struct CoaxialResult {
  Tri verdict = Tri::no;
  bool integer_case = false;
  // Mixed case witness. eps is indexed like beta; 0 marks integer entries.
  std::vector<int> eps;
  double kprime = 0.0;
  double kdoubleprime = 0.0;
  // Third condition data when the rational normalization exists.
  bool rational = false;
  long long eta_num = 0, eta_den = 1;
  std::vector<long long> b;
  std::string note;
};

CoaxialResult coaxial_check(const AngleVector& av);

struct Rational {
  long long num = 0, den = 1;
};
// Continued-fraction recovery with denominator bound and tolerance.
std::optional<Rational> to_rational(double x, long long max_den = 1000, double tol = 1e-9);

struct SplitCluster {
  int original_index = 0;  // index into AngleVector::beta
  double beta = 0.0;
  int size = 1;            // N_j = max([beta_j], 1)
  std::vector<double> B;
  std::vector<double> weights;
};

struct SplitSpec {
  int k0 = 0;                          // number of beta_j > 1
  int K = 0;                           // total number of points after splitting
  std::vector<SplitCluster> clusters;  // descending beta order
  std::vector<int> order;              // order[s] = original index of sorted slot s
};

// Thrown by splitting_spec; each violation is a human-readable line.
class AdmissibilityError : public InvalidInput {
public:
  explicit AdmissibilityError(std::vector<std::string> v);
  const std::vector<std::string>& violations() const { return violations_; }

private:
  std::vector<std::string> violations_;
};

// B is listed cluster by cluster in the original index order of av.beta.
SplitSpec splitting_spec(const AngleVector& av, const std::vector<double>& B);

int point_count(const AngleVector& av);

}  // namespace conemetric
