#pragma once
#include <string>
#include <vector>

namespace rpl {

// g(s) = (c1 s + c2 s^2 + ...) / (1 + d1 s + d2 s^2 + ...)
struct Nonlinearity {
  enum class Kind { Polynomial, Rational };
  Kind kind = Kind::Polynomial;
  std::vector<double> numerator;    // c_1, c_2, ... (power p = index + 1)
  std::vector<double> denominator;  // 1, d_1, ... (empty means 1)

  static Nonlinearity polynomial(std::vector<double> c);
  static Nonlinearity rational(std::vector<double> c, std::vector<double> d);
  // -s^2 / (1 + sigma s)^2
  static Nonlinearity saturated_quintic(double sigma);

  void validate() const;

  // [g(s), g'(s), ..., g^(max_order)(s)], max_order <= 4
  std::vector<double> evaluate(double s, int max_order) const;
  // Taylor coefficients g^(k)(s)/k!, k = 0..order (any order)
  std::vector<double> taylor(double s, int order) const;
  double value(double s) const;
  // int_0^s g
  double primitive(double s) const;
  // mean of g over [s0, s1]
  double secant(double s0, double s1) const;
  double derivative(double s) const;
  // secant mean and its derivative in s1
  void secant_pair(double s0, double s1, double& mean, double& dmean) const;

  std::string describe() const;
};

struct GrowthReport {
  std::vector<double> sup_ratio;  // per n = 0..4: sup |g^(n)(s)| / s^(2-n)
  std::vector<bool> flagged;      // ratio appears unbounded at a sample extreme
  bool pass = true;
};

GrowthReport growth_report(const Nonlinearity& nl, const std::vector<double>& samples);
std::vector<double> default_growth_samples();

}  // namespace rpl
