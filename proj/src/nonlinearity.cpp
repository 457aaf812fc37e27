#include "rpl/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rpl/errors.hpp"

namespace rpl {

namespace {

// Taylor coefficients of sum_k a_k s^k around s0, truncated at order n
std::vector<double> shift_poly(const std::vector<double>& a, double s0, int n) {
  std::vector<double> out(n + 1, 0.0);
  for (int k = 0; k < static_cast<int>(a.size()); ++k) {
    if (a[k] == 0.0) continue;
    // d^j/ds^j s^k / j! = C(k,j) s^(k-j)
    double binom = 1.0;
    for (int j = 0; j <= std::min(k, n); ++j) {
      out[j] += a[k] * binom * std::pow(s0, k - j);
      binom = binom * (k - j) / (j + 1);
    }
  }
  return out;
}

const double kGaussX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                           0.7966664774136267,  0.9602898564975363};
const double kGaussW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                           0.2223810344533745, 0.1012285362903763};

const double kGauss4X[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
const double kGauss4W[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

}  // namespace

Nonlinearity Nonlinearity::polynomial(std::vector<double> c) {
  Nonlinearity nl;
  nl.kind = Kind::Polynomial;
  nl.numerator = std::move(c);
  nl.validate();
  return nl;
}

Nonlinearity Nonlinearity::rational(std::vector<double> c, std::vector<double> d) {
  Nonlinearity nl;
  nl.kind = Kind::Rational;
  nl.numerator = std::move(c);
  nl.denominator = std::move(d);
  nl.validate();
  return nl;
}

Nonlinearity Nonlinearity::saturated_quintic(double sigma) {
  return rational({0.0, -1.0}, {1.0, 2.0 * sigma, sigma * sigma});
}

void Nonlinearity::validate() const {
  if (numerator.empty()) throw Error(ErrorKind::InvalidInput, "nonlinearity numerator is empty");
  for (double c : numerator)
    if (!std::isfinite(c)) throw Error(ErrorKind::InvalidInput, "non-finite numerator coefficient");
  if (kind == Kind::Polynomial && denominator.size() > 1)
    throw Error(ErrorKind::InvalidInput, "polynomial nonlinearity given a denominator");
  if (!denominator.empty()) {
    if (denominator[0] != 1.0)
      throw Error(ErrorKind::InvalidInput, "denominator must start with d0 = 1");
    for (double d : denominator)
      if (!std::isfinite(d)) throw Error(ErrorKind::InvalidInput, "non-finite denominator coefficient");
  }
}

std::vector<double> Nonlinearity::taylor(double s, int order) const {
  if (s < 0) throw Error(ErrorKind::InvalidInput, "g evaluated at negative s");
  std::vector<double> num(numerator.size() + 1, 0.0);
  for (size_t p = 0; p < numerator.size(); ++p) num[p + 1] = numerator[p];
  auto P = shift_poly(num, s, order);
  if (denominator.size() <= 1) return P;
  auto Q = shift_poly(denominator, s, order);
  if (std::abs(Q[0]) < 1e-300) throw Error(ErrorKind::Pole, "denominator vanishes at s = " + std::to_string(s));
  std::vector<double> T(order + 1, 0.0);
  for (int k = 0; k <= order; ++k) {
    double acc = P[k];
    for (int j = 1; j <= k; ++j) acc -= Q[j] * T[k - j];
    T[k] = acc / Q[0];
  }
  return T;
}

std::vector<double> Nonlinearity::evaluate(double s, int max_order) const {
  if (max_order > 4 || max_order < 0)
    throw Error(ErrorKind::UnsupportedOrder, "derivative order " + std::to_string(max_order) + " (max 4)");
  auto T = taylor(s, max_order);
  double fact = 1.0;
  for (int k = 1; k <= max_order; ++k) {
    fact *= k;
    T[k] *= fact;
  }
  return T;
}

double Nonlinearity::value(double s) const {
  if (s < 0) throw Error(ErrorKind::InvalidInput, "g evaluated at negative s");
  double p = 0.0;
  for (size_t k = numerator.size(); k-- > 0;) p = p * s + numerator[k];
  p *= s;
  if (denominator.size() <= 1) return p;
  double q = 0.0;
  for (size_t k = denominator.size(); k-- > 0;) q = q * s + denominator[k];
  if (std::abs(q) < 1e-300) throw Error(ErrorKind::Pole, "denominator vanishes at s = " + std::to_string(s));
  return p / q;
}

double Nonlinearity::derivative(double s) const {
  if (s < 0) throw Error(ErrorKind::InvalidInput, "g evaluated at negative s");
  // g = s P / Q
  double p = 0.0, dp = 0.0;
  for (size_t k = numerator.size(); k-- > 0;) {
    dp = dp * s + p;
    p = p * s + numerator[k];
  }
  double n = s * p, dn = p + s * dp;
  if (denominator.size() <= 1) return dn;
  double q = 0.0, dq = 0.0;
  for (size_t k = denominator.size(); k-- > 0;) {
    dq = dq * s + q;
    q = q * s + denominator[k];
  }
  if (std::abs(q) < 1e-300) throw Error(ErrorKind::Pole, "denominator vanishes at s = " + std::to_string(s));
  return (dn * q - n * dq) / (q * q);
}

void Nonlinearity::secant_pair(double s0, double s1, double& mean, double& dmean) const {
  // 4 nodes are exact for polynomial g up to degree 7
  const bool short_rule = denominator.size() <= 1 && numerator.size() <= 6;
  const double* X = short_rule ? kGauss4X : kGaussX;
  const double* W = short_rule ? kGauss4W : kGaussW;
  const int nq = short_rule ? 4 : 8;
  mean = 0.0;
  dmean = 0.0;
  for (int q = 0; q < nq; ++q) {
    double tau = 0.5 * (X[q] + 1.0), s = s0 + tau * (s1 - s0);
    mean += 0.5 * W[q] * value(s);
    dmean += 0.5 * W[q] * tau * derivative(s);
  }
}

double Nonlinearity::secant(double s0, double s1) const {
  double acc = 0.0;
  for (int q = 0; q < 8; ++q) acc += 0.5 * kGaussW[q] * value(s0 + 0.5 * (s1 - s0) * (kGaussX[q] + 1.0));
  return acc;
}

double Nonlinearity::primitive(double s) const {
  if (s <= 0) return 0.0;
  if (denominator.size() <= 1) {
    double acc = 0.0;
    for (size_t k = numerator.size(); k-- > 0;) acc = acc * s + numerator[k] / (k + 2);
    return acc * s * s;
  }
  // split [0,s] into a few panels; g is smooth on [0, inf)
  const int panels = 4;
  double acc = 0.0, a = 0.0, w = s / panels;
  for (int p = 0; p < panels; ++p, a += w)
    for (int q = 0; q < 8; ++q) acc += 0.5 * w * kGaussW[q] * value(a + 0.5 * w * (kGaussX[q] + 1.0));
  return acc;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (size_t p = 0; p < numerator.size(); ++p) {
    if (numerator[p] == 0.0) continue;
    os << (numerator[p] < 0 ? " - " : " + ") << std::abs(numerator[p]) << " s^" << p + 1;
  }
  os << " )";
  if (denominator.size() > 1) {
    os << " / (1";
    for (size_t q = 1; q < denominator.size(); ++q)
      if (denominator[q] != 0.0) os << (denominator[q] < 0 ? " - " : " + ") << std::abs(denominator[q]) << " s^" << q;
    os << ")";
  }
  return os.str();
}

std::vector<double> default_growth_samples() {
  std::vector<double> s;
  for (int e = -60; e <= 60; ++e) s.push_back(std::pow(10.0, e / 10.0));
  return s;
}

GrowthReport growth_report(const Nonlinearity& nl, const std::vector<double>& samples) {
  if (samples.empty()) throw Error(ErrorKind::InvalidInput, "empty sample set");
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  if (s.front() <= 0) throw Error(ErrorKind::InvalidInput, "growth samples must be positive");
  GrowthReport rep;
  rep.sup_ratio.assign(5, 0.0);
  rep.flagged.assign(5, false);
  for (int n = 0; n <= 4; ++n) {
    std::vector<double> ratio(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
      double gn = nl.evaluate(s[i], 4)[n];
      ratio[i] = std::abs(gn) / std::pow(s[i], 2.0 - n);
      rep.sup_ratio[n] = std::max(rep.sup_ratio[n], ratio[i]);
    }
    if (s.size() < 4) continue;
    std::vector<double> sorted = ratio;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    double scale = std::max(median, 1e-300);
    auto grows = [&](size_t a, size_t b, size_t c) {
      return ratio[a] > ratio[b] && ratio[b] > ratio[c] && ratio[a] > 10.0 * scale;
    };
    size_t m = s.size();
    if (grows(0, 1, 2) || grows(m - 1, m - 2, m - 3)) {
      rep.flagged[n] = true;
      rep.pass = false;
    }
  }
  return rep;
}

}  // namespace rpl
