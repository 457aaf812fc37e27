#pragma once
#include <map>
#include <memory>
#include <vector>

#include "rpl/banded.hpp"
#include "rpl/resonance.hpp"

namespace rpl {

// All multi-indices of norm <= K with a product table.
class JetSpace {
 public:
  JetSpace(int N, int K);
  int N() const { return N_; }
  int K() const { return K_; }
  int size() const { return static_cast<int>(idx_.size()); }
  const MultiIndex& index(int i) const { return idx_[i]; }
  const std::vector<MultiIndex>& indices() const { return idx_; }
  int find(const MultiIndex& m) const;  // -1 if norm > K
  int conj(int i) const { return conj_[i]; }
  struct Product {
    int a, b, c;
  };
  const std::vector<Product>& products() const { return prod_; }

 private:
  int N_, K_;
  std::vector<MultiIndex> idx_;
  std::map<std::vector<int>, int> pos_;
  std::vector<int> conj_;
  std::vector<Product> prod_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

// Truncated series sum_m z^m c_m with real coefficients; conj(z^m) = z^{conj m}.
struct ScalarJet {
  JetSpacePtr space;
  std::vector<double> c;

  static ScalarJet zero(JetSpacePtr s);
  double& operator[](const MultiIndex& m);
  double at(const MultiIndex& m) const;
  ScalarJet conj() const;
  cplx eval(const std::vector<cplx>& z) const;
};

struct FieldJet {
  JetSpacePtr space;
  std::vector<Vec> c;

  static FieldJet zero(JetSpacePtr s, int n);
  int samples() const { return c.empty() ? 0 : static_cast<int>(c[0].size()); }
  Vec& operator[](const MultiIndex& m);
  const Vec& at(const MultiIndex& m) const;

  FieldJet& operator+=(const FieldJet& o);
  FieldJet& operator-=(const FieldJet& o);
  FieldJet operator*(const FieldJet& o) const;
  FieldJet conj() const;
  // derivative in z_j (plus) or conj z_j (minus), j zero-based
  FieldJet dz(int j, bool plus) const;
  CVec eval(const std::vector<cplx>& z) const;
};

FieldJet operator*(const ScalarJet& s, const FieldJet& f);
// pointwise multiplication by a fixed field
FieldJet operator*(const Vec& v, const FieldJet& f);
// sum_k t_k (f - f_0)^k with per-sample Taylor coefficients t_k, k = 0..t.size()-1
FieldJet compose(const std::vector<Vec>& t, const FieldJet& f);

// z^m for complex z
cplx monomial(const MultiIndex& m, const std::vector<cplx>& z);

}  // namespace rpl
