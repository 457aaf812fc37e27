#pragma once
#include <string>
#include <vector>

#include "rpl/status.hpp"

namespace rpl {

// m = (m_+, m_-) stored as [m_+1..m_+N, m_-1..m_-N]
struct MultiIndex {
  std::vector<int> e;

  MultiIndex() = default;
  explicit MultiIndex(int N) : e(2 * N, 0) {}
  MultiIndex(std::vector<int> plus, const std::vector<int>& minus);
  static MultiIndex unit(int N, int j, bool plus);  // e^{j+} or e^{j-}, j zero-based

  int N() const { return static_cast<int>(e.size() / 2); }
  int plus(int j) const { return e[j]; }
  int minus(int j) const { return e[N() + j]; }
  int norm() const;
  bool is_zero() const { return norm() == 0; }
  MultiIndex conj() const;
  MultiIndex operator+(const MultiIndex& o) const;
  bool operator==(const MultiIndex& o) const { return e == o.e; }
  bool operator!=(const MultiIndex& o) const { return e != o.e; }
  // graded order: by norm, then lexicographic
  bool operator<(const MultiIndex& o) const;
  std::string str() const;
};

double lam(const std::vector<double>& lambdas, const MultiIndex& m);

enum class Order { Strict, WeakOnly, Equal, Incomparable };
// relation of mp to m: Strict (mp < m), WeakOnly (mp <= m, same norm, different), Equal, Incomparable
Order partial_order(const MultiIndex& mp, const MultiIndex& m);
bool precedes(const MultiIndex& mp, const MultiIndex& m);  // mp strictly below m

// all m with norm <= deg, graded order
std::vector<MultiIndex> enumerate_indices(int N, int deg);

struct ResonanceGroup {
  double r = 0.0;
  std::vector<MultiIndex> members;
};

struct ResonanceStructure {
  int N = 0;
  double omega = 0.0;
  std::vector<double> lambdas;
  double tau = 0.0;
  int degree_bound = 0;
  int K_max = 0;
  std::vector<MultiIndex> R_min;
  std::vector<ResonanceGroup> groups;  // r_k > 0 ascending
  std::vector<MultiIndex> NR;          // norm <= K_max
  std::vector<MultiIndex> Lambda0;
  std::vector<std::vector<MultiIndex>> Lambda;  // per j
  std::vector<MultiIndex> ambiguous;
  double margin_edge = 0.0;    // min ||lambda(m)| - omega| over enumerated non-I indices
  double margin_modes = 0.0;   // min |lambda(m_+,0) - lambda_j| over pure-plus, norm >= 2
  HypothesisStatus H6;

  bool in_I(const MultiIndex& m) const;
  bool in_R_min(const MultiIndex& m) const;
  bool in_NR(const MultiIndex& m) const { return !in_I(m) && !in_R_min(m); }
  bool in_Lambda0(const MultiIndex& m) const;
  // j with m in Lambda_j (zero-based), empty if none
  std::vector<int> lambda_sets(const MultiIndex& m) const;
  std::vector<MultiIndex> NR_upto(int deg) const;
  std::string to_json() const;
};

// tau is absolute; enumerate_limit extends NR/H6 scans beyond the degree bound if larger
ResonanceStructure classify(const std::vector<double>& lambdas, double omega, double tau);

}  // namespace rpl
