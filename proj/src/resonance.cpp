#include "rpl/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "rpl/errors.hpp"

namespace rpl {

MultiIndex::MultiIndex(std::vector<int> plus, const std::vector<int>& minus) {
  if (plus.size() != minus.size()) throw Error(ErrorKind::InvalidInput, "m_+ and m_- lengths differ");
  e = std::move(plus);
  e.insert(e.end(), minus.begin(), minus.end());
}

MultiIndex MultiIndex::unit(int N, int j, bool plus) {
  MultiIndex m(N);
  m.e[plus ? j : N + j] = 1;
  return m;
}

int MultiIndex::norm() const {
  int s = 0;
  for (int v : e) s += v;
  return s;
}

MultiIndex MultiIndex::conj() const {
  MultiIndex m(N());
  for (int j = 0; j < N(); ++j) {
    m.e[j] = e[N() + j];
    m.e[N() + j] = e[j];
  }
  return m;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.e.size() != e.size()) throw Error(ErrorKind::InvalidInput, "multi-index size mismatch");
  MultiIndex m = *this;
  for (size_t i = 0; i < e.size(); ++i) m.e[i] += o.e[i];
  return m;
}

bool MultiIndex::operator<(const MultiIndex& o) const {
  int a = norm(), b = o.norm();
  if (a != b) return a < b;
  return e > o.e;  // (1,0) before (0,1)
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << "(";
  for (int j = 0; j < N(); ++j) os << (j ? "," : "") << plus(j);
  os << "|";
  for (int j = 0; j < N(); ++j) os << (j ? "," : "") << minus(j);
  os << ")";
  return os.str();
}

double lam(const std::vector<double>& lambdas, const MultiIndex& m) {
  if (static_cast<int>(lambdas.size()) != m.N()) throw Error(ErrorKind::InvalidInput, "lambda vector length mismatch");
  double s = 0.0;
  for (int j = 0; j < m.N(); ++j) s += lambdas[j] * (m.plus(j) - m.minus(j));
  return s;
}

Order partial_order(const MultiIndex& mp, const MultiIndex& m) {
  if (mp.N() != m.N()) throw Error(ErrorKind::InvalidInput, "multi-index N mismatch");
  if (mp == m) return Order::Equal;
  for (int j = 0; j < m.N(); ++j)
    if (mp.plus(j) + mp.minus(j) > m.plus(j) + m.minus(j)) return Order::Incomparable;
  return mp.norm() < m.norm() ? Order::Strict : Order::WeakOnly;
}

bool precedes(const MultiIndex& mp, const MultiIndex& m) { return partial_order(mp, m) == Order::Strict; }

std::vector<MultiIndex> enumerate_indices(int N, int deg) {
  std::vector<MultiIndex> out;
  if (N == 0) {
    out.emplace_back(0);
    return out;
  }
  MultiIndex cur(N);
  // recursive fill of 2N slots with total <= deg
  std::vector<int>& e = cur.e;
  auto rec = [&](auto&& self, int slot, int left) -> void {
    if (slot == 2 * N) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      e[slot] = v;
      self(self, slot + 1, left - v);
    }
    e[slot] = 0;
  };
  rec(rec, 0, deg);
  std::sort(out.begin(), out.end());
  return out;
}

bool ResonanceStructure::in_I(const MultiIndex& m) const {
  for (const auto& r : R_min)
    if (precedes(r, m)) return true;
  return false;
}

bool ResonanceStructure::in_R_min(const MultiIndex& m) const {
  return std::find(R_min.begin(), R_min.end(), m) != R_min.end();
}

bool ResonanceStructure::in_Lambda0(const MultiIndex& m) const {
  return std::find(Lambda0.begin(), Lambda0.end(), m) != Lambda0.end();
}

std::vector<int> ResonanceStructure::lambda_sets(const MultiIndex& m) const {
  std::vector<int> js;
  for (int j = 0; j < N; ++j)
    if (std::find(Lambda[j].begin(), Lambda[j].end(), m) != Lambda[j].end()) js.push_back(j);
  return js;
}

std::vector<MultiIndex> ResonanceStructure::NR_upto(int deg) const {
  std::vector<MultiIndex> out;
  for (auto& m : enumerate_indices(N, deg))
    if (in_NR(m)) out.push_back(m);
  return out;
}

ResonanceStructure classify(const std::vector<double>& lambdas, double omega, double tau) {
  ResonanceStructure rs;
  rs.N = static_cast<int>(lambdas.size());
  rs.omega = omega;
  rs.lambdas = lambdas;
  rs.tau = tau;
  rs.Lambda.assign(rs.N, {});
  rs.H6.status = Status::Pass;
  rs.margin_edge = omega;
  rs.margin_modes = omega;
  if (rs.N == 0) {
    rs.NR.emplace_back(0);
    rs.H6.note = "no internal modes";
    return rs;
  }
  double lmin = *std::min_element(lambdas.begin(), lambdas.end());
  for (double l : lambdas)
    if (!(l > tau && l < omega - tau))
      throw Error(ErrorKind::InvalidInput, "eigenvalue " + std::to_string(l) + " not separated from 0 and omega");
  rs.degree_bound = static_cast<int>(std::ceil(omega / lmin)) + 1;
  const int N = rs.N;

  // minimal resonant indices are pure: (m_+, 0) or its conjugate
  for (const auto& m : enumerate_indices(N, rs.degree_bound)) {
    bool pure_plus = true;
    for (int j = 0; j < N; ++j) pure_plus = pure_plus && m.minus(j) == 0;
    if (!pure_plus || m.is_zero()) continue;
    if (lam(lambdas, m) <= omega + tau) continue;
    bool minimal = true;
    for (int j = 0; j < N && minimal; ++j) {
      if (m.plus(j) == 0) continue;
      MultiIndex d = m;
      d.e[j] -= 1;
      if (lam(lambdas, d) > omega + tau) minimal = false;
    }
    if (minimal) {
      rs.R_min.push_back(m);
      rs.R_min.push_back(m.conj());
    }
  }
  std::sort(rs.R_min.begin(), rs.R_min.end());
  for (const auto& m : rs.R_min) rs.K_max = std::max(rs.K_max, m.norm());

  for (const auto& m : rs.R_min) {
    double l = lam(lambdas, m);
    if (l <= 0) continue;
    auto it = std::find_if(rs.groups.begin(), rs.groups.end(), [&](const ResonanceGroup& g) { return std::abs(g.r - l) <= tau; });
    if (it == rs.groups.end())
      rs.groups.push_back({l, {m}});
    else
      it->members.push_back(m);
  }
  std::sort(rs.groups.begin(), rs.groups.end(), [](const auto& a, const auto& b) { return a.r < b.r; });

  int scan = std::max(rs.degree_bound, rs.K_max);
  for (const auto& m : enumerate_indices(N, scan)) {
    if (rs.in_I(m) || rs.in_R_min(m)) continue;
    double l = lam(lambdas, m);
    double gap = std::abs(std::abs(l) - omega);
    rs.margin_edge = std::min(rs.margin_edge, gap);
    if (gap <= tau) rs.ambiguous.push_back(m);
    if (m.norm() > rs.K_max) continue;
    rs.NR.push_back(m);
    if (!m.is_zero() && std::abs(l) <= tau) rs.Lambda0.push_back(m);
    for (int j = 0; j < N; ++j)
      if (std::abs(l - lambdas[j]) <= tau) rs.Lambda[j].push_back(m);
  }
  bool mode_clash = false;
  for (const auto& m : enumerate_indices(N, rs.degree_bound)) {
    bool pure_plus = true;
    for (int j = 0; j < N; ++j) pure_plus = pure_plus && m.minus(j) == 0;
    if (!pure_plus || m.norm() < 2) continue;
    for (double lj : lambdas) {
      double d = std::abs(lam(lambdas, m) - lj);
      rs.margin_modes = std::min(rs.margin_modes, d);
      if (d <= tau) mode_clash = true;
    }
  }
  rs.H6.evidence["margin_edge"] = rs.margin_edge;
  rs.H6.evidence["margin_modes"] = rs.margin_modes;
  rs.H6.evidence["degree_bound"] = rs.degree_bound;
  if (!rs.ambiguous.empty() || mode_clash) {
    rs.H6.status = Status::Fail;
    std::string note;
    if (!rs.ambiguous.empty()) note += "non-ignored index at the continuum edge: " + rs.ambiguous.front().str();
    if (mode_clash) note += std::string(note.empty() ? "" : "; ") + "pure-plus combination hits an eigenvalue";
    rs.H6.note = note;
  }
  return rs;
}

std::string ResonanceStructure::to_json() const {
  using nlohmann::json;
  auto idx = [](const MultiIndex& m) {
    std::vector<int> p(m.e.begin(), m.e.begin() + m.N()), q(m.e.begin() + m.N(), m.e.end());
    return json{{"plus", p}, {"minus", q}};
  };
  auto list = [&](const std::vector<MultiIndex>& v) {
    json a = json::array();
    for (const auto& m : v) a.push_back(idx(m));
    return a;
  };
  json j;
  j["N"] = N;
  j["omega"] = omega;
  j["lambda"] = lambdas;
  j["tau"] = tau;
  j["degree_bound"] = degree_bound;
  j["K_max"] = K_max;
  j["R_min"] = list(R_min);
  json g = json::array();
  for (const auto& grp : groups) g.push_back({{"r", grp.r}, {"M", grp.members.size()}, {"members", list(grp.members)}});
  j["groups"] = g;
  j["NR"] = list(NR);
  j["Lambda0"] = list(Lambda0);
  json lj = json::array();
  for (const auto& l : Lambda) lj.push_back(list(l));
  j["Lambda"] = lj;
  j["ambiguous"] = list(ambiguous);
  j["margin_edge"] = margin_edge;
  j["margin_modes"] = margin_modes;
  j["H6"] = status_name(H6.status);
  return j.dump(2);
}

}  // namespace rpl
