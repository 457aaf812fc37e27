#include "rpl/jet.hpp"

#include "rpl/errors.hpp"

namespace rpl {

JetSpace::JetSpace(int N, int K) : N_(N), K_(K), idx_(enumerate_indices(N, K)) {
  for (int i = 0; i < size(); ++i) pos_[idx_[i].e] = i;
  conj_.resize(size());
  for (int i = 0; i < size(); ++i) conj_[i] = pos_.at(idx_[i].conj().e);
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b) {
      if (idx_[a].norm() + idx_[b].norm() > K_) continue;
      prod_.push_back({a, b, pos_.at((idx_[a] + idx_[b]).e)});
    }
}

int JetSpace::find(const MultiIndex& m) const {
  if (m.N() != N_) throw Error(ErrorKind::InvalidInput, "multi-index N mismatch");
  auto it = pos_.find(m.e);
  return it == pos_.end() ? -1 : it->second;
}

namespace {
int need(const JetSpace& s, const MultiIndex& m) {
  int i = s.find(m);
  if (i < 0) throw Error(ErrorKind::InvalidInput, "index " + m.str() + " beyond jet degree");
  return i;
}
void same_space(const JetSpacePtr& a, const JetSpacePtr& b) {
  if (a != b && (a->N() != b->N() || a->K() != b->K())) throw Error(ErrorKind::InvalidInput, "jets on different spaces");
}
}  // namespace

cplx monomial(const MultiIndex& m, const std::vector<cplx>& z) {
  cplx p = 1.0;
  for (int j = 0; j < m.N(); ++j) {
    for (int k = 0; k < m.plus(j); ++k) p *= z[j];
    for (int k = 0; k < m.minus(j); ++k) p *= std::conj(z[j]);
  }
  return p;
}

ScalarJet ScalarJet::zero(JetSpacePtr s) { return {s, std::vector<double>(s->size(), 0.0)}; }
double& ScalarJet::operator[](const MultiIndex& m) { return c[need(*space, m)]; }
double ScalarJet::at(const MultiIndex& m) const {
  int i = space->find(m);
  return i < 0 ? 0.0 : c[i];
}
ScalarJet ScalarJet::conj() const {
  ScalarJet o = zero(space);
  for (int i = 0; i < space->size(); ++i) o.c[space->conj(i)] = c[i];
  return o;
}
cplx ScalarJet::eval(const std::vector<cplx>& z) const {
  cplx s = 0.0;
  for (int i = 0; i < space->size(); ++i)
    if (c[i] != 0.0) s += c[i] * monomial(space->index(i), z);
  return s;
}

FieldJet FieldJet::zero(JetSpacePtr s, int n) { return {s, std::vector<Vec>(s->size(), Vec::Zero(n))}; }
Vec& FieldJet::operator[](const MultiIndex& m) { return c[need(*space, m)]; }
const Vec& FieldJet::at(const MultiIndex& m) const { return c[need(*space, m)]; }

FieldJet& FieldJet::operator+=(const FieldJet& o) {
  same_space(space, o.space);
  for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
  return *this;
}
FieldJet& FieldJet::operator-=(const FieldJet& o) {
  same_space(space, o.space);
  for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
  return *this;
}

FieldJet FieldJet::operator*(const FieldJet& o) const {
  same_space(space, o.space);
  FieldJet r = zero(space, samples());
  for (const auto& p : space->products()) r.c[p.c].array() += c[p.a].array() * o.c[p.b].array();
  return r;
}

FieldJet FieldJet::conj() const {
  FieldJet r = zero(space, samples());
  for (int i = 0; i < space->size(); ++i) r.c[space->conj(i)] = c[i];
  return r;
}

FieldJet FieldJet::dz(int j, bool plus) const {
  FieldJet r = zero(space, samples());
  for (int i = 0; i < space->size(); ++i) {
    const MultiIndex& m = space->index(i);
    int p = plus ? m.plus(j) : m.minus(j);
    if (p == 0) continue;
    MultiIndex d = m;
    d.e[plus ? j : m.N() + j] -= 1;
    r.c[space->find(d)] += p * c[i];
  }
  return r;
}

CVec FieldJet::eval(const std::vector<cplx>& z) const {
  CVec u = CVec::Zero(samples());
  for (int i = 0; i < space->size(); ++i) {
    cplx zm = monomial(space->index(i), z);
    if (zm != 0.0) u += zm * c[i].cast<cplx>();
  }
  return u;
}

FieldJet operator*(const ScalarJet& s, const FieldJet& f) {
  same_space(s.space, f.space);
  FieldJet r = FieldJet::zero(f.space, f.samples());
  for (const auto& p : f.space->products())
    if (s.c[p.a] != 0.0) r.c[p.c] += s.c[p.a] * f.c[p.b];
  return r;
}

FieldJet operator*(const Vec& v, const FieldJet& f) {
  FieldJet r = f;
  for (auto& x : r.c) x = x.cwiseProduct(v);
  return r;
}

FieldJet compose(const std::vector<Vec>& t, const FieldJet& f) {
  const int n = f.samples();
  FieldJet d = f;
  d.c[0].setZero();
  FieldJet r = FieldJet::zero(f.space, n);
  if (t.empty()) return r;
  r.c[0] = t.back();
  for (int k = static_cast<int>(t.size()) - 2; k >= 0; --k) {
    r = r * d;
    r.c[0] += t[k];
  }
  return r;
}

}  // namespace rpl
