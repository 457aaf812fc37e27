#include "rpl/banded.hpp"

#include <cmath>
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "rpl/errors.hpp"

namespace rpl {

template <class T>
double Band<T>::max_asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - k_); j <= std::min(n_ - 1, i + k_); ++j) m = std::max(m, std::abs(at(i, j) - at(j, i)));
  return m;
}

template class Band<double>;
template class Band<cplx>;

namespace {

lapack_int gbtrf(int n, int k, double* ab, int ldab, int* ipiv) {
  return LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, k, k, ab, ldab, ipiv);
}
lapack_int gbtrf(int n, int k, cplx* ab, int ldab, int* ipiv) {
  return LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, k, k, ab, ldab, ipiv);
}
lapack_int gbtrs(int n, int k, const double* ab, int ldab, const int* ipiv, double* b) {
  return LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, k, k, 1, ab, ldab, ipiv, b, n);
}
lapack_int gbtrs(int n, int k, const cplx* ab, int ldab, const int* ipiv, cplx* b) {
  return LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, k, k, 1, ab, ldab, ipiv, b, n);
}
lapack_int gbcon(int n, int k, const double* ab, int ldab, const int* ipiv, double anorm, double* rc) {
  return LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n, k, k, ab, ldab, ipiv, anorm, rc);
}
lapack_int gbcon(int n, int k, const cplx* ab, int ldab, const int* ipiv, double anorm, double* rc) {
  return LAPACKE_zgbcon(LAPACK_COL_MAJOR, '1', n, k, k, ab, ldab, ipiv, anorm, rc);
}

}  // namespace

template <class T>
BandLU<T>::BandLU(const Band<T>& a) : n_(a.size()), k_(a.bandwidth()), ldab_(3 * a.bandwidth() + 1) {
  ab_.assign(static_cast<size_t>(ldab_) * n_, T(0));
  ipiv_.assign(n_, 0);
  std::vector<double> colsum(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - k_); j <= std::min(n_ - 1, i + k_); ++j) {
      T v = a.at(i, j);
      ab_[static_cast<size_t>(j) * ldab_ + (2 * k_ + i - j)] = v;
      colsum[j] += std::abs(v);
    }
  for (double c : colsum) anorm_ = std::max(anorm_, c);
  lapack_int info = gbtrf(n_, k_, ab_.data(), ldab_, ipiv_.data());
  if (info > 0) throw Error(ErrorKind::IllConditioned, "exactly singular band factorization");
  if (info < 0) throw Error(ErrorKind::InvalidInput, "band factorization argument error");
}

template <class T>
typename BandLU<T>::VecT BandLU<T>::solve(const VecT& b) const {
  VecT x = b;
  lapack_int info = gbtrs(n_, k_, ab_.data(), ldab_, ipiv_.data(), x.data());
  if (info != 0) throw Error(ErrorKind::InvalidInput, "band solve failed");
  return x;
}

template <class T>
double BandLU<T>::rcond() const {
  double rc = 0.0;
  gbcon(n_, k_, ab_.data(), ldab_, ipiv_.data(), anorm_, &rc);
  return rc;
}

template class BandLU<double>;
template class BandLU<cplx>;

int negative_count(const Band<double>& a, double shift) {
  const int n = a.size(), k = a.bandwidth();
  // work on the lower band: L(i, i-q), q = 0..k
  std::vector<double> l(static_cast<size_t>(n) * (k + 1), 0.0);
  auto L = [&](int i, int q) -> double& { return l[static_cast<size_t>(i) * (k + 1) + q]; };
  std::vector<double> d(n, 0.0);
  int neg = 0;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(a.at(i, i) - shift));
  const double tiny = 1e-300 + 1e-15 * scale;
  for (int i = 0; i < n; ++i) {
    for (int q = k; q >= 1; --q) {
      int j = i - q;
      if (j < 0) continue;
      double s = a.at(i, j);
      for (int p = std::max(0, i - k); p < j; ++p) s -= L(i, i - p) * L(j, j - p) * d[p];
      L(i, q) = s / d[j];
    }
    double s = a.at(i, i) - shift;
    for (int p = std::max(0, i - k); p < i; ++p) s -= L(i, i - p) * L(i, i - p) * d[p];
    if (std::abs(s) < tiny) s = -tiny;
    d[i] = s;
    if (s < 0) ++neg;
  }
  return neg;
}

std::vector<double> sym_band_eigenvalues(const Band<double>& a, double lo, double hi) {
  const int n = a.size(), k = a.bandwidth();
  std::vector<double> ab(static_cast<size_t>(k + 1) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = j; i <= std::min(n - 1, j + k); ++i) ab[static_cast<size_t>(j) * (k + 1) + (i - j)] = a.at(i, j);
  std::vector<double> w(n), q(1), z(1);
  std::vector<lapack_int> ifail(n);
  lapack_int m = 0;
  lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'V', 'L', n, k, ab.data(), k + 1, q.data(), 1, lo, hi, 0,
                                   0, 0.0, &m, w.data(), z.data(), 1, ifail.data());
  if (info != 0) throw Error(ErrorKind::EigensolverFailure, "dsbevx info " + std::to_string(info));
  return std::vector<double>(w.begin(), w.begin() + m);
}

Vec inverse_iteration(const Band<double>& a, double mu, int iters) {
  Band<double> s = a;
  double scale = 0.0;
  for (int i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a.at(i, i)));
  s.shift(-(mu + 1e-11 * (1.0 + std::abs(mu))));
  BandLU<double> lu(s);
  Vec x = Vec::Ones(a.size());
  for (int i = 0; i < a.size(); ++i) x[i] += 0.1 * std::sin(0.37 * i);
  x.normalize();
  for (int it = 0; it < iters; ++it) {
    x = lu.solve(x);
    x.normalize();
  }
  return x;
}

BorderedSolution bordered_solve(const Band<double>& A, const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                                const Vec& f, const Vec& g, double delta_rel, int max_refine) {
  const int n = A.size(), k = static_cast<int>(C.cols());
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(A.at(i, i)));
  Band<double> As = A;
  As.shift(delta_rel * std::max(scale, 1.0));
  BandLU<double> lu(As);
  Eigen::MatrixXd Z(n, k);
  for (int c = 0; c < k; ++c) Z.col(c) = lu.solve(C.col(c));
  Eigen::PartialPivLU<Eigen::MatrixXd> S(D.transpose() * Z);
  auto precond = [&](const Vec& rx, const Vec& ry, Vec& dx, Vec& dy) {
    Vec t = lu.solve(rx);
    dy = S.solve(D.transpose() * t - ry);
    dx = t - Z * dy;
  };
  BorderedSolution out;
  out.x = Vec::Zero(n);
  out.y = Vec::Zero(k);
  double fn = std::sqrt(f.squaredNorm() + g.squaredNorm());
  if (fn == 0.0) return out;
  double prev = 1e300;
  Vec bx = out.x, by = out.y;
  for (int it = 0; it <= max_refine; ++it) {
    Vec rx = f - A.apply(out.x) - C * out.y;
    Vec ry = g - D.transpose() * out.x;
    double res = std::sqrt(rx.squaredNorm() + ry.squaredNorm()) / fn;
    if (res > 0.9 * prev) {  // stagnated at roundoff; keep the best iterate
      out.x = bx;
      out.y = by;
      break;
    }
    prev = out.residual = res;
    bx = out.x;
    by = out.y;
    out.refinements = it;
    if (res < 1e-15 || it == max_refine) break;
    Vec dx, dy;
    precond(rx, ry, dx, dy);
    out.x += dx;
    out.y += dy;
  }
  return out;
}

}  // namespace rpl
