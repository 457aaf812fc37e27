#pragma once
#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace rpl {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// Square band matrix with equal lower/upper bandwidth k, row-major band rows.
template <class T>
class Band {
 public:
  using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Band() = default;
  Band(int n, int k) : n_(n), k_(k), data_(static_cast<size_t>(n) * (2 * k + 1), T(0)) {}

  int size() const { return n_; }
  int bandwidth() const { return k_; }
  bool in_band(int i, int j) const { return i - j <= k_ && j - i <= k_ && i >= 0 && j >= 0 && i < n_ && j < n_; }
  T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * (2 * k_ + 1) + (j - i + k_)]; }
  T at(int i, int j) const { return in_band(i, j) ? data_[static_cast<size_t>(i) * (2 * k_ + 1) + (j - i + k_)] : T(0); }

  template <class S>
  Eigen::Matrix<decltype(T() * S()), Eigen::Dynamic, 1> apply(const Eigen::Matrix<S, Eigen::Dynamic, 1>& x) const {
    using R = decltype(T() * S());
    Eigen::Matrix<R, Eigen::Dynamic, 1> y(n_);
    for (int i = 0; i < n_; ++i) {
      R acc(0);
      int j0 = std::max(0, i - k_), j1 = std::min(n_ - 1, i + k_);
      const T* row = &data_[static_cast<size_t>(i) * (2 * k_ + 1)];
      for (int j = j0; j <= j1; ++j) acc += row[j - i + k_] * x[j];
      y[i] = acc;
    }
    return y;
  }

  void add_diagonal(const Eigen::Matrix<T, Eigen::Dynamic, 1>& d) {
    for (int i = 0; i < n_; ++i) (*this)(i, i) += d[i];
  }
  void shift(T s) {
    for (int i = 0; i < n_; ++i) (*this)(i, i) += s;
  }
  Band<cplx> complexified() const {
    Band<cplx> c(n_, k_);
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - k_); j <= std::min(n_ - 1, i + k_); ++j) c(i, j) = at(i, j);
    return c;
  }
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> dense() const {
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> m = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - k_); j <= std::min(n_ - 1, i + k_); ++j) m(i, j) = at(i, j);
    return m;
  }
  double max_asymmetry() const;

 private:
  int n_ = 0, k_ = 0;
  std::vector<T> data_;
};

// LU with partial pivoting (LAPACK gbtrf/gbtrs).
template <class T>
class BandLU {
 public:
  using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  explicit BandLU(const Band<T>& a);
  VecT solve(const VecT& b) const;
  // reciprocal condition estimate in the 1-norm
  double rcond() const;

 private:
  int n_, k_, ldab_;
  double anorm_ = 0.0;
  std::vector<T> ab_;
  std::vector<int> ipiv_;
};

// Number of negative pivots of LDL^T (no pivoting) of a - shift*I; a symmetric.
int negative_count(const Band<double>& a, double shift = 0.0);

// Eigenvalues of a symmetric band matrix in (lo, hi], ascending.
std::vector<double> sym_band_eigenvalues(const Band<double>& a, double lo, double hi);

// Eigenvector for an (isolated) eigenvalue estimate via inverse iteration.
Vec inverse_iteration(const Band<double>& a, double mu, int iters = 4);

// [[A, C], [D^T, 0]] [x; y] = [f; g] for banded A that may be singular on a
// small subspace; shifted factorization plus iterative refinement.
struct BorderedSolution {
  Vec x, y;
  double residual = 0.0;  // relative
  int refinements = 0;
};
BorderedSolution bordered_solve(const Band<double>& A, const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                                const Vec& f, const Vec& g, double delta_rel = 1e-8, int max_refine = 40);

}  // namespace rpl
