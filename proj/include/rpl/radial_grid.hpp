#pragma once
#include <cstdint>
#include <memory>
#include <string>

#include "rpl/banded.hpp"

namespace rpl {

enum class Parity { Even, Odd };

// Node-offset grid r_i = (i + 1/2) h, i = 0..n-1, Dirichlet at R = n h.
class RadialGrid {
 public:
  RadialGrid(int dimension, double R, double h, int order = 4);

  int dimension() const { return d_; }
  double R() const { return R_; }
  double h() const { return h_; }
  int order() const { return order_; }
  int size() const { return n_; }
  double sphere_area() const { return area_; }
  const Vec& r() const { return r_; }
  const Vec& weights() const { return w_; }
  const Vec& sqrt_weights() const { return sw_; }

  // -Laplacian acting on v = sqrt(w) u; symmetric by construction.
  // Odd parity is the d = 1 odd sector.
  Band<double> neg_laplacian(Parity parity = Parity::Even) const;
  // stencil coefficients a_0..a_p of -D/h^2 away from the boundaries
  std::vector<double> interior_stencil() const;
  // -Laplacian with the Dirichlet closure at R replaced by ghost relations
  // v_{n+q} = sum_t T(q, t) v_{n-m+t}, q = 0..p-1, T of shape p x m (m <= 2p)
  Band<cplx> neg_laplacian_closed(const Eigen::MatrixXcd& T) const;
  // ghost matrix for exterior solutions sum_k c_k mu_k^j
  Eigen::MatrixXcd ghost_matrix(const std::vector<cplx>& mu) const;
  // roots |mu| < 1 of the exterior recurrence (-D/h^2 + alpha) v = 0; on the unit
  // circle the root continuous from Im(alpha) < 0 is taken (outgoing for z + i0)
  std::vector<cplx> exterior_roots(cplx alpha, double outgoing_sign = -1.0) const;

  std::string canonical() const;
  std::string hash_hex() const;
  std::uint64_t hash64() const;
  bool same_as(const RadialGrid& o) const { return canonical() == o.canonical(); }

  // inner products on physical samples
  double inner(const CVec& f, const CVec& g) const;
  double inner(const Vec& f, const Vec& g) const;
  double norm(const CVec& f) const { return std::sqrt(inner(f, f)); }
  double norm(const Vec& f) const { return std::sqrt(inner(f, f)); }
  CVec laplacian(const CVec& f) const;
  Vec laplacian(const Vec& f) const;
  // first derivative of an even (radial) function
  Vec derivative(const Vec& f) const;
  double sigma_norm(const CVec& f, double sigma) const;
  double sigma_norm(const Vec& f, double sigma) const { return sigma_norm(CVec(f.cast<cplx>()), sigma); }

 private:
  int d_, order_, n_;
  double R_, h_, area_;
  Vec r_, w_, sw_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Complex samples on a grid; optional lower component for C^2-valued fields.
struct RadialField {
  GridPtr grid;
  CVec upper;
  CVec lower;  // empty unless two-component
  bool two_component() const { return lower.size() > 0; }
};

double inner(const RadialField& f, const RadialField& g);
double sigma_norm(const RadialField& f, double sigma);
RadialField laplacian(const RadialField& f);

void write_field_csv(const std::string& path, const RadialGrid& grid, const CVec& u);
CVec read_field_csv(const std::string& path, const RadialGrid& grid);

// binary cache: magic, version, grid hash, field count, length, payload (LE f64)
void write_fields_binary(const std::string& path, std::uint64_t grid_hash, const std::vector<Vec>& fields);
std::vector<Vec> read_fields_binary(const std::string& path, std::uint64_t grid_hash);

}  // namespace rpl
