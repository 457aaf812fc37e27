#include "rpl/radial_grid.hpp"

#include <openssl/sha.h>

#include <bit>
#include <cmath>
#include <atomic>
#include <cstdio>
#include <cstring>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rpl/errors.hpp"

namespace rpl {

RadialGrid::RadialGrid(int dimension, double R, double h, int order)
    : d_(dimension), order_(order), R_(R), h_(h) {
  if (d_ < 1 || d_ > 3) throw Error(ErrorKind::InvalidInput, "grid dimension must be 1, 2 or 3");
  if (!(R > 0) || !(h > 0) || h >= R) throw Error(ErrorKind::InvalidInput, "grid needs 0 < h < R");
  if (order != 2 && order != 4) throw Error(ErrorKind::InvalidInput, "stencil order must be 2 or 4");
  if (d_ == 2 && order == 4)
    throw Error(ErrorKind::InvalidInput, "d = 2 supports only the order-2 conservative stencil");
  n_ = static_cast<int>(std::lround(R / h));
  if (std::abs(n_ * h - R) > 1e-9 * R) throw Error(ErrorKind::InvalidInput, "R must be an integer multiple of h");
  area_ = d_ == 1 ? 2.0 : (d_ == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
  r_.resize(n_);
  w_.resize(n_);
  sw_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    r_[i] = (i + 0.5) * h_;
    w_[i] = area_ * std::pow(r_[i], d_ - 1) * h_;
    sw_[i] = std::sqrt(w_[i]);
  }
}

std::vector<double> RadialGrid::interior_stencil() const {
  double h2 = h_ * h_;
  if (order_ == 2) return {2.0 / h2, -1.0 / h2};
  return {30.0 / (12.0 * h2), -16.0 / (12.0 * h2), 1.0 / (12.0 * h2)};
}

Band<double> RadialGrid::neg_laplacian(Parity parity) const {
  const double h2 = h_ * h_;
  if (d_ == 2) {
    Band<double> s(n_, 1);
    for (int i = 0; i < n_; ++i) {
      double rp = (i + 1.0) * h_, rm = i * h_;
      double diag = (i == n_ - 1 ? 2.0 * rp : rp) + rm;
      s(i, i) = diag / (r_[i] * h2);
      if (i + 1 < n_) {
        double off = -rp / (h2 * std::sqrt(r_[i] * r_[i + 1]));
        s(i, i + 1) = off;
        s(i + 1, i) = off;
      }
    }
    return s;
  }
  // v = u (d = 1) or v ~ r u (d = 3); mirror sign at the origin
  double sg = (d_ == 3 || parity == Parity::Odd) ? -1.0 : 1.0;
  if (d_ == 3 && parity == Parity::Odd) throw Error(ErrorKind::InvalidInput, "odd sector only exists for d = 1");
  std::vector<double> c = order_ == 4 ? std::vector<double>{-30.0 / 12, 16.0 / 12, -1.0 / 12}
                                      : std::vector<double>{-2.0, 1.0};
  const int p = static_cast<int>(c.size()) - 1;
  Band<double> s(n_, p);
  for (int i = 0; i < n_; ++i) {
    for (int q = -p; q <= p; ++q) {
      double coef = -c[std::abs(q)] / h2;
      int j = i + q;
      double sign = 1.0;
      if (j < 0) {
        j = -j - 1;
        sign = sg;
      } else if (j >= n_) {
        j = 2 * n_ - 1 - j;
        sign = -1.0;
      }
      s(i, j) += sign * coef;
    }
  }
  return s;
}

Band<cplx> RadialGrid::neg_laplacian_closed(const Eigen::MatrixXcd& T) const {
  const double h2 = h_ * h_;
  const int m = static_cast<int>(T.cols());
  if (d_ == 2) {
    if (T.rows() != 1) throw Error(ErrorKind::InvalidInput, "d = 2 closure takes one ghost");
    Band<cplx> s(n_, std::max(1, m));
    for (int i = 0; i < n_; ++i) {
      double rp = (i + 1.0) * h_, rm = i * h_;
      s(i, i) += (rp + rm) / (r_[i] * h2);
      if (i + 1 < n_) {
        double off = -rp / (h2 * std::sqrt(r_[i] * r_[i + 1]));
        s(i, i + 1) += off;
        s(i + 1, i) += off;
      }
    }
    // ghost at r_n = R + h/2 in symmetric coordinates
    double off = -(n_ * h_) / (h2 * std::sqrt(r_[n_ - 1] * (n_ + 0.5) * h_));
    for (int t = 0; t < m; ++t) s(n_ - 1, n_ - m + t) += off * T(0, t);
    return s;
  }
  double sg = d_ == 3 ? -1.0 : 1.0;
  std::vector<double> c = order_ == 4 ? std::vector<double>{-30.0 / 12, 16.0 / 12, -1.0 / 12}
                                      : std::vector<double>{-2.0, 1.0};
  const int p = static_cast<int>(c.size()) - 1;
  if (T.rows() != p || m > 2 * p) throw Error(ErrorKind::InvalidInput, "ghost matrix shape does not match stencil");
  Band<cplx> s(n_, std::max(p, m));
  for (int i = 0; i < n_; ++i) {
    for (int q = -p; q <= p; ++q) {
      double coef = -c[std::abs(q)] / h2;
      int j = i + q;
      if (j < 0) {
        s(i, -j - 1) += sg * coef;
      } else if (j >= n_) {
        for (int t = 0; t < m; ++t) s(i, n_ - m + t) += coef * T(j - n_, t);
      } else {
        s(i, j) += coef;
      }
    }
  }
  return s;
}

Eigen::MatrixXcd RadialGrid::ghost_matrix(const std::vector<cplx>& mu) const {
  const int p = static_cast<int>(mu.size());
  Eigen::MatrixXcd V(p, p), G(p, p);
  for (int k = 0; k < p; ++k)
    for (int t = 0; t < p; ++t) {
      V(t, k) = std::pow(mu[k], t);
      G(t, k) = std::pow(mu[k], p + t);
    }
  return G * V.inverse();
}

std::vector<cplx> RadialGrid::exterior_roots(cplx alpha, double outgoing_sign) const {
  auto a = interior_stencil();
  auto solve = [&](cplx al) {
    // t = mu + 1/mu
    std::vector<cplx> ts;
    if (a.size() == 2) {
      ts.push_back(-(a[0] + al) / a[1]);
    } else {
      // a2 t^2 + a1 t + (a0 - 2 a2 + alpha) = 0
      cplx A = a[2], B = a[1], C = a[0] - 2.0 * a[2] + al;
      cplx disc = std::sqrt(B * B - 4.0 * A * C);
      cplx t1 = (-B + disc) / (2.0 * A), t2 = (-B - disc) / (2.0 * A);
      ts = {t1, t2};
    }
    std::vector<cplx> mus;
    for (cplx t : ts) {
      cplx sq = std::sqrt(t * t - 4.0);
      cplx m1 = 0.5 * (t + sq), m2 = 0.5 * (t - sq);
      mus.push_back(std::abs(m1) < std::abs(m2) ? m1 : m2);
    }
    return mus;
  };
  auto roots = solve(alpha);
  bool on_circle = false;
  for (auto m : roots)
    if (std::abs(std::abs(m) - 1.0) < 1e-9) on_circle = true;
  if (!on_circle) return roots;
  // choose the branch continuous from alpha + i*outgoing_sign*delta
  double delta = 1e-7 * (1.0 + std::abs(alpha)) / (h_ * h_) * h_ * h_;
  auto shifted = solve(alpha + cplx(0.0, outgoing_sign * delta));
  std::vector<cplx> out;
  for (auto target : shifted) {
    cplx best = roots[0];
    for (auto m : roots) {
      if (std::abs(m - target) < std::abs(best - target)) best = m;
      if (std::abs(1.0 / m - target) < std::abs(best - target)) best = 1.0 / m;
    }
    out.push_back(best);
  }
  return out;
}

std::string RadialGrid::canonical() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "d=%d;R=%.17g;h=%.17g;order=%d;n=%d", d_, R_, h_, order_, n_);
  return buf;
}

std::string RadialGrid::hash_hex() const {
  auto c = canonical();
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(c.data()), c.size(), md);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char b : md) {
    out += hex[b >> 4];
    out += hex[b & 15];
  }
  return out;
}

std::uint64_t RadialGrid::hash64() const {
  auto c = canonical();
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(c.data()), c.size(), md);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | md[i];
  return v;
}

double RadialGrid::inner(const CVec& f, const CVec& g) const {
  if (f.size() != n_ || g.size() != n_) throw Error(ErrorKind::IncompatibleGrids, "sample count differs from grid");
  double acc = 0.0;
  for (int i = 0; i < n_; ++i) acc += w_[i] * (f[i] * std::conj(g[i])).real();
  return acc;
}

double RadialGrid::inner(const Vec& f, const Vec& g) const {
  if (f.size() != n_ || g.size() != n_) throw Error(ErrorKind::IncompatibleGrids, "sample count differs from grid");
  return (w_.array() * f.array() * g.array()).sum();
}

CVec RadialGrid::laplacian(const CVec& f) const {
  if (f.size() != n_) throw Error(ErrorKind::IncompatibleGrids, "sample count differs from grid");
  CVec v = sw_.cast<cplx>().cwiseProduct(f);
  CVec y = neg_laplacian().apply(v);
  return -(y.array() / sw_.cast<cplx>().array()).matrix();
}

Vec RadialGrid::laplacian(const Vec& f) const {
  if (f.size() != n_) throw Error(ErrorKind::IncompatibleGrids, "sample count differs from grid");
  Vec v = sw_.cwiseProduct(f);
  Vec y = neg_laplacian().apply(v);
  return -(y.array() / sw_.array()).matrix();
}

Vec RadialGrid::derivative(const Vec& f) const {
  // even extension through 0, odd reflection at R
  auto at = [&](int j) {
    if (j < 0) return f[-j - 1];
    if (j >= n_) return -f[2 * n_ - 1 - j];
    return f[j];
  };
  Vec out(n_);
  for (int i = 0; i < n_; ++i) {
    if (order_ == 4)
      out[i] = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h_);
    else
      out[i] = (at(i + 1) - at(i - 1)) / (2.0 * h_);
  }
  return out;
}

double RadialGrid::sigma_norm(const CVec& f, double sigma) const {
  CVec F(n_);
  for (int i = 0; i < n_; ++i) F[i] = std::pow(1.0 + r_[i] * r_[i], 0.5 * sigma) * f[i];
  CVec lap = laplacian(F);
  double s = inner(F, F) - inner(F, lap) + inner(lap, lap);
  return std::sqrt(std::max(s, 0.0));
}

namespace {
const RadialGrid& common_grid(const RadialField& f, const RadialField& g) {
  if (!f.grid || !g.grid) throw Error(ErrorKind::InvalidInput, "field without grid");
  if (f.grid != g.grid && !f.grid->same_as(*g.grid)) throw Error(ErrorKind::IncompatibleGrids, "fields live on different grids");
  if (f.two_component() != g.two_component()) throw Error(ErrorKind::IncompatibleGrids, "component count differs");
  return *f.grid;
}
}  // namespace

double inner(const RadialField& f, const RadialField& g) {
  const auto& grid = common_grid(f, g);
  double v = grid.inner(f.upper, g.upper);
  if (f.two_component()) v += grid.inner(f.lower, g.lower);
  return v;
}

double sigma_norm(const RadialField& f, double sigma) {
  if (!f.grid) throw Error(ErrorKind::InvalidInput, "field without grid");
  double a = f.grid->sigma_norm(f.upper, sigma);
  if (!f.two_component()) return a;
  double b = f.grid->sigma_norm(f.lower, sigma);
  return std::sqrt(a * a + b * b);
}

RadialField laplacian(const RadialField& f) {
  RadialField out{f.grid, f.grid->laplacian(f.upper), {}};
  if (f.two_component()) out.lower = f.grid->laplacian(f.lower);
  return out;
}

void write_field_csv(const std::string& path, const RadialGrid& grid, const CVec& u) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  os.precision(17);
  os << "r,re_u,im_u\n";
  for (int i = 0; i < grid.size(); ++i) os << grid.r()[i] << ',' << u[i].real() << ',' << u[i].imag() << '\n';
}

CVec read_field_csv(const std::string& path, const RadialGrid& grid) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  std::string line;
  std::getline(is, line);
  CVec u(grid.size());
  int i = 0;
  while (std::getline(is, line) && i < grid.size()) {
    std::istringstream ls(line);
    double r, re, im;
    char c1, c2;
    if (!(ls >> r >> c1 >> re >> c2 >> im)) throw Error(ErrorKind::Io, "malformed csv row in " + path);
    if (std::abs(r - grid.r()[i]) > 1e-9 * grid.R()) throw Error(ErrorKind::IncompatibleGrids, "csv radii do not match grid");
    u[i++] = cplx(re, im);
  }
  if (i != grid.size()) throw Error(ErrorKind::IncompatibleGrids, "csv row count differs from grid");
  return u;
}

namespace {
constexpr char kMagic[4] = {'R', 'P', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::string& buf, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get_le(const std::string& buf, size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw Error(ErrorKind::Io, "truncated field cache");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}
}  // namespace

void write_fields_binary(const std::string& path, std::uint64_t grid_hash, const std::vector<Vec>& fields) {
  std::string buf(kMagic, 4);
  put_le(buf, kVersion);
  put_le(buf, grid_hash);
  put_le(buf, static_cast<std::uint64_t>(fields.size()));
  std::uint64_t len = fields.empty() ? 0 : static_cast<std::uint64_t>(fields[0].size());
  put_le(buf, len);
  for (const auto& f : fields) {
    if (static_cast<std::uint64_t>(f.size()) != len) throw Error(ErrorKind::InvalidInput, "fields of unequal length");
    for (int i = 0; i < f.size(); ++i) put_le(buf, f[i]);
  }
  static std::atomic<unsigned> counter{0};
  std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + tmp);
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw Error(ErrorKind::Io, "short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<Vec> read_fields_binary(const std::string& path, std::uint64_t grid_hash) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || buf.compare(0, 4, std::string(kMagic, 4)) != 0) throw Error(ErrorKind::Io, "bad magic in " + path);
  size_t pos = 4;
  if (get_le<std::uint32_t>(buf, pos) != kVersion) throw Error(ErrorKind::Io, "unknown cache version in " + path);
  if (get_le<std::uint64_t>(buf, pos) != grid_hash) throw Error(ErrorKind::IncompatibleGrids, "cache grid hash mismatch");
  auto count = get_le<std::uint64_t>(buf, pos);
  auto len = get_le<std::uint64_t>(buf, pos);
  if (buf.size() != pos + count * len * 8) throw Error(ErrorKind::Io, "cache payload size mismatch in " + path);
  std::vector<Vec> out(count, Vec(len));
  for (auto& f : out)
    for (std::uint64_t i = 0; i < len; ++i) f[i] = get_le<double>(buf, pos);
  return out;
}

}  // namespace rpl
