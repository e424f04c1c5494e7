#pragma once

// Discrete differential operators on the radial grid.
//
// The Laplacian is the staggered flux form
//     (Lap u)_i = (1/a_i) D^T( b . D(E u) )_i
// with D the 10th-order staggered derivative (nodes -> flux points), E the
// parity/clamp extension, a and b the grid geometry.  By construction Lap is
// exactly symmetric w.r.t. the quadrature inner product and negative
// semidefinite; the bilaplacian is Lap applied twice, hence symmetric PSD.

#include <complex>
#include <span>
#include <vector>

#include "bhnls/radial_grid.hpp"

namespace bhnls {

enum class DiffOrder { Laplacian, Bilaplacian };

class LaplacianOp {
 public:
  explicit LaplacianOp(GridPtr grid);

  const RadialGrid& grid() const { return *grid_; }

  template <class T>
  void apply(std::span<const T> in, std::span<T> out) const;

  std::vector<double> apply(const std::vector<double>& in) const;
  std::vector<cplx> apply(const std::vector<cplx>& in) const;
  RadialField apply(const RadialField& f) const;

  std::vector<double> bilaplacian(const std::vector<double>& in) const;
  RadialField bilaplacian(const RadialField& f) const;

  // collocation laplacian d2/dr2 + (N-1)/r d/dr at the nodes: accurate at
  // every node (no measure division), not exactly symmetric; used for
  // pointwise diagnostics and quadratic-form assembly
  std::vector<double> pointwise_laplacian(const std::vector<double>& in) const;
  std::vector<cplx> pointwise_laplacian(const std::vector<cplx>& in) const;

  // first derivative d/dr at the nodes (node-centered 10th-order stencil)
  std::vector<double> d_dr(const std::vector<double>& in) const;
  std::vector<cplx> d_dr(const std::vector<cplx>& in) const;
  // second derivative d2/dr2 at the nodes
  std::vector<double> d2_dr2(const std::vector<double>& in) const;
  std::vector<cplx> d2_dr2(const std::vector<cplx>& in) const;

 private:
  GridPtr grid_;
  std::vector<quad> stag_;  // staggered half-offset coefficients c_1..c_5
  std::vector<double> cen1_;       // centered first-derivative coefficients d_1..d_5
  std::vector<double> cen2_;       // centered second-derivative coefficients e_0..e_5
};

RadialField differential_apply(DiffOrder op, const RadialField& f);

// ---- banded matrices (square, symmetric bandwidth kl = ku = band) ----

struct BandedMatrix {
  int n = 0, band = 0;
  // row-major: entry(i, i+k) = data[i*(2*band+1) + band + k], |k| <= band
  std::vector<double> data;

  BandedMatrix() = default;
  BandedMatrix(int n_, int band_) : n(n_), band(band_), data(std::size_t(n_) * (2 * band_ + 1), 0.0) {}
  double& at(int i, int j) { return data[std::size_t(i) * (2 * band + 1) + band + (j - i)]; }
  double get(int i, int j) const {
    if (j - i > band || i - j > band) return 0.0;
    return data[std::size_t(i) * (2 * band + 1) + band + (j - i)];
  }
  void matvec(std::span<const double> x, std::span<double> y) const;
  void matvec(std::span<const cplx> x, std::span<cplx> y) const;
};

// probe a banded linear operator into matrix form
BandedMatrix assemble_banded(int n, int band, const std::function<void(std::span<const double>, std::span<double>)>& apply);
BandedMatrix assemble_laplacian(const LaplacianOp& op);
BandedMatrix assemble_bilaplacian(const LaplacianOp& op);

// ---- banded LU with partial pivoting (real or complex) ----

template <class T>
class BandedLU {
 public:
  BandedLU() = default;
  // factor A where A.get(i,j) given through a dense-band accessor
  void factor(int n, int kl, int ku, const std::function<T(int, int)>& entry);
  void solve(std::span<T> rhs) const;
  int size() const { return n_; }

 private:
  int n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 0;
  std::vector<T> ab_;
  std::vector<int> piv_;
};

extern template class BandedLU<double>;
extern template class BandedLU<cplx>;

}  // namespace bhnls
