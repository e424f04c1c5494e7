#include "bhnls/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace bhnls {

namespace {

// solve the small Vandermonde systems for the stencil weights in long double
std::vector<quad> solve_weights_qv(int K, bool staggered, int deriv_order) {
  // staggered: offsets x_i = i - 1/2 (i = 1..K), antisymmetric first derivative:
  //   sum_i 2 c_i x_i^{2k+1} = delta_{k0}, k = 0..K-1
  // centered first derivative: offsets i = 1..K, same structure.
  // centered second derivative handled separately (deriv_order == 2).
  (void)deriv_order;
  const int M = K;
  std::vector<quad> A(std::size_t(M) * M), rhs(M, quad(0.0));
  for (int k = 0; k < M; ++k)
    for (int i = 0; i < M; ++i) {
      const quad x = staggered ? (i + quad(0.5)) : (i + quad(1.0));
      A[std::size_t(k) * M + i] = quad(2.0) * powq(x, 2 * k + 1);
    }
  rhs[0] = quad(1.0);
  // gaussian elimination
  for (int col = 0; col < M; ++col) {
    int p = col;
    for (int rI = col + 1; rI < M; ++rI)
      if (fabsl(A[std::size_t(rI) * M + col]) > fabsl(A[std::size_t(p) * M + col])) p = rI;
    for (int j = 0; j < M; ++j) std::swap(A[std::size_t(col) * M + j], A[std::size_t(p) * M + j]);
    std::swap(rhs[col], rhs[p]);
    for (int rI = col + 1; rI < M; ++rI) {
      const long double f = A[std::size_t(rI) * M + col] / A[std::size_t(col) * M + col];
      for (int j = col; j < M; ++j) A[std::size_t(rI) * M + j] -= f * A[std::size_t(col) * M + j];
      rhs[rI] -= f * rhs[col];
    }
  }
  std::vector<quad> out(M);
  for (int i = M - 1; i >= 0; --i) {
    quad acc = rhs[i];
    for (int j = i + 1; j < M; ++j) acc -= A[std::size_t(i) * M + j] * out[j];
    out[i] = acc / A[std::size_t(i) * M + i];
  }
  return out;
}

std::vector<double> solve_weights(int K, bool staggered, int deriv_order) {
  auto l = solve_weights_qv(K, staggered, deriv_order);
  std::vector<double> out(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) out[i] = double(l[i]);
  return out;
}

// centered second-derivative weights: f''(0) ~ (e0 f0 + sum_i e_i (f_i + f_{-i}))/h^2
std::vector<double> solve_second_weights(int K) {
  const int M = K + 1;  // unknowns e_0..e_K; exactness on x^0, x^2, ..., x^{2K}
  std::vector<long double> A(std::size_t(M) * M), rhs(M, 0.0L);
  for (int k = 0; k < M; ++k) {
    A[std::size_t(k) * M + 0] = (k == 0) ? 1.0L : 0.0L;
    for (int i = 1; i <= K; ++i) A[std::size_t(k) * M + i] = 2.0L * powl((long double)i, 2 * k);
    rhs[k] = (k == 1) ? 2.0L : 0.0L;  // d2 of x^2 is 2
  }
  for (int col = 0; col < M; ++col) {
    int p = col;
    for (int rI = col + 1; rI < M; ++rI)
      if (fabsl(A[std::size_t(rI) * M + col]) > fabsl(A[std::size_t(p) * M + col])) p = rI;
    for (int j = 0; j < M; ++j) std::swap(A[std::size_t(col) * M + j], A[std::size_t(p) * M + j]);
    std::swap(rhs[col], rhs[p]);
    for (int rI = col + 1; rI < M; ++rI) {
      const long double f = A[std::size_t(rI) * M + col] / A[std::size_t(col) * M + col];
      for (int j = col; j < M; ++j) A[std::size_t(rI) * M + j] -= f * A[std::size_t(col) * M + j];
      rhs[rI] -= f * rhs[col];
    }
  }
  std::vector<double> out(M);
  for (int i = M - 1; i >= 0; --i) {
    long double acc = rhs[i];
    for (int j = i + 1; j < M; ++j) acc -= A[std::size_t(i) * M + j] * (long double)out[j];
    out[i] = double(acc / A[std::size_t(i) * M + i]);
  }
  return out;
}

constexpr int KSTAG = 5;  // 10th-order staggered
constexpr int KCEN = 5;   // 10th-order centered

}  // namespace

LaplacianOp::LaplacianOp(GridPtr grid) : grid_(std::move(grid)) {
  stag_ = solve_weights_qv(KSTAG, true, 1);
  cen1_ = solve_weights(KCEN, false, 1);
  cen2_ = solve_second_weights(KCEN);
}

template <class T>
void LaplacianOp::apply(std::span<const T> in, std::span<T> out) const {
  const int n = grid_->size();
  const double h = grid_->h();
  constexpr bool extended = std::is_same_v<T, quad>;
  const auto& b = [&]() -> decltype(auto) {
    if constexpr (extended)
      return grid_->flux_coef_q();
    else
      return grid_->flux_coef();
  }();
  const auto& a = [&]() -> decltype(auto) {
    if constexpr (extended)
      return grid_->density_q();
    else
      return grid_->density();
  }();

  // Nodes are 1-based at s = (i-1/2)h, fluxes at s = jh (j = 1..n; the flux at
  // r = 0 carries zero weight).  Flux j pairs nodes (j+k, j-k+1), k = 1..K.
  static thread_local std::vector<T> phi;
  phi.assign(n + 1, T(0));
  auto node = [&](int i) -> T {
    if (i >= 1 && i <= n) return in[i - 1];
    if (i < 1) return in[-i];  // parity: u_{1-i} at s_{1-i} = -s_i
    return T(0);               // Dirichlet clamp beyond r_max
  };
  for (int j = 1; j <= n; ++j) {
    T acc{};
    for (int k = 1; k <= KSTAG; ++k) acc += T(stag_[k - 1]) * (node(j + k) - node(j - k + 1));
    phi[j] = T(b[j] / h) * acc;
  }
  for (int i = 0; i < n; ++i) out[i] = T(0);
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= KSTAG; ++k) {
      const T contrib = T(stag_[k - 1] / h) * phi[j];
      const int ip = j + k;      // receives +c_k
      const int im = j - k + 1;  // receives -c_k
      if (ip <= n) out[ip - 1] += contrib;
      if (im >= 1)
        out[im - 1] -= contrib;
      else
        out[-im] -= contrib;  // fold onto the mirror node 1-im (0-based -im)
    }
  }
  for (int i = 0; i < n; ++i) out[i] = -out[i] / T(a[i]);
}

template void LaplacianOp::apply<double>(std::span<const double>, std::span<double>) const;
template void LaplacianOp::apply<cplx>(std::span<const cplx>, std::span<cplx>) const;
template void LaplacianOp::apply<quad>(std::span<const quad>, std::span<quad>) const;

std::vector<double> LaplacianOp::apply(const std::vector<double>& in) const {
  std::vector<double> out(in.size());
  apply<double>(in, out);
  return out;
}
std::vector<cplx> LaplacianOp::apply(const std::vector<cplx>& in) const {
  std::vector<cplx> out(in.size());
  apply<cplx>(in, out);
  return out;
}
RadialField LaplacianOp::apply(const RadialField& f) const {
  RadialField out(f.grid);
  apply<cplx>(f.v, out.v);
  return out;
}
std::vector<double> LaplacianOp::bilaplacian(const std::vector<double>& in) const {
  return apply(apply(in));
}
RadialField LaplacianOp::bilaplacian(const RadialField& f) const { return apply(apply(f)); }

namespace {
template <class T>
std::vector<T> d_dr_impl(const RadialGrid& g, const std::vector<double>& cen, const std::vector<T>& in,
                         bool second, const std::vector<double>& cen2) {
  const int n = g.size();
  const double h = g.h();
  std::vector<T> out(n);
  auto node = [&](int i) -> T {  // 1-based with parity/clamp
    if (i >= 1 && i <= n) return in[i - 1];
    if (i < 1) return in[-i];
    return T(0);
  };
  for (int i = 1; i <= n; ++i) {
    const double mp = g.map().mp(g.s()[i - 1]);
    if (!second) {
      T acc{};
      for (int k = 1; k <= KCEN; ++k) acc += T(cen[k - 1]) * (node(i + k) - node(i - k));
      out[i - 1] = acc / T(h * mp);
    } else {
      // d2/ds2 then chain rule: u_rr = (u_ss - u_r m'') / m'^2
      T acc = T(cen2[0]) * node(i);
      for (int k = 1; k <= KCEN; ++k) acc += T(cen2[k]) * (node(i + k) + node(i - k));
      T us{};
      for (int k = 1; k <= KCEN; ++k) us += T(cen[k - 1]) * (node(i + k) - node(i - k));
      const double mpp = g.map().mpp(g.s()[i - 1]);
      out[i - 1] = (acc / T(h * h) - (us / T(h)) * T(mpp / mp)) / T(mp * mp);
    }
  }
  return out;
}
}  // namespace

namespace {
template <class T>
std::vector<T> pointwise_lap_impl(const RadialGrid& g, const LaplacianOp& op,
                                  const std::vector<T>& in) {
  auto d1 = op.d_dr(in);
  auto d2 = op.d2_dr2(in);
  const int N = g.dim();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = d2[i] + T((N - 1) / g.r()[i]) * d1[i];
  return out;
}
}  // namespace

std::vector<double> LaplacianOp::pointwise_laplacian(const std::vector<double>& in) const {
  return pointwise_lap_impl(*grid_, *this, in);
}
std::vector<cplx> LaplacianOp::pointwise_laplacian(const std::vector<cplx>& in) const {
  return pointwise_lap_impl(*grid_, *this, in);
}

std::vector<double> LaplacianOp::d_dr(const std::vector<double>& in) const {
  return d_dr_impl(*grid_, cen1_, in, false, cen2_);
}
std::vector<cplx> LaplacianOp::d_dr(const std::vector<cplx>& in) const {
  return d_dr_impl(*grid_, cen1_, in, false, cen2_);
}
std::vector<double> LaplacianOp::d2_dr2(const std::vector<double>& in) const {
  return d_dr_impl(*grid_, cen1_, in, true, cen2_);
}
std::vector<cplx> LaplacianOp::d2_dr2(const std::vector<cplx>& in) const {
  return d_dr_impl(*grid_, cen1_, in, true, cen2_);
}

RadialField differential_apply(DiffOrder op, const RadialField& f) {
  LaplacianOp lap(f.grid);
  return op == DiffOrder::Laplacian ? lap.apply(f) : lap.bilaplacian(f);
}

void BandedMatrix::matvec(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const int lo = std::max(0, i - band), hi = std::min(n - 1, i + band);
    const double* row = &data[std::size_t(i) * (2 * band + 1) + band - i];
    for (int j = lo; j <= hi; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}
void BandedMatrix::matvec(std::span<const cplx> x, std::span<cplx> y) const {
  for (int i = 0; i < n; ++i) {
    cplx acc = 0.0;
    const int lo = std::max(0, i - band), hi = std::min(n - 1, i + band);
    const double* row = &data[std::size_t(i) * (2 * band + 1) + band - i];
    for (int j = lo; j <= hi; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

BandedMatrix assemble_banded(int n, int band,
                             const std::function<void(std::span<const double>, std::span<double>)>& apply) {
  BandedMatrix M(n, band);
  const int stride = 2 * band + 1;
  std::vector<double> e(n), y(n);
  for (int c = 0; c < stride; ++c) {
    std::fill(e.begin(), e.end(), 0.0);
    for (int j = c; j < n; j += stride) e[j] = 1.0;
    apply(e, y);
    for (int j = c; j < n; j += stride)
      for (int i = std::max(0, j - band); i <= std::min(n - 1, j + band); ++i) M.at(i, j) = y[i];
  }
  return M;
}

BandedMatrix assemble_laplacian(const LaplacianOp& op) {
  const int n = op.grid().size();
  return assemble_banded(n, 2 * KSTAG - 1, [&](std::span<const double> x, std::span<double> y) {
    op.apply<double>(x, y);
  });
}
BandedMatrix assemble_bilaplacian(const LaplacianOp& op) {
  const int n = op.grid().size();
  return assemble_banded(n, 2 * (2 * KSTAG - 1), [&](std::span<const double> x, std::span<double> y) {
    std::vector<double> tmp(x.size());
    op.apply<double>(x, tmp);
    op.apply<double>(tmp, y);
  });
}

template <class T>
void BandedLU<T>::factor(int n, int kl, int ku, const std::function<T(int, int)>& entry) {
  n_ = n;
  kl_ = kl;
  ku_ = ku;
  ldab_ = 2 * kl + ku + 1;
  ab_.assign(std::size_t(ldab_) * n, T(0));
  piv_.assign(n, 0);
  // LAPACK-style band storage: ab[kl+ku+i-j + j*ldab] = A(i,j)
  auto AB = [&](int i, int j) -> T& { return ab_[std::size_t(j) * ldab_ + (kl_ + ku_ + i - j)]; };
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i) AB(i, j) = entry(i, j);

  const int kv = kl + ku;
  for (int j = 0; j < n; ++j) {
    const int km = std::min(kl, n - 1 - j);
    int p = j;
    double best = std::abs(AB(j, j));
    for (int i = j + 1; i <= j + km; ++i) {
      const double mag = std::abs(AB(i, j));
      if (mag > best) {
        best = mag;
        p = i;
      }
    }
    piv_[j] = p;
    if (best == 0.0) throw NumericError("banded LU: singular matrix at column " + std::to_string(j));
    const int jend = std::min(n - 1, j + kv);
    if (p != j)
      for (int c = j; c <= jend; ++c) std::swap(ab_[std::size_t(c) * ldab_ + (kl_ + ku_ + j - c)],
                                                ab_[std::size_t(c) * ldab_ + (kl_ + ku_ + p - c)]);
    const T pivval = AB(j, j);
    for (int i = j + 1; i <= j + km; ++i) {
      const T m = AB(i, j) / pivval;
      AB(i, j) = m;
      for (int c = j + 1; c <= jend; ++c) AB(i, c) -= m * AB(j, c);
    }
  }
}

template <class T>
void BandedLU<T>::solve(std::span<T> rhs) const {
  auto AB = [&](int i, int j) -> const T& { return ab_[std::size_t(j) * ldab_ + (kl_ + ku_ + i - j)]; };
  const int n = n_;
  for (int j = 0; j < n; ++j) {
    if (piv_[j] != j) std::swap(rhs[j], rhs[piv_[j]]);
    const int km = std::min(kl_, n - 1 - j);
    for (int i = j + 1; i <= j + km; ++i) rhs[i] -= AB(i, j) * rhs[j];
  }
  for (int j = n - 1; j >= 0; --j) {
    rhs[j] /= AB(j, j);
    const int lo = std::max(0, j - kl_ - ku_);
    for (int i = lo; i < j; ++i) rhs[i] -= AB(i, j) * rhs[j];
  }
}

template class BandedLU<double>;
template class BandedLU<cplx>;

}  // namespace bhnls
