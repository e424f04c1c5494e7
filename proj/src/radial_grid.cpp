#include "bhnls/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace bhnls {

GridPtr RadialGrid::build(int dim, double r_max, int n_nodes, const GradingSpec& grading) {
  if (dim < 5) throw ConfigError("dimension must be at least 5, got " + std::to_string(dim));
  if (r_max <= 0.0) throw ConfigError("r_max must be positive, got " + std::to_string(r_max));
  if (n_nodes < 64) throw ConfigError("n_nodes must be at least 64, got " + std::to_string(n_nodes));

  auto g = std::shared_ptr<RadialGrid>(new RadialGrid());
  g->dim_ = dim;
  g->n_ = n_nodes;
  g->h_ = 1.0 / (n_nodes + 0.5);
  g->map_ = GradingMap::build(grading, r_max);
  g->r_max_ = g->map_.r_max();
  g->surface_ = double(sphere_area(dim));

  const int n = n_nodes;
  const quad h = quad(1.0) / (n + quad(0.5));
  g->s_.resize(n);
  g->r_.resize(n);
  g->a_.resize(n);
  g->w_.resize(n);
  g->b_.resize(n + 1);
  g->r_q_.resize(n);
  g->a_q_.resize(n);
  g->b_q_.resize(n + 1);
  for (int i = 0; i < n; ++i) {
    const quad s = (i + quad(0.5)) * h;
    g->s_[i] = double(s);
    const quad r = g->map_.m_q(s);
    const quad mp = g->map_.mp_q(s);
    const quad a = powq(r, dim - 1) * mp;
    g->r_q_[i] = r;
    g->a_q_[i] = a;
    g->r_[i] = double(r);
    g->a_[i] = double(a);
    g->w_[i] = double((quad)g->surface_ * a * h);
  }
  g->b_[0] = 0.0;  // flux at r = 0 vanishes with the measure
  g->b_q_[0] = quad(0.0);
  for (int j = 1; j <= n; ++j) {
    const quad s = j * h;
    const quad r = g->map_.m_q(s);
    const quad mp = g->map_.mp_q(s);
    g->b_q_[j] = powq(r, dim - 1) / mp;
    g->b_[j] = double(g->b_q_[j]);
  }
  return g;
}

template <class T>
T RadialGrid::interp_impl(const std::vector<T>& values, double r) const {
  if (r >= r_max_) return T(0);
  if (r < 0.0) r = -r;
  const double s = map_.s_of_r(r);
  // 8-point Lagrange in s on nodes s_i = (i+0.5)h (0-based), parity at origin
  const double pos = s / h_ - 0.5;  // fractional 0-based node index
  int i0 = int(std::floor(pos)) - 3;
  i0 = std::clamp(i0, -4, n_ - 8);  // allow reach into mirrored nodes
  T num{};
  double den_check = 0.0;
  double lag[8];
  double prod = 1.0;
  for (int k = 0; k < 8; ++k) {
    lag[k] = 1.0;
    for (int m = 0; m < 8; ++m) {
      if (m == k) continue;
      lag[k] *= (pos - (i0 + m)) / double(k - m);
    }
  }
  (void)prod;
  for (int k = 0; k < 8; ++k) {
    int idx = i0 + k;
    if (idx < 0) idx = -1 - idx;  // parity: node -1-idx mirrors idx (s_{-1-i} = -s_i)
    T val = (idx < n_) ? values[idx] : T(0);
    num += lag[k] * val;
    den_check += lag[k];
  }
  (void)den_check;
  return num;
}

double RadialGrid::interpolate(const std::vector<double>& values, double r) const {
  return interp_impl(values, r);
}
cplx RadialGrid::interpolate(const std::vector<cplx>& values, double r) const {
  return interp_impl(values, r);
}

bool RadialField::finite() const {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

RadialField& RadialField::operator+=(const RadialField& o) {
  for (int i = 0; i < size(); ++i) v[i] += o.v[i];
  return *this;
}
RadialField& RadialField::operator-=(const RadialField& o) {
  for (int i = 0; i < size(); ++i) v[i] -= o.v[i];
  return *this;
}
RadialField& RadialField::operator*=(cplx c) {
  for (auto& z : v) z *= c;
  return *this;
}
RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
RadialField operator*(cplx c, RadialField a) { return a *= c; }

cplx integrate(const RadialField& f) {
  const auto& w = f.grid->weights();
  cplx acc = 0.0;
  for (int i = 0; i < f.size(); ++i) acc += w[i] * f.v[i];
  return acc;
}

double integrate(const RadialGrid& g, const std::vector<double>& vals) {
  const auto& w = g.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) acc += w[i] * vals[i];
  return acc;
}

double inner(const RadialField& v, const RadialField& w) {
  if (v.grid.get() != w.grid.get()) throw NumericError("inner: fields on different grids");
  const auto& wt = v.grid->weights();
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i)
    acc += wt[i] * (v.v[i].real() * w.v[i].real() + v.v[i].imag() * w.v[i].imag());
  return acc;
}

double norm_l2(const RadialField& v) { return std::sqrt(inner(v, v)); }

RadialField sample(GridPtr g, const std::function<cplx(double)>& f) {
  RadialField out(g);
  const auto& r = g->r();
  for (int i = 0; i < out.size(); ++i) out.v[i] = f(r[i]);
  return out;
}

RadialField sample_real(GridPtr g, const std::function<double(double)>& f) {
  RadialField out(g);
  const auto& r = g->r();
  for (int i = 0; i < out.size(); ++i) out.v[i] = f(r[i]);
  return out;
}

RadialField rescale(const RadialField& f, double lambda) {
  if (lambda <= 0.0) throw ConfigError("rescale: lambda must be positive");
  RadialField out(f.grid);
  const int N = f.grid->dim();
  const double amp = std::pow(lambda, -0.5 * (N - 4));
  const auto& r = f.grid->r();
  for (int i = 0; i < out.size(); ++i) out.v[i] = amp * f.grid->interpolate(f.v, r[i] / lambda);
  return out;
}

RadialField random_smooth_field(GridPtr g, Rng& rng, bool complex_valued, double scale) {
  RadialField out(g);
  const auto& r = g->r();
  const int n_bumps = 6;
  for (int b = 0; b < n_bumps; ++b) {
    const double amp = rng.uniform(-1.0, 1.0);
    const double width = rng.uniform(0.35, 2.5);
    const double center = rng.uniform(0.0, 5.0);
    const cplx phase = complex_valued ? rng.unit_phase() : cplx(1.0, 0.0);
    for (int i = 0; i < out.size(); ++i) {
      // even bump: depends on r^2 only, so the radial extension stays smooth
      const double d2 = (r[i] * r[i] - center * center);
      out.v[i] += phase * (amp * std::exp(-d2 * d2 / std::pow(width * (center + 1.0), 4)) *
                           std::exp(-0.05 * r[i] * r[i]));
    }
  }
  const double nrm = norm_l2(out);
  if (nrm > 0) out *= cplx(scale / nrm, 0.0);
  return out;
}

}  // namespace bhnls
