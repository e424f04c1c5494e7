#include "bhnls/ground_state.hpp"

#include <algorithm>
#include <cmath>

#include "bhnls/nonlinearity.hpp"

namespace bhnls {

double ground_state_amplitude(int N) {
  const long double base = (long double)N * (N - 4) * ((long double)N * N - 4);
  return double(powl(base, (N - 4) / 8.0L));
}

double W_value(double r, int N, double lambda) {
  const long double amp = powl((long double)lambda, -0.5L * (N - 4));
  const long double x = (long double)r / lambda;
  return double(amp * ground_state_amplitude(N) * powl(1.0L + x * x, -0.5L * (N - 4)));
}

quad W_value_q(quad r, int N) {
  const quad base = (quad)N * (N - 4) * ((quad)N * N - 4);
  return powq(base, (N - 4) / quad(8.0)) * powq(quad(1.0) + r * r, -quad(0.5) * (N - 4));
}

quad LamW_value_q(quad r, int N) {
  const quad base = (quad)N * (N - 4) * ((quad)N * N - 4);
  return powq(base, (N - 4) / quad(8.0)) * quad(0.5) * (N - 4) * (quad(1.0) - r * r) *
         powq(quad(1.0) + r * r, -quad(0.5) * (N - 2));
}

ElResidual ground_state_residual(GridPtr grid, double r_lo, double r_hi) {
  const int N = grid->dim();
  const int n = grid->size();
  LaplacianOp lap(grid);
  std::vector<quad> W(n), tmp(n), L2(n);
  const auto& rq = grid->r_q();
  for (int i = 0; i < n; ++i) W[i] = W_value_q(rq[i], N);
  lap.apply<quad>(W, tmp);
  lap.apply<quad>(tmp, L2);
  ElResidual out;
  for (int i = 0; i < n; ++i) {
    const double r = grid->r()[i];
    if (r < r_lo || r > r_hi) continue;
    const quad rhs = powq(W[i], (N + quad(4.0)) / (N - quad(4.0)));
    const double rel = double(fabsq(L2[i] - rhs) / rhs);
    if (rel > out.max_rel) {
      out.max_rel = rel;
      out.at_r = r;
    }
  }
  return out;
}

double LamW_value(double r, int N, double lambda) {
  // Lambda W = (N-4)/2 (1-r^2)(1+r^2)^{-(N-2)/2} C_N, rescaled
  const long double amp = powl((long double)lambda, -0.5L * (N - 4));
  const long double x = (long double)r / lambda;
  return double(amp * ground_state_amplitude(N) * 0.5L * (N - 4) * (1.0L - x * x) *
                powl(1.0L + x * x, -0.5L * (N - 2)));
}

RadialField W_field(GridPtr grid, double lambda) {
  if (lambda <= 0.0) throw ConfigError("W_field: lambda must be positive");
  const int N = grid->dim();
  return sample_real(grid, [N, lambda](double r) { return W_value(r, N, lambda); });
}

RadialField LamW_field(GridPtr grid, double lambda) {
  if (lambda <= 0.0) throw ConfigError("LamW_field: lambda must be positive");
  const int N = grid->dim();
  return sample_real(grid, [N, lambda](double r) { return LamW_value(r, N, lambda); });
}

RadialField lambda_generator(double s, const RadialField& f, const LaplacianOp& lap) {
  RadialField out(f.grid);
  const auto df = lap.d_dr(f.v);
  const double c = 0.5 * f.grid->dim() - s;
  const auto& r = f.grid->r();
  for (int i = 0; i < f.size(); ++i) out.v[i] = c * f.v[i] + r[i] * df[i];
  return out;
}

RadialField lambda_generator(double s, const RadialField& f) {
  LaplacianOp lap(f.grid);
  return lambda_generator(s, f, lap);
}

EnergyBreakdown energy_report(const RadialField& u, const LaplacianOp& lap) {
  const int N = u.grid->dim();
  EnergyBreakdown out;
  RadialField du = lap.apply(u);
  const auto& w = u.grid->weights();
  const auto& r = u.grid->r();
  const double r_tail = 0.9 * u.grid->r_max();
  double kin = 0.0, pot = 0.0, kin_tail = 0.0, pot_tail = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double k = w[i] * std::norm(du.v[i]);
    const double p = w[i] * F_eval(u.v[i], N);
    kin += k;
    pot += p;
    if (r[i] > r_tail) {
      kin_tail += k;
      pot_tail += p;
    }
  }
  out.kinetic = 0.5 * kin;
  out.potential = pot;
  out.value = out.kinetic - out.potential;
  const double total = std::abs(out.kinetic) + std::abs(out.potential);
  out.tail_fraction = total > 0 ? (0.5 * kin_tail + pot_tail) / total : 0.0;
  out.tail_warning = out.tail_fraction > 1e-6;
  return out;
}

double energy(const RadialField& u, const LaplacianOp& lap) { return energy_report(u, lap).value; }

namespace {

struct ClosedForms {
  long double W_mass, C1, C2, I_bilap;  // I_bilap = int |Delta W|^2 = int W^{2N/(N-4)}
};

ClosedForms closed_forms(int N) {
  const long double CN = powl((long double)N * (N - 4) * ((long double)N * N - 4), (N - 4) / 8.0L);
  const long double S = sphere_area(N);
  ClosedForms cf;
  // ||W||^2            : exponent 2 * (N-4)/2      -> a = N-4
  cf.W_mass = CN * CN * S * radial_power_integral(N, (long double)(N - 4));
  // C1 = int W^{(N+4)/(N-4)} : a = (N+4)/2
  cf.C1 = powl(CN, (N + 4.0L) / (N - 4.0L)) * S * radial_power_integral(N, 0.5L * (N + 4));
  // int W^{2N/(N-4)}   : a = N
  cf.I_bilap = powl(CN, 2.0L * N / (N - 4.0L)) * S * radial_power_integral(N, (long double)N);
  // C2 = (N+4)/(N-4) int W^{8/(N-4)} Lambda W
  //    = (N+4)/2 * C_N^{(N+4)/(N-4)} * S * int_0^infty (1-r^2)(1+r^2)^{-(N+6)/2} r^{N-1} dr
  // and the two pieces are (1/2)B(N/2,3) and (1/2)B(N/2+1,2)
  const long double J = radial_power_integral(N, 0.5L * (N + 6)) - 0.5L * beta_fn(0.5L * N + 1.0L, 2.0L);
  cf.C2 = 0.5L * (N + 4) * powl(CN, (N + 4.0L) / (N - 4.0L)) * S * J;
  return cf;
}

}  // namespace

Constants constants_closed_form(int N) {
  if (N < 13) throw ConfigError("constants defined for N >= 13 (blow-up regime)");
  const auto cf = closed_forms(N);
  Constants c;
  c.N = N;
  c.C_N = ground_state_amplitude(N);
  c.W_mass = double(cf.W_mass);
  c.C1 = double(cf.C1);
  c.C2 = double(cf.C2);
  c.E_W = double(2.0L / N * cf.I_bilap);
  c.C_tilde = double(powl(4.0L * cf.W_mass / ((N - 12.0L) * cf.C1), 2.0L / (N - 12)));
  c.blowup_exponent = 2.0 / (N - 12);
  const long double c1eff = (long double)c.C_N * cf.C1;
  c.C1_eff = double(c1eff);
  c.C_tilde_eff = double(powl(4.0L * cf.W_mass / ((N - 12.0L) * c1eff), 2.0L / (N - 12)));
  return c;
}

Constants constants_compute(int N, GridPtr grid) {
  Constants c = constants_closed_form(N);
  if (!grid) return c;
  // quadrature cross-checks
  auto W = W_field(grid);
  auto LamW = LamW_field(grid);
  const auto& w = grid->weights();
  long double mass = 0.0L, c1 = 0.0L, c2 = 0.0L, bilap = 0.0L;
  const double p = crit_exponent(N);
  for (int i = 0; i < W.size(); ++i) {
    const double Wv = W.v[i].real();
    mass += (long double)(w[i] * Wv * Wv);
    c1 += (long double)(w[i] * std::pow(Wv, (N + 4.0) / (N - 4.0)));
    c2 += (long double)(w[i] * std::pow(Wv, p) * LamW.v[i].real());
    bilap += (long double)(w[i] * std::pow(Wv, 2.0 * N / (N - 4.0)));
  }
  c2 *= (N + 4.0) / (N - 4.0);
  auto check = [&](const char* name, long double quad, double stored) {
    const double rel = std::abs(double(quad) - stored) / std::abs(stored);
    if (rel > 1e-6)
      throw NumericError(std::string("constants: quadrature/closed-form mismatch for ") + name +
                         " (rel " + std::to_string(rel) + ")");
  };
  check("W_mass", mass, c.W_mass);
  check("C1", c1, c.C1);
  check("C2", c2, c.C2);
  check("E_W", 2.0L / N * bilap, c.E_W);
  return c;
}

SobolevReport sobolev_check(GridPtr grid, int samples, std::uint64_t seed) {
  const int N = grid->dim();
  LaplacianOp lap(grid);
  const double pcrit = 2.0 * N / (N - 4.0);
  auto ratio = [&](const RadialField& u) {
    RadialField du = lap.apply(u);
    const auto& w = grid->weights();
    double crit = 0.0, kin = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      crit += w[i] * std::pow(std::abs(u.v[i]), pcrit);
      kin += w[i] * std::norm(du.v[i]);
    }
    return std::pow(crit, 1.0 / pcrit) / std::sqrt(kin);
  };
  SobolevReport rep;
  auto W = W_field(grid);
  rep.ratio_W = ratio(W);
  {
    const auto& w = grid->weights();
    double crit = 0.0;
    for (int i = 0; i < W.size(); ++i) crit += w[i] * std::pow(std::abs(W.v[i]), pcrit);
    rep.critical_norm_W = std::pow(crit, 1.0 / pcrit);
  }
  Rng rng(seed, "sobolev");
  rep.best_ratio = 0.0;
  for (int t = 0; t < samples; ++t) {
    auto u = random_smooth_field(grid, rng);
    rep.best_ratio = std::max(rep.best_ratio, ratio(u));
  }
  // include a few deterministic profiles
  for (double a : {0.25, 1.0, 4.0}) {
    auto u = sample_real(grid, [a](double r) { return std::exp(-a * r * r); });
    rep.best_ratio = std::max(rep.best_ratio, ratio(u));
  }
  rep.best_ratio = std::max(rep.best_ratio, rep.ratio_W);
  return rep;
}

RadialField discrete_ground_state(GridPtr grid, double lambda, double tol) {
  // Newton on G(u) = Lap^2 u - u_+^{(N+4)/(N-4)} around the sampled profile.
  // The linearization is Lap^2 - (N+4)/(N-4) u^{8/(N-4)}, assembled banded.
  const int N = grid->dim();
  const int n = grid->size();
  LaplacianOp lap(grid);
  auto B = assemble_bilaplacian(lap);
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = W_value(grid->r()[i], N, lambda);

  const double kp = (N + 4.0) / (N - 4.0);
  std::vector<double> resid(n), du(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::pow(u[i], kp));
  for (int iter = 0; iter < 25; ++iter) {
    auto L2u = lap.bilaplacian(u);
    double rmax = 0.0;
    for (int i = 0; i < n; ++i) {
      const double up = std::max(u[i], 0.0);
      resid[i] = L2u[i] - std::pow(up, kp);
      rmax = std::max(rmax, std::abs(resid[i]));
    }
    if (rmax < tol * scale) break;
    BandedLU<double> lu;
    lu.factor(n, B.band, B.band, [&](int i, int j) {
      double v = B.get(i, j);
      if (i == j) v -= kp * std::pow(std::max(u[i], 0.0), kp - 1.0);
      return v;
    });
    du = resid;
    lu.solve(std::span<double>(du));
    // the linearization is nearly singular along the scaling direction; remove
    // that component so Newton does not slide to a rescaled profile
    std::vector<double> ker(n), y(n);
    for (int i = 0; i < n; ++i) ker[i] = LamW_value(grid->r()[i], N, lambda);
    y = ker;
    lu.solve(std::span<double>(y));
    const auto& w = grid->weights();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += w[i] * ker[i] * du[i];
      den += w[i] * ker[i] * y[i];
    }
    if (std::abs(den) > 1e-300) {
      const double mu = num / den;
      for (int i = 0; i < n; ++i) du[i] -= mu * y[i];
    }
    for (int i = 0; i < n; ++i) u[i] -= du[i];
  }
  RadialField out(grid);
  for (int i = 0; i < n; ++i) out.v[i] = u[i];
  return out;
}

}  // namespace bhnls
