#include "bhnls/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

namespace bhnls {

double crit_exponent(int N) {
  if (N <= 4) throw ConfigError("nonlinearity defined for N > 4");
  return 8.0 / (N - 4);
}

cplx f_eval(cplx z, int N) {
  const double az = std::abs(z);
  if (az == 0.0) return 0.0;
  return std::pow(az, crit_exponent(N)) * z;
}

double F_eval(cplx z, int N) {
  const double az = std::abs(z);
  if (az == 0.0) return 0.0;
  return (N - 4.0) / (2.0 * N) * std::pow(az, 2.0 * N / (N - 4.0));
}

cplx fprime_apply(cplx z, cplx z1, int N) {
  const double az = std::abs(z);
  if (az == 0.0) return 0.0;  // f is C^1 at 0 for N >= 13 (exponent < 1)
  const double p = crit_exponent(N);
  return std::pow(az, p) * (z1 + p * z * ((z1 / z).real()));
}

namespace {
// real 2x2 matrix of the real-linear map w -> f'(z) w, columns f'(z)1, f'(z)i
struct Mat2 {
  double a11, a12, a21, a22;
};
Mat2 fprime_matrix(cplx z, int N) {
  const cplx c1 = fprime_apply(z, 1.0, N);
  const cplx ci = fprime_apply(z, cplx(0.0, 1.0), N);
  return {c1.real(), ci.real(), c1.imag(), ci.imag()};
}
double spectral_norm(const Mat2& m) {
  // largest singular value of a 2x2 matrix, closed form
  const double a = m.a11, b = m.a12, c = m.a21, d = m.a22;
  const double f = a * a + b * b + c * c + d * d;
  const double g = std::hypot(a * a + b * b - c * c - d * d, 2.0 * (a * c + b * d));
  return std::sqrt(0.5 * (f + g));
}
}  // namespace

double fprime_norm(cplx z, int N) {
  // attained along z: |f'(z)| = (1 + p)|z|^p
  const double az = std::abs(z);
  if (az == 0.0) return 0.0;
  return (1.0 + crit_exponent(N)) * std::pow(az, crit_exponent(N));
}

double fprime_diff_norm(cplx za, cplx zb, int N) {
  const Mat2 ma = fprime_matrix(za, N), mb = fprime_matrix(zb, N);
  return spectral_norm({ma.a11 - mb.a11, ma.a12 - mb.a12, ma.a21 - mb.a21, ma.a22 - mb.a22});
}

InequalityReport taylor_bound_check(const std::string& id, long n_samples, std::uint64_t seed, int N) {
  int which = -1;
  for (std::size_t k = 0; k < kInequalityIds.size(); ++k)
    if (id == kInequalityIds[k]) which = int(k);
  if (which < 0) throw ConfigError("unknown inequality id '" + id + "'");
  if (N < 13) throw ConfigError("Taylor-bound validators require N >= 13");

  const double ratio_exp = -(N - 12.0) / (N - 4.0);
  Rng rng(seed, "ineq:" + id);
  InequalityReport rep;
  rep.inequality_id = id;
  rep.n_samples = n_samples;

  for (long t = 0; t < n_samples; ++t) {
    const cplx z1 = rng.log_uniform(1e-4, 1e4) * rng.unit_phase();
    cplx z2 = rng.log_uniform(1e-4, 1e4) * rng.unit_phase();
    if (t % 8 == 0) {
      // the suprema of several bounds sit on the cancellation corner
      // z1 + z2 ~ 0, which plain log-uniform sampling finds very slowly
      z2 = -z1 * (1.0 + rng.log_uniform(1e-6, 1.0) * rng.unit_phase());
    }
    double lhs = 0.0, rhs = 0.0;
    switch (which) {
      case 0:  // fp-sum
        lhs = fprime_diff_norm(z1 + z2, z1, N);
        rhs = fprime_norm(z2, N);
        break;
      case 1:  // fp-ratio, z1 != 0 by sampling
        lhs = fprime_diff_norm(z1 + z2, z1, N);
        rhs = std::pow(std::abs(z1), ratio_exp) * std::abs(z2);
        break;
      case 2:  // f-sum
        lhs = std::abs(f_eval(z1 + z2, N) - f_eval(z1, N));
        rhs = fprime_norm(z1, N) * std::abs(z2) + std::abs(f_eval(z2, N));
        break;
      case 3:  // f-lin
        lhs = std::abs(f_eval(z1 + z2, N) - f_eval(z1, N) - fprime_apply(z1, z2, N));
        rhs = std::abs(f_eval(z2, N));
        break;
      case 4:  // f-lin-ratio, z1 != 0
        lhs = std::abs(f_eval(z1 + z2, N) - f_eval(z1, N) - fprime_apply(z1, z2, N));
        rhs = std::pow(std::abs(z1), ratio_exp) * std::norm(z2);
        break;
      case 5: {  // F-first
        const cplx fz1 = f_eval(z1, N);
        lhs = std::abs(F_eval(z1 + z2, N) - F_eval(z1, N) - (std::conj(fz1) * z2).real());
        rhs = fprime_norm(z1, N) * std::norm(z2) + F_eval(z2, N);
        break;
      }
      case 6: {  // F-second
        const cplx fz1 = f_eval(z1, N);
        const cplx fpz2 = fprime_apply(z1, z2, N);
        lhs = std::abs(F_eval(z1 + z2, N) - F_eval(z1, N) - (std::conj(fz1) * z2).real() -
                       0.5 * (std::conj(fpz2) * z2).real());
        rhs = F_eval(z2, N);
        break;
      }
    }
    if (rhs <= 0.0) {
      if (lhs > 1e-14) throw NumericError("taylor bound: vanishing RHS with nonzero LHS");
      continue;
    }
    const double q = lhs / rhs;
    if (q > rep.fitted_constant) {
      rep.fitted_constant = q;
      rep.worst_z1 = z1;
      rep.worst_z2 = z2;
    }
  }
  if (!(rep.fitted_constant > 0.0) || !std::isfinite(rep.fitted_constant))
    throw NumericError("taylor bound '" + id + "': degenerate fitted constant");
  return rep;
}

}  // namespace bhnls
