#pragma once

// The focusing critical nonlinearity f(z) = |z|^{8/(N-4)} z, its potential
// F(z) = (N-4)/(2N) |z|^{2N/(N-4)}, the real-linear derivative f', and
// randomized validators for the Taylor-remainder bounds used throughout the
// modulation estimates.

#include <array>
#include <string>

#include "bhnls/math_util.hpp"

namespace bhnls {

double crit_exponent(int N);  // p = 8/(N-4)

cplx f_eval(cplx z, int N);
double F_eval(cplx z, int N);

// action of the real-linear derivative: f'(z) z1
cplx fprime_apply(cplx z, cplx z1, int N);

// operator norm of f'(z) as a real-linear map C -> C
double fprime_norm(cplx z, int N);
// operator norm of f'(za) - f'(zb)
double fprime_diff_norm(cplx za, cplx zb, int N);

// Taylor-remainder inequalities.  Ids name what each bound controls:
//   fp-sum        |f'(z1+z2)-f'(z1)|        <= C |f'(z2)|
//   fp-ratio      |f'(z1+z2)-f'(z1)|        <= C |z1|^{-(N-12)/(N-4)} |z2|      (z1 != 0)
//   f-sum         |f(z1+z2)-f(z1)|          <= C (|f'(z1)||z2| + |f(z2)|)
//   f-lin         |f(z1+z2)-f(z1)-f'(z1)z2| <= C |f(z2)|
//   f-lin-ratio   same LHS                  <= C |z1|^{-(N-12)/(N-4)} |z2|^2    (z1 != 0)
//   F-first       |F(z1+z2)-F(z1)-Re(conj(f(z1))z2)| <= C (|f'(z1)||z2|^2 + F(z2))
//   F-second      |... - (1/2)Re(conj(f'(z1)z2)z2)|  <= C F(z2)
inline constexpr std::array<const char*, 7> kInequalityIds = {
    "fp-sum", "fp-ratio", "f-sum", "f-lin", "f-lin-ratio", "F-first", "F-second"};

struct InequalityReport {
  std::string inequality_id;
  long n_samples = 0;
  double fitted_constant = 0.0;  // max over samples of LHS/RHS
  cplx worst_z1, worst_z2;
};

InequalityReport taylor_bound_check(const std::string& inequality_id, long n_samples,
                                    std::uint64_t seed, int N = 13);

}  // namespace bhnls
