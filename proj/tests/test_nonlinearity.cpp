#include <doctest.h>

#include <cmath>

#include "bhnls/nonlinearity.hpp"

using namespace bhnls;

namespace {
constexpr int N = 13;
}

TEST_CASE("f at reference points") {
  CHECK(std::abs(f_eval(1.0, N) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(f_eval(cplx(0, 1), N) - cplx(0, 1)) < 1e-15);
  // f(2) = 2^{8/9} * 2 = 2^{17/9}
  const long double exact = powl(2.0L, 17.0L / 9.0L);
  CHECK(std::abs(f_eval(2.0, N).real() - double(exact)) < 1e-14 * double(exact));
  CHECK(std::abs(f_eval(0.0, N)) == 0.0);
}

TEST_CASE("F at reference points and directional derivative") {
  CHECK(F_eval(0.0, N) == 0.0);
  CHECK(std::abs(F_eval(1.0, N) - 9.0 / 26.0) < 1e-15);
  // d/dt F(z + t w)|_0 = Re(conj(f(z)) w)
  const cplx z(1.0, 1.0), w(1.0, 0.0);
  const double eps = 1e-6;
  const double fd = (F_eval(z + eps * w, N) - F_eval(z - eps * w, N)) / (2 * eps);
  const double exact = (std::conj(f_eval(z, N)) * w).real();
  CHECK(std::abs(fd - exact) < 1e-6 * std::abs(exact));
}

TEST_CASE("fprime reference values and finite differences") {
  CHECK(std::abs(fprime_apply(1.0, 1.0, N) - cplx(17.0 / 9.0)) < 1e-14);
  CHECK(std::abs(fprime_apply(1.0, cplx(0, 1), N) - cplx(0, 1)) < 1e-14);
  const cplx z(2.0, 1.0), z1(1.0, -1.0);
  const double eps = 1e-7;
  const cplx fd = (f_eval(z + eps * z1, N) - f_eval(z - eps * z1, N)) / (2 * eps);
  CHECK(std::abs(fd - fprime_apply(z, z1, N)) < 1e-6 * std::abs(fprime_apply(z, z1, N)));
  CHECK(std::abs(fprime_apply(0.0, z1, N)) == 0.0);
}

TEST_CASE("equivariance, homogeneity, gradient consistency") {
  Rng rng(11, "equivar");
  double worst_eq = 0.0, worst_hom = 0.0, worst_grad = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const cplx z = rng.log_uniform(0.1, 10.0) * rng.unit_phase();
    const cplx ph = rng.unit_phase();
    worst_eq = std::max(worst_eq, std::abs(f_eval(ph * z, N) - ph * f_eval(z, N)) / std::abs(f_eval(z, N)));
    const double tpos = rng.log_uniform(0.1, 10.0);
    const double hom = std::abs(f_eval(tpos * z, N) - std::pow(tpos, (N + 4.0) / (N - 4.0)) * f_eval(z, N));
    worst_hom = std::max(worst_hom, hom / std::abs(f_eval(tpos * z, N)));
    const cplx z1 = rng.log_uniform(0.1, 10.0) * rng.unit_phase();
    const double eps = 1e-6;
    const cplx fd = (f_eval(z + eps * z1, N) - f_eval(z - eps * z1, N)) / (2 * eps);
    worst_grad = std::max(worst_grad, std::abs(fd - fprime_apply(z, z1, N)) / std::abs(z1));
  }
  CHECK(worst_eq < 1e-12);
  CHECK(worst_hom < 1e-10);
  CHECK(worst_grad < 1e-5);
}

TEST_CASE("taylor-remainder validators: finite and sample-stable") {
  for (const char* id : kInequalityIds) {
    const auto r1 = taylor_bound_check(id, 100000, 42, N);
    const auto r2 = taylor_bound_check(id, 200000, 42, N);
    INFO("inequality ", std::string(id), " fitted ", r1.fitted_constant, " -> ", r2.fitted_constant);
    CHECK(std::isfinite(r1.fitted_constant));
    CHECK(r1.fitted_constant > 0.0);
    // doubling the sample count moves the fitted constant by < 10%
    CHECK(std::abs(r2.fitted_constant - r1.fitted_constant) < 0.10 * r1.fitted_constant);
  }
  CHECK_THROWS_AS(taylor_bound_check("nope", 10, 1, N), ConfigError);
  CHECK_THROWS_AS(taylor_bound_check("f-sum", 10, 1, 11), ConfigError);
}

TEST_CASE("second-order potential remainder vanishes for z2 = 0") {
  // remainder of the quadratic expansion is identically zero along z2 = 0
  for (double a : {0.3, 1.0, 4.0}) {
    const cplx z1(a, -0.5 * a);
    const cplx fz1 = f_eval(z1, N);
    const double lhs = std::abs(F_eval(z1, N) - F_eval(z1, N) - (std::conj(fz1) * cplx(0.0)).real());
    CHECK(lhs == 0.0);
  }
  // and along z1 = 1, z2 = it the quadratic term cancels the expansion to O(t^4)
  for (double t : {1e-2, 1e-3}) {
    const cplx z1 = 1.0, z2(0.0, t);
    const cplx fpz2 = fprime_apply(z1, z2, N);
    const double lhs = std::abs(F_eval(z1 + z2, N) - F_eval(z1, N) - (std::conj(f_eval(z1, N)) * z2).real() -
                                0.5 * (std::conj(fpz2) * z2).real());
    CHECK(lhs < 10.0 * t * t * t * t);
  }
}
