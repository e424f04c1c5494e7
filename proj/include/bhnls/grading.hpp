#pragma once

// Node-distribution maps r = m(s), s in (0,1].  The map must be smooth to all
// orders and exactly evaluable (a noisy map wrecks high-order flux
// differencing), so the default grading is built from erf-based ramps with
// closed-form integrals.

#include <string>
#include <vector>

#include "bhnls/math_util.hpp"

namespace bhnls {

struct GradingSpec {
  enum class Kind { Default, Uniform, Rational };
  Kind kind = Kind::Default;
  double rational_stretch = 200.0;  // c in r = rmax*s/(1+c(1-s))
  static GradingSpec parse(const std::string& text);
  std::string describe() const;
};

// m(s) = scale * ( v0*s + sum_k q_k w_k^2 T((s-a_k)/w_k) ),  T = int int norm_cdf.
// Piecewise-linear velocity in s with smooth corners; C^infinity, closed form,
// odd near s=0 up to Gaussian tails (needed for parity ghosts at r=0).
class GradingMap {
 public:
  struct Ramp {
    long double q, a, w;
  };

  static GradingMap build(const GradingSpec& spec, double r_max);

  double r_max() const { return double(scale_ * raw_m(1.0L)); }
  double m(double s) const { return double(scale_ * raw_m(s)); }
  double mp(double s) const { return double(scale_ * raw_mp(s)); }
  double mpp(double s) const { return double(scale_ * raw_mpp(s)); }
  long double m_l(long double s) const { return scale_ * raw_m(s); }
  long double mp_l(long double s) const { return scale_ * raw_mp(s); }
  quad m_q(quad s) const;
  quad mp_q(quad s) const;
  // inverse map; r in [0, r_max]
  double s_of_r(double r) const;

 private:
  long double raw_m(long double s) const;
  long double raw_mp(long double s) const;
  long double raw_mpp(long double s) const;

  long double v0_ = 1.0L;
  long double scale_ = 1.0L;
  std::vector<Ramp> ramps_;
  bool rational_ = false;
  long double rational_c_ = 0.0L, rational_rmax_ = 0.0L;
};

}  // namespace bhnls
