#include "bhnls/grading.hpp"

#include <algorithm>
#include <cmath>

namespace bhnls {

GradingSpec GradingSpec::parse(const std::string& text) {
  GradingSpec g;
  if (text.empty() || text == "default") {
    g.kind = Kind::Default;
  } else if (text == "uniform") {
    g.kind = Kind::Uniform;
  } else if (text.rfind("rational", 0) == 0) {
    g.kind = Kind::Rational;
    auto pos = text.find(':');
    if (pos != std::string::npos) g.rational_stretch = std::stod(text.substr(pos + 1));
  } else {
    throw ConfigError("unknown grading '" + text + "' (expected default|uniform|rational[:c])");
  }
  return g;
}

std::string GradingSpec::describe() const {
  switch (kind) {
    case Kind::Default: return "default";
    case Kind::Uniform: return "uniform";
    case Kind::Rational: return "rational:" + std::to_string(rational_stretch);
  }
  return "?";
}

long double GradingMap::raw_m(long double s) const {
  if (rational_) return rational_rmax_ * s / (1.0L + rational_c_ * (1.0L - s));
  long double out = v0_ * s;
  for (const auto& rp : ramps_) out += rp.q * rp.w * rp.w * erf_softplus_int((s - rp.a) / rp.w);
  return out;
}

long double GradingMap::raw_mp(long double s) const {
  if (rational_) {
    const long double d = 1.0L + rational_c_ * (1.0L - s);
    return rational_rmax_ * (1.0L + rational_c_) / (d * d);
  }
  long double out = v0_;
  for (const auto& rp : ramps_) out += rp.q * rp.w * erf_softplus((s - rp.a) / rp.w);
  return out;
}

long double GradingMap::raw_mpp(long double s) const {
  if (rational_) {
    const long double d = 1.0L + rational_c_ * (1.0L - s);
    return 2.0L * rational_rmax_ * (1.0L + rational_c_) * rational_c_ / (d * d * d);
  }
  long double out = 0.0L;
  for (const auto& rp : ramps_) out += rp.q * norm_cdf((s - rp.a) / rp.w);
  return out;
}

quad GradingMap::m_q(quad s) const {
  if (rational_) {
    const quad d = quad(1.0) + (quad)rational_c_ * (quad(1.0) - s);
    return (quad)rational_rmax_ * s / d;
  }
  quad out = (quad)v0_ * s;
  for (const auto& rp : ramps_) {
    const quad w = (quad)rp.w;
    out += (quad)rp.q * w * w * erf_softplus_int_q((s - (quad)rp.a) / w);
  }
  return (quad)scale_ * out;
}

quad GradingMap::mp_q(quad s) const {
  if (rational_) {
    const quad d = quad(1.0) + (quad)rational_c_ * (quad(1.0) - s);
    return (quad)rational_rmax_ * (quad(1.0) + (quad)rational_c_) / (d * d);
  }
  quad out = (quad)v0_;
  for (const auto& rp : ramps_) out += (quad)rp.q * (quad)rp.w * erf_softplus_q((s - (quad)rp.a) / (quad)rp.w);
  return (quad)scale_ * out;
}

double GradingMap::s_of_r(double r) const {
  if (r <= 0.0) return 0.0;
  const long double target = (long double)r / scale_;
  // bisection bracket then Newton (m is strictly increasing)
  long double lo = 0.0L, hi = 1.0L;
  if (target >= raw_m(1.0L)) return 1.0;
  long double s = 0.5L;
  for (int it = 0; it < 90; ++it) {
    const long double f = raw_m(s) - target;
    (f > 0 ? hi : lo) = s;
    const long double step = f / raw_mp(s);
    long double snew = s - step;
    if (!(snew > lo && snew < hi)) snew = 0.5L * (lo + hi);
    if (fabsl(snew - s) < 1e-19L * (s + 1e-30L)) {
      s = snew;
      break;
    }
    s = snew;
  }
  return double(s);
}

namespace {

// per-node spacing law for the default grading, tuned for the unit-scale
// ground state at the reference resolution n = 2048.  The work zone uses
// dr ~ r^{0.4}, which balances the r^6 error amplification of the composed
// bilaplacian against the node budget.
struct LawPoint {
  double r, dr;
  bool far = false;
};

std::vector<LawPoint> default_law(double r_max) {
  const double work_end = std::min(53.0, 0.6 * r_max);
  std::vector<LawPoint> pts;
  auto add = [&](double r, double dr, bool far = false) {
    if (r < r_max) pts.push_back({r, dr, far});
  };
  add(1e-6, 2.7e-4);
  add(0.012, 2.7e-4);
  add(0.020, 4.5e-4);
  add(0.030, 6.75e-4);
  add(0.090, 6.75e-4);
  // scale-covariant zone dr = 0.0135 r: sub-unit bubbles keep the same
  // resolution relative to their own scale as the unit ground state
  for (double r : {0.14, 0.22, 0.35, 0.55, 0.80, 1.10}) add(r, 0.0135 * r);
  add(2.2, 0.01485);
  // dr = 0.014 * (r/2.2)^0.4 through the tail-sensitive window
  {
    double r = 2.2 * 1.3;
    while (r < work_end / 1.18) {
      add(r, 0.014 * std::pow(r / 2.2, 0.4));
      r *= 1.3;
    }
    add(work_end, 0.014 * std::pow(work_end / 2.2, 0.4));
  }
  // far stretch: rapid linear opening so the zone costs ~90 nodes total.
  // Its ramps are kept narrow; the local truncation they cause stays beyond
  // the tail-sensitive window.
  const double dr_we = 0.014 * std::pow(work_end / 2.2, 0.4);
  const double slope = 0.055 * (200.0 / r_max) * (r_max - work_end) / (200.0 - 52.0);
  double r = work_end;
  while (r < 0.97 * r_max) {
    r = std::min(1.45 * r, 0.97 * r_max);
    add(r, dr_we + slope * (r - work_end), true);
  }
  pts.push_back({r_max, dr_we + slope * (r_max - work_end), true});
  return pts;
}

}  // namespace

GradingMap GradingMap::build(const GradingSpec& spec, double r_max) {
  GradingMap g;
  if (spec.kind == GradingSpec::Kind::Uniform) {
    g.v0_ = (long double)r_max;
    g.scale_ = 1.0L;
    return g;
  }
  if (spec.kind == GradingSpec::Kind::Rational) {
    g.rational_ = true;
    g.rational_c_ = (long double)spec.rational_stretch;
    g.rational_rmax_ = (long double)r_max;
    return g;
  }

  const auto law = default_law(r_max);
  const double h_ref = 1.0 / 2048.5;

  // initial s-positions of the law knots: s(r) = int dr/v, v = dr_law/h_ref,
  // trapezoid with log-interpolated velocity (design-time only)
  const std::size_t K = law.size();
  std::vector<double> sk(K, 0.0), vk(K);
  for (std::size_t k = 0; k < K; ++k) vk[k] = law[k].dr / h_ref;
  for (std::size_t k = 1; k < K; ++k) {
    const double ra = law[k - 1].r, rb = law[k].r;
    double acc = 0.0;
    const int M = 200;
    for (int j = 0; j < M; ++j) {
      const double t0 = ra + (rb - ra) * j / M, t1 = ra + (rb - ra) * (j + 1) / M;
      auto vel = [&](double rr) {
        const double t = (rr - ra) / (rb - ra);
        return vk[k - 1] * std::pow(vk[k] / vk[k - 1], t);
      };
      acc += (t1 - t0) * 0.5 * (1.0 / vel(t0) + 1.0 / vel(t1));
    }
    sk[k] = sk[k - 1] + acc;
  }
  {
    const double S = sk.back();
    for (auto& s : sk) s /= S;
    for (std::size_t k = 0; k < K; ++k) vk[k] = law[k].dr / h_ref * S;
  }

  // build ramps from knots; then re-place the knots on the realized map and
  // rebuild, which removes the chord drift of the piecewise-linear velocity
  auto build_from_knots = [&](const std::vector<double>& s_knots, const std::vector<double>& v_knots) {
    g.ramps_.clear();
    g.v0_ = v_knots[0];
    std::vector<double> slope(K, 0.0);
    for (std::size_t k = 0; k + 1 < K; ++k)
      slope[k] = (v_knots[k + 1] - v_knots[k]) / std::max(1e-9, s_knots[k + 1] - s_knots[k]);
    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      const double dq = slope[k] - prev;
      prev = slope[k];
      if (std::abs(dq) < 1e-12) continue;
      const double seg =
          std::min(k > 0 ? s_knots[k] - s_knots[k - 1] : s_knots[1], s_knots[k + 1] - s_knots[k]);
      // corners must stay wide on the stencil scale or the high-order flux
      // differences see them as kinks; far-stretch ramps stay narrow so their
      // influence cannot bleed back into the tail-sensitive window
      double w = law[k + 1].far ? std::clamp(0.20 * seg, 0.0015, 0.0028)
                                : std::clamp(0.25 * seg, 0.006, 0.030);
      w = std::min(w, std::max(s_knots[k] / 7.0, 1.2e-3));  // oddness near s=0
      g.ramps_.push_back({(long double)dq, (long double)s_knots[k], (long double)w});
    }
    g.scale_ = 1.0L;
    g.scale_ = (long double)r_max / g.raw_m(1.0L);
  };

  build_from_knots(sk, vk);
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<double> sk2(K), vk2 = vk;
    bool ok = true;
    for (std::size_t k = 0; k < K; ++k) {
      sk2[k] = (k == 0) ? sk[0] : g.s_of_r(law[k].r);
      if (k > 0 && sk2[k] <= sk2[k - 1] + 1e-6) ok = false;
      vk2[k] = vk[k] / double(g.scale_);  // compensate the global rescale
    }
    if (!ok) break;
    build_from_knots(sk2, vk2);
  }
  return g;
}

}  // namespace bhnls
