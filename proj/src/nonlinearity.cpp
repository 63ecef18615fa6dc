#include "wavepatch/nonlinearity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wavepatch {

namespace {

constexpr double kSaturation = 1e300;

double quintic_smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double quintic_smoothstep_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double omt = 1.0 - t;
  return 30.0 * t * t * omt * omt;
}

/// 64-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on the
/// Legendre recurrence.  Built once.
struct Gauss64 {
  std::array<double, 64> x{}, w{};
  Gauss64() {
    constexpr int n = 64;
    for (int i = 0; i < n / 2; ++i) {
      double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        const double step = p1 / dp;
        t -= step;
        if (std::abs(step) < 1e-15) break;
      }
      x[static_cast<std::size_t>(i)] = -t;
      x[static_cast<std::size_t>(n - 1 - i)] = t;
      const double ww = 2.0 / ((1.0 - t * t) * dp * dp);
      w[static_cast<std::size_t>(i)] = ww;
      w[static_cast<std::size_t>(n - 1 - i)] = ww;
    }
  }
};

const Gauss64& gauss64() {
  static const Gauss64 rule;
  return rule;
}

double integrate_ramp(double p, int n, double from, double to) {
  const CutoffProfile eta = build_cutoff_eta(n);
  const Gauss64& g = gauss64();
  const double mid = 0.5 * (from + to), half = 0.5 * (to - from);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double s = mid + half * g.x[i];
    acc += g.w[i] * std::pow(s, p) * eta.value(s);
  }
  return half * acc;
}

}  // namespace

std::string criticality_name(Criticality c) {
  switch (c) {
    case Criticality::Subcritical: return "subcritical";
    case Criticality::Critical: return "critical";
    case Criticality::Supercritical: return "supercritical";
    case Criticality::SuperSupercritical: return "super-supercritical";
  }
  return "unknown";
}

Criticality classify_exponent(double p) {
  if (!(p >= 1.0) || !(p < 6.0))
    throw std::domain_error("classify_exponent: p must lie in [1, 6)");
  if (p < 3.0) return Criticality::Subcritical;
  if (p == 3.0) return Criticality::Critical;
  if (p < 5.0) return Criticality::Supercritical;
  return Criticality::SuperSupercritical;
}

void SourceSpec::validate() const {
  if (!(p >= 1.0) || !(p < 6.0))
    throw std::invalid_argument("source: p must lie in [1, 6)");
  if (!(coeff >= 0.0))
    throw std::invalid_argument("source: coeff must be nonnegative");
  if (sign != 1.0 && sign != -1.0)
    throw std::invalid_argument("source: sign must be +1 or -1");
  if (truncation && *truncation < 1)
    throw std::invalid_argument("source: truncation level must be >= 1");
}

void DampingSpec::validate() const {
  if (!(m >= 0.0)) throw std::invalid_argument("damping: m must be >= 0");
  if (!(l_m >= 0.0) || !(L_m >= l_m))
    throw std::invalid_argument("damping: need 0 <= l_m <= L_m");
}

double CutoffProfile::value(double s) const {
  const double a = std::abs(s);
  const double n = static_cast<double>(level);
  if (a <= n) return 1.0;
  if (a >= 2.0 * n) return 0.0;
  return 1.0 - quintic_smoothstep((a - n) / n);
}

double CutoffProfile::derivative(double s) const {
  const double a = std::abs(s);
  const double n = static_cast<double>(level);
  if (a <= n || a >= 2.0 * n) return 0.0;
  const double d = -quintic_smoothstep_deriv((a - n) / n) / n;
  return s > 0.0 ? d : -d;
}

CutoffProfile build_cutoff_eta(int n) {
  if (n < 1) throw std::invalid_argument("build_cutoff_eta: level must be >= 1");
  CutoffProfile out;
  out.level = n;
  return out;
}

double eval_source(const SourceSpec& src, double s) {
  double mag = std::pow(std::abs(s), src.p - 1.0) * std::abs(s);
  if (!std::isfinite(mag) || mag > kSaturation) mag = kSaturation;
  double f = src.sign * src.coeff * (s < 0.0 ? -mag : mag);
  if (src.truncation) f *= build_cutoff_eta(*src.truncation).value(s);
  return f;
}

double source_antiderivative(const SourceSpec& src, double s) {
  const double a = std::abs(s);
  const double plateau = src.truncation
                             ? std::min(a, static_cast<double>(*src.truncation))
                             : a;
  double q = std::pow(plateau, src.p + 1.0) / (src.p + 1.0);
  if (src.truncation && a > static_cast<double>(*src.truncation)) {
    const double n = static_cast<double>(*src.truncation);
    q += integrate_ramp(src.p, *src.truncation, n, std::min(a, 2.0 * n));
  }
  if (!std::isfinite(q) || q > kSaturation) q = kSaturation;
  return src.sign * src.coeff * q;
}

double eval_damping(const DampingSpec& dmp, double s) {
  if (s == 0.0) return 0.0;
  double mag = std::pow(std::abs(s), dmp.m - 1.0) * std::abs(s);
  if (!std::isfinite(mag) || mag > kSaturation) mag = kSaturation;
  return dmp.a() * (s < 0.0 ? -mag : mag);
}

double solve_damping_update(double v_guess, double rhs, double dt,
                            const DampingSpec& dmp) {
  if (rhs == 0.0) return 0.0;
  if (!(dt > 0.0)) throw std::invalid_argument("solve_damping_update: dt <= 0");
  const double kappa = dt * dmp.a();
  const double R = std::abs(rhs);
  const double sgn = rhs < 0.0 ? -1.0 : 1.0;

  if (dmp.m == 0.0) return sgn * std::max(0.0, R - kappa);
  if (dmp.m == 1.0) return rhs / (1.0 + kappa);

  // y + kappa*y^m = R on y in [0, R]; phi is strictly increasing.
  const double kRm1 = kappa * std::pow(R, dmp.m - 1.0);
  if (kRm1 <= 1e-14) return rhs;  // correction below double precision

  double lo = 0.0, hi = R;
  double y = R / (1.0 + kRm1);
  if (v_guess != 0.0) {
    const double g = std::abs(v_guess);
    if (g > 0.0 && g < R) y = g;
  }
  const double tol = 1e-15 * std::max(1.0, R);
  for (int it = 0; it < 200; ++it) {
    const double ym1 = std::pow(y, dmp.m - 1.0);
    const double phi = y + kappa * ym1 * y - R;
    if (std::abs(phi) <= tol) break;
    if (phi > 0.0)
      hi = y;
    else
      lo = y;
    const double dphi = 1.0 + kappa * dmp.m * ym1;
    double next = y - phi / dphi;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (next == y) break;
    y = next;
  }
  return sgn * y;
}

std::string af_branch_name(AfBranch b) {
  switch (b) {
    case AfBranch::A: return "a";
    case AfBranch::B: return "b";
    case AfBranch::Neither: return "neither";
  }
  return "unknown";
}

AssumptionReport check_assumptions(const SourceSpec& src,
                                   const DampingSpec& dmp) {
  src.validate();
  dmp.validate();
  AssumptionReport rep;
  std::ostringstream details;

  // Damping window: odd, zero at zero, nondecreasing, and power-sandwiched
  // on (1, 1e6].  Deterministic log-spaced samples from 1e-6 up to 1e6.
  // a = 0 disables the term entirely and cannot be strictly increasing.
  bool ok = dmp.a() > 0.0 && eval_damping(dmp, 0.0) == 0.0;
  double prev_g = 0.0;
  for (int i = 0; i <= 128 && ok; ++i) {
    const double s = std::pow(10.0, -6.0 + 12.0 * i / 128.0);
    const double g = eval_damping(dmp, s);
    if (eval_damping(dmp, -s) != -g) ok = false;
    if (s > 1.0) {
      const double gs = g * s;
      const double grow = std::pow(s, dmp.m + 1.0);
      if (gs < dmp.l_m * grow * (1.0 - 1e-12) ||
          gs > dmp.L_m * grow * (1.0 + 1e-12))
        ok = false;
    }
    if (g < prev_g * (1.0 - 1e-12)) ok = false;
    prev_g = g;
  }
  rep.ag_ok = ok;
  details << "damping window " << (ok ? "ok" : "violated") << "; ";

  if (src.p > 1.0 && src.p <= 3.0) {
    rep.af_branch = AfBranch::A;
    details << "source branch a (1 < p <= 3)";
  } else if (dmp.m > 0.0) {
    const double lhs = src.p + src.p / dmp.m;
    rep.af_branch = AfBranch::Neither;
    for (int k = 1; k <= 40; ++k) {
      const double eps = std::ldexp(1.0, -k);
      if (lhs < 6.0 / (1.0 + 2.0 * eps)) {
        rep.af_branch = AfBranch::B;
        rep.epsilon = eps;  // largest passing eps: grid is decreasing in k
        break;
      }
    }
    if (rep.af_branch == AfBranch::B)
      details << "source branch b, p + p/m = " << lhs
              << " < 6/(1+2*eps) at eps = " << rep.epsilon;
    else
      details << "source branch: neither (p + p/m = " << lhs << " >= 6)";
  } else {
    rep.af_branch = AfBranch::Neither;
    details << "source branch: neither (p outside (1,3] and m = 0)";
  }
  rep.details = details.str();
  return rep;
}

LipschitzProbe lipschitz_probe(const SourceSpec& src, const Field& u,
                               const Field& v, double eps, double mtilde) {
  if (!u.grid.same_layout(v.grid))
    throw std::invalid_argument("lipschitz_probe: fields on different grids");
  Field diff_f(u.grid), diff_uv(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    diff_f[i] = eval_source(src, u[i]) - eval_source(src, v[i]);
    diff_uv[i] = u[i] - v[i];
  }
  LipschitzProbe probe;
  const double den_frac = norm_h1me(diff_uv, eps);
  const double den_h1 = norm_h1(diff_uv);
  if (den_frac == 0.0 || den_h1 == 0.0) {
    probe.skipped = true;
    return probe;
  }
  probe.ratio_fractional = norm_lq(diff_f, mtilde) / den_frac;
  probe.ratio_l2_h1 = norm_lq(diff_f, 2.0) / den_h1;
  return probe;
}

}  // namespace wavepatch
