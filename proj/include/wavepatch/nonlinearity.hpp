/// @file nonlinearity.hpp
/// @brief Power-law source and damping terms, truncation cutoffs, exponent
///        classification, and the admissibility checks the solver relies on.
///
/// The source is f(s) = sign * coeff * |s|^(p-1) * s, optionally truncated at
/// level n: f_n(s) = f(s) * eta(s) with a C^2 cutoff eta that is identically 1
/// on [-n, n] and identically 0 outside (-2n, 2n).  The damping is the pure
/// power g(s) = a * |s|^(m-1) * s with a = l_m = L_m.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wavepatch/gridfield.hpp"

namespace wavepatch {

/// Growth classes of the source exponent for the three-dimensional energy
/// space: the H1 -> L6 embedding controls |u|^p up to p = 5, and p < 6 keeps
/// the potential well-defined on H1.
enum class Criticality { Subcritical, Critical, Supercritical, SuperSupercritical };

std::string criticality_name(Criticality c);

/// Classifies p in [1, 6) with breakpoints exactly at 3 and 5.
/// Throws std::domain_error outside [1, 6).
Criticality classify_exponent(double p);

struct SourceSpec {
  double p = 3.0;
  double coeff = 1.0;                 // 0 disables the source (linear-wave oracle)
  double sign = -1.0;                 // -1 focusing, +1 defocusing (good sign)
  std::optional<int> truncation;      // cutoff level n; empty = untruncated

  void validate() const;              // throws std::invalid_argument
};

struct DampingSpec {
  double m = 1.0;
  double l_m = 1.0;                   // lower growth constant; 0 disables damping
  double L_m = 1.0;                   // upper growth constant

  /// Pure-power model coefficient (l_m = L_m = a).
  double a() const { return l_m; }
  double mtilde() const { return (m + 1.0) / m; }

  void validate() const;              // throws std::invalid_argument
};

/// C^2 cutoff with plateau [-n, n], support [-2n, 2n], and a quintic
/// smoothstep ramp.  |eta'| <= deriv_bound / n with deriv_bound = 15/8.
struct CutoffProfile {
  int level = 1;
  double deriv_bound = 15.0 / 8.0;
  std::string transition = "quintic-smoothstep";

  double value(double s) const;
  double derivative(double s) const;
};

CutoffProfile build_cutoff_eta(int n);

/// f_n(s).  Saturates (rather than overflowing to inf) for astronomically
/// large |s|; the solver's blow-up detector fires long before saturation.
double eval_source(const SourceSpec& src, double s);

/// Antiderivative F_n with F_n(0) = 0: closed form on the plateau, 64-point
/// Gauss-Legendre on the cutoff ramp, constant beyond the support.
double source_antiderivative(const SourceSpec& src, double s);

/// g(s) = a |s|^(m-1) s.
double eval_damping(const DampingSpec& dmp, double s);

/// Solves v + dt * g(v) = rhs for the unique v (monotone scalar equation).
/// Residual contract: |v + dt*g(v) - rhs| <= 1e-12 * max(1, |rhs|) for m > 0.
/// For m = 0 the damping is the discontinuous sign model and the returned v
/// is the monotone-inclusion solution sign(rhs) * max(0, |rhs| - dt*a).
double solve_damping_update(double v_guess, double rhs, double dt,
                            const DampingSpec& dmp);

enum class AfBranch { A, B, Neither };

std::string af_branch_name(AfBranch b);

struct AssumptionReport {
  bool ag_ok = false;
  AfBranch af_branch = AfBranch::Neither;
  double epsilon = 0.0;    // witness for branch B, 0 otherwise
  std::string details;
};

/// Checks the damping admissibility window by deterministic sampling and
/// decides the source branch: A when 1 < p <= 3 (any m >= 0), otherwise B
/// iff p + p/m < 6/(1 + 2*eps) for some eps > 0, searched over
/// eps in {2^-k : k = 1..40} and reporting the largest passing value.
AssumptionReport check_assumptions(const SourceSpec& src, const DampingSpec& dmp);

struct LipschitzProbe {
  bool skipped = false;            // true when u == v (zero denominator)
  double ratio_fractional = 0.0;   // |f_n(u)-f_n(v)|_mtilde / |u-v|_{H^{1-eps}}
  double ratio_l2_h1 = 0.0;        // |f_n(u)-f_n(v)|_2 / |u-v|_{H^1}
};

/// Empirical local-Lipschitz quotients of the truncated source between two
/// fields.  mtilde is the conjugate damping exponent (m+1)/m.
LipschitzProbe lipschitz_probe(const SourceSpec& src, const Field& u,
                               const Field& v, double eps, double mtilde);

}  // namespace wavepatch
