/// @file verification.hpp
/// Numerical checks for the structural properties a finished run must have:
/// finite propagation speed, domain of dependence, the weak (variational)
/// form of the equation, and convergence of the truncated source to the full
/// one on bounded fields.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wavepatch/local_solver.hpp"

namespace wavepatch {

/// Shared result type for the two cone checks.  finite_speed_check fills
/// `leakage`, domain_of_dependence_check fills `dod_discrepancy`; both are
/// indexed against `times`.
struct SpeedReport {
  double radius = 0.0;
  std::vector<double> times;
  std::vector<double> leakage;
  std::vector<double> dod_discrepancy;
  double max_leakage = 0.0;
  double max_dod_discrepancy = 0.0;
};

/// Verifies that data initially supported in B(x0, R) stays inside the
/// expanding ball B(x0, R + t + h): leakage(t) is the largest |u| over nodes
/// strictly outside that ball at each recorded time.  Throws if the first
/// recorded state is not supported in B(x0, R).
SpeedReport finite_speed_check(const Trajectory& traj,
                               const std::array<double, 3>& x0, double R);

/// Runs both initial states over the same horizon and measures where they
/// disagree inside the shrinking ball B(x0, R - t - h) for t < R.  The two
/// states must share a grid, a start time, and bitwise-equal data on
/// B(x0, R); anything else throws.
SpeedReport domain_of_dependence_check(const State& a0, const State& b0,
                                       const std::array<double, 3>& x0,
                                       double R, double horizon,
                                       const SourceSpec& src,
                                       const DampingSpec& dmp);

/// Family of smooth compactly supported space-time test functions: products
/// of plateau windows (quintic-smoothstep shoulders) over a few spatial and
/// temporal scales, with seeded random centers.
struct TestFunctionBasis {
  int spatial_scales = 3;
  int temporal_scales = 3;
  int centers = 4;
  std::uint64_t seed = 0x77a0e5eedULL;
};

struct VariationalResidual {
  std::vector<double> residuals;
  double max_residual = 0.0;
  int evaluated = 0;
  int rejected = 0;
  std::string basis_descriptor;
};

/// Tests the weak form of the equation against every admissible basis
/// element, in the first-derivative form obtained from
/// int int (u phi_tt + grad u . grad phi + f phi + g phi) = int (u_1 phi(0)
/// - u_0 phi_t(0)) by one integration by parts in time:
///   -int int u_t phi_t + int int (grad u . grad phi + f phi + g phi)
///     = int u_1 phi(x, 0) dx.
/// The synchronized velocity series supplies u_t, and the gradient term is
/// paired by summation against the discrete Laplacian (its exact adjoint
/// form).  Residuals are normalized by the size of the terms entering them.
/// Requires a trajectory recorded at every step; test functions whose
/// support touches the spatial boundary or the final time are rejected, not
/// evaluated.
VariationalResidual weak_residual(const Trajectory& traj,
                                  const SourceSpec& src,
                                  const DampingSpec& dmp,
                                  const TestFunctionBasis& basis = {});

struct FnConvergenceRow {
  int n = 0;
  double deviation = 0.0;
};

/// For each truncation level n, the L^q deviation |f_n(u) - f(u)|_q with
/// q = mtilde, evaluated on the given field.  Any truncation already set on
/// `src` is ignored; rows come back in the order of `levels`.
std::vector<FnConvergenceRow> fn_convergence_check(
    const Field& u, const SourceSpec& src, double mtilde,
    const std::vector<int>& levels);

}  // namespace wavepatch
