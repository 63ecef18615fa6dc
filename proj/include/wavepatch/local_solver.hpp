/// @file local_solver.hpp
/// Time integration for u_tt - lap(u) + f(u) + g(u_t) = 0 with homogeneous
/// Dirichlet boundary, on any of the supported grids.
///
/// The scheme is a staggered leapfrog with the damping handled by an implicit
/// midpoint solve, second order accurate including the damping term:
///
///   a^k       = lap(u^k) - f(u^k)
///   w^k       solves  w + (dt/2) g(w) = v^{k-1/2} + (dt/2) a^k
///   v^{k+1/2} = 2 w^k - v^{k-1/2}
///   u^{k+1}   = u^k + dt v^{k+1/2}
///
/// started from v^{1/2} = v^0 + (dt/2)(a^0 - g(v^0)).  The synchronized
/// velocity at step k is w^k (average of the two adjacent half-step values),
/// and that is what snapshots and the energy ledger report.
///
/// At dt = h on Line1D and Radial3D the scheme transports compactly supported
/// data at exactly one cell per step, so everything outside the light cone
/// stays bitwise zero.  All per-node updates are local and deterministic,
/// which is what makes restricted and whole-domain solves agree bitwise on
/// the common domain of dependence.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wavepatch/gridfield.hpp"
#include "wavepatch/nonlinearity.hpp"

namespace wavepatch {

struct State {
  Field u;
  Field v;
  double t = 0.0;
};

/// One row of the energy ledger, sampled at a synchronized step.
/// identity_residual = |E(t) + D(t) - E(0)| where E = kinetic + gradient +
/// source_potential and D is the accumulated damping dissipation.
struct EnergySample {
  double t = 0.0;
  double kinetic = 0.0;
  double gradient = 0.0;
  double source_potential = 0.0;
  double dissipation = 0.0;
  double identity_residual = 0.0;
};

enum class Outcome { Completed, BlewUp, NumericalFailure };

std::string outcome_name(Outcome o);

struct SolveOptions {
  /// Keep every snapshot_stride-th synchronized state plus the endpoints;
  /// 0 keeps only the endpoints.
  int snapshot_stride = 1;
  bool record_ledger = true;
  /// max |u| at which the run is declared blown up.
  double blowup_threshold = 1e8;
};

struct Trajectory {
  std::vector<State> states;
  std::vector<int> state_steps;
  std::vector<EnergySample> ledger;
  /// Final accumulated damping dissipation (the L^{m+1} time budget).
  double dissipation_total = 0.0;
  Outcome outcome = Outcome::Completed;
  /// Time reached: the horizon for Completed, detection time otherwise.
  double outcome_time = 0.0;
  double peak_abs_u = 0.0;
  double dt = 0.0;
  int steps = 0;

  const State& final_state() const { return states.back(); }
};

/// Discrete laplacian with Dirichlet boundary rows zeroed.  Radial grids use
/// the conservative stencil ((i+1)u_{i+1} - 2i u_i + (i-1)u_{i-1}) / (i h^2)
/// away from the axis and 6(u_1 - u_0)/h^2 at the axis.
Field apply_laplacian(const Field& u);

/// a = lap(u) - f(u) on non-boundary nodes, zero on the boundary.
Field acceleration(const Field& u, const SourceSpec& src);

/// Energy sample of a synchronized state (w = synchronized velocity), with
/// dissipation and the reference energy supplied by the caller.
EnergySample energy_sample(const Field& u, const Field& w,
                           const SourceSpec& src, const DampingSpec& dmp,
                           double t, double dissipation, double e0);

/// Instantaneous ledger components of a single state (no history, so
/// dissipation and identity_residual are 0).
EnergySample energy(const State& s, const SourceSpec& src);

/// Sum of cell_weight * g(w) * w, the instantaneous dissipation rate.
double dissipation_rate(const Field& w, const DampingSpec& dmp);

/// One synchronized step of size u.grid.dt: startup, one staggered update,
/// synchronized readout.  Matches the first step of solve_on_patch bitwise.
/// The startup formula is the exact inverse of the synchronized readout, so
/// restarting from a synchronized pair reproduces the continuously staggered
/// run up to the damping-solve residual (bitwise when damping is absent,
/// roundoff-level otherwise).
State step(const State& s, const SourceSpec& src, const DampingSpec& dmp);

/// Exponential a-priori envelope for the bracket |u_t(t)|^2 + |grad u(t)|^2:
/// eval(T) = (initial_bracket + c_bar*T) * exp(c_exp*T), plus a budget for
/// the damping time-integral int_0^T |u_t|_{m+1}^{m+1} dt.  The constants are
/// fitted diagnostics, not proof-grade bounds.
struct AprioriEnvelope {
  double initial_bracket = 0.0;
  double c_bar = 0.0;
  double c_exp = 0.0;
  double budget_m1 = 0.0;

  double eval(double T) const {
    return (initial_bracket + c_bar * T) * std::exp(c_exp * T);
  }
};

struct AprioriReport {
  bool bracket_ok = false;
  bool budget_ok = false;
  bool budget_skipped = false;  // a = 0: no damping integral to bound
  double min_margin = 0.0;      // min over t of envelope(t) - bracket(t)
  double budget_margin = 0.0;
  std::string details;
};

/// Fits envelope constants to a completed, ledger-recorded run: the growth
/// rate comes from the Young-inequality constant at eps1 = l_m/4 combined
/// with an empirical Lipschitz ratio of the source, and c_bar absorbs the
/// residual so the envelope dominates the observed bracket with margin.
AprioriEnvelope fit_envelope(const Trajectory& traj, const SourceSpec& src,
                             const DampingSpec& dmp);

/// Verifies bracket(t) <= envelope(t - t0) at every ledger row and the
/// damping budget dissipation_total / a <= budget_m1.
AprioriReport check_apriori(const Trajectory& traj, const DampingSpec& dmp,
                            const AprioriEnvelope& env);

/// Integrate from s0 to time horizon (relative to s0.t), stopping early on
/// blow-up or non-finite values.
Trajectory solve_on_patch(const State& s0, double horizon,
                          const SourceSpec& src, const DampingSpec& dmp,
                          const SolveOptions& opts = {});

}  // namespace wavepatch
