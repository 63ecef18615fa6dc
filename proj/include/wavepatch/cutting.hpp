/// @file cutting.hpp
/// Turns whole-domain initial data into patch-local data: selects the
/// localization radius r from the energy budget K, builds the mollified
/// cutoff theta around a center, and produces (theta*u0, u1) on a
/// node-aligned patch grid together with a numerically verified bound
/// report: |grad(theta*u0)|_B + |u1|_B < K.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "wavepatch/gridfield.hpp"

namespace wavepatch {

/// Budget and radius shared by every patch of one run.  sobolev_C is the
/// cubed embedding constant C* with |u|_6 <= (C*)^(1/3) (|grad u|_2 + |u|_2),
/// estimated per geometry; omega3 is the unit-ball volume.
struct CutPlan {
  double K = 0.0;
  double r = 0.0;
  double sobolev_C = 0.0;
  double omega3 = 4.18879020478639098;  // 4*pi/3

  void validate() const;
};

/// Mollified radial cutoff around `center`: identically 1 on B(center, r/2),
/// identically 0 outside B(center, r), values in [0, 1], and every sampled
/// grid difference quotient at most 2/r.
struct ThetaCutoff {
  std::array<double, 3> center{};
  double r = 0.0;
  Field profile;          // sampled on the grid the cutoff was built for
  double max_gradient = 0.0;
};

/// Numerical record of the K/2 bound chain for one patch datum.
struct CutBoundReport {
  double grad_u0_ball = 0.0;   // |grad u0|_{2,B}
  double u0_l2_ball = 0.0;     // |u0|_{2,B}
  double u0_l6_ball = 0.0;     // |u0|_{6,B}
  double u1_ball = 0.0;        // |u1|_{2,B}
  double theta_inf = 0.0;
  double grad_theta_inf = 0.0;
  double chain_bound = 0.0;       // |theta|_inf |grad u0|_B + |grad theta|_inf |u0|_B
  double holder_majorant = 0.0;   // 2 omega3^(1/3) |u0|_{6,B}  (>= |grad theta|_inf |u0|_{2,B})
  double sobolev_majorant = 0.0;  // 2 (C* omega3)^(1/3) (|grad u0|_B + |u0|_B)
  double grad_cut_ball = 0.0;     // |grad(theta u0)|_{2,B}, measured directly
  double total = 0.0;             // grad_cut_ball + u1_ball
  bool chain_ok = false;          // chain_bound < K/2
  bool u1_ok = false;             // u1_ball < K/4
  bool total_ok = false;          // total < K
  double margin = 0.0;            // (K - total) / K
};

/// Patch-local initial data on its own node-aligned grid.
struct CutData {
  std::array<double, 3> center{};  // snapped to a grid node
  Field u0;
  Field u1;
  CutBoundReport report;
};

/// Estimate of the (cubed) Sobolev embedding constant for one geometry:
/// maximizes |u|_6 / (|grad u|_2 + |u|_2) over a basket of Gaussians,
/// plateau bumps, and tents at fine resolution, and returns the cube of the
/// largest ratio.
double sobolev_constant(Geometry geom);

/// Selects the largest radius from the halving sequence extent, extent/2, ...
/// such that on every probed center the local smallness conditions hold:
///   |u0|_{2,B} < K / (8 (C* omega3)^(1/3)),
///   |u1|_{2,B} < K / 4,
///   |grad u0|_{2,B} < min(K/4, K / (8 (C* omega3)^(1/3))).
/// The same r serves every center.  Requires |grad u0| + |u1| < K globally;
/// throws a resolution error if no radius above 8h works.
CutPlan choose_radius(const Field& u0, const Field& u1, double K,
                      const std::vector<std::array<double, 3>>& centers);

/// Mollified discrete cutoff: the piecewise-linear ramp
/// clamp(2 - 2|x - center|/r, 0, 1) smoothed by guarded nearest-neighbor
/// averaging that never moves plateau or support nodes, so the invariants
/// hold exactly on nodes and the gradient bound 2/r is preserved.
/// Requires r >= 4h.
ThetaCutoff build_theta(const std::array<double, 3>& center, double r,
                        const GridSpec& grid);

/// Cuts (u0, u1) for one patch: theta*u0 and u1 restricted to the patch grid
/// centered at the snapped center with half-width r, plus the verified bound
/// report.  A failed bound is reported, not thrown.
CutData cut_data(const Field& u0, const Field& u1,
                 const std::array<double, 3>& center, const CutPlan& plan);

/// Node-aligned subgrid of `global` centered at a node: same geometry, h,
/// and dt, extent r.  Throws if the center is not on a node or r is not a
/// whole number of cells.
GridSpec make_patch_grid(const GridSpec& global,
                         const std::array<double, 3>& center, double r);

/// Values of `global_field` at the nodes of `patch`; nodes outside the
/// global domain read as zero (the data is compactly supported well inside).
Field restrict_field(const Field& global_field, const GridSpec& patch);

/// Nearest grid node to a point.
std::array<double, 3> snap_to_node(const GridSpec& grid,
                                   const std::array<double, 3>& point);

}  // namespace wavepatch
