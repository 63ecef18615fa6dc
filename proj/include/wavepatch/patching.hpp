/// @file patching.hpp
/// Covers the domain with a lattice of patch centers, solves every cut patch
/// concurrently with one set of scheme parameters, and reads the global
/// solution off the backward cones C_j = {(y, s) : |y - x_j| <= r/2 - s}.
/// On cone overlaps the patch solutions agree (they share raw data on every
/// dependency ball), which overlap_consistency verifies; at unit Courant
/// ratio the agreement is bitwise.

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "wavepatch/cutting.hpp"
#include "wavepatch/local_solver.hpp"

namespace wavepatch {

/// Patch centers spaced d apart along every axis, endpoints included, so
/// every ball of radius d in the domain contains at least one center.
struct Lattice {
  std::vector<std::array<double, 3>> centers;
  double d = 0.0;
};

/// Backward cone: contains (y, s) iff |y - vertex_center| <= base_radius - s
/// and 0 <= s <= height.  Patch cones have base_radius = height = r/2.
struct ConeRegion {
  std::array<double, 3> vertex_center{};
  double base_radius = 0.0;
  double height = 0.0;

  bool contains(const std::array<double, 3>& y, double s) const;
};

/// Cone intersection I_{j,l} = C_j cap C_l; nonempty iff the centers are
/// closer than r, with points up to time (r - |x_j - x_l|)/2.
struct OverlapRegion {
  std::size_t j = 0;
  std::size_t l = 0;
  double max_time = 0.0;
};

struct OverlapReport {
  std::size_t j = 0;
  std::size_t l = 0;
  double max_time = 0.0;
  double max_diff_u = 0.0;
  double max_diff_ut = 0.0;
  std::size_t samples = 0;
};

/// The assembled run: per-patch data and trajectories plus the validity
/// horizon.  Assembly assigns each point to the nearest center whose cone
/// still contains it, lowest index on ties.
struct GlobalSolution {
  GridSpec grid;
  Lattice lattice;
  CutPlan plan;
  std::vector<CutData> data;
  std::vector<Trajectory> patches;
  double start_time = 0.0;
  double valid_until = 0.0;  // absolute time; r/2 minus the covering radius
  bool ok = false;
  std::size_t failed_patch = 0;
  std::string failure;
};

/// Regular lattice over a Line1D or Box3D grid.  Requires d to divide the
/// domain width and the node spacing to divide d, so centers sit on nodes.
Lattice build_lattice(const GridSpec& grid, double d);

/// Largest distance from a grid node to its nearest center (d/2 for the
/// canonical 1D lattice, so the validity horizon is (r - d)/2).
double cover_radius(const GridSpec& grid, const Lattice& lattice);

ConeRegion patch_cone(const std::array<double, 3>& center, double r);

/// Cone with vertex ((x_j + x_l)/2, (r - dist)/2) and equal height; on the
/// line it contains I_{j,l} exactly.
ConeRegion enclosing_cone(const Lattice& lattice, double r, std::size_t j,
                          std::size_t l);

/// All pairs j < l whose cones meet (center distance < r).
std::vector<OverlapRegion> overlap_regions(const Lattice& lattice, double r);

/// Cuts the data once per lattice center with the shared plan.
std::vector<CutData> cut_all(const Field& u0, const Field& u1,
                             const Lattice& lattice, const CutPlan& plan);

/// Solves every patch (concurrently across `jobs` workers) from start_time
/// to start_time + horizon; horizon <= 0 solves to the validity horizon,
/// rounded up to whole steps.  A patch that blows up before the validity
/// horizon marks the solution not-ok with the offending patch recorded;
/// assembly then refuses to run.
GlobalSolution solve_all_patches(const GridSpec& grid, const Lattice& lattice,
                                 const CutPlan& plan, std::vector<CutData> data,
                                 const SourceSpec& src, const DampingSpec& dmp,
                                 double horizon = 0.0,
                                 double start_time = 0.0,
                                 const SolveOptions& opts = {}, int jobs = 0);

/// Index of the patch assigned to (point, t): nearest center among the cones
/// containing the point, lowest index on ties.  Throws when no cone does.
std::size_t assign_patch(const GlobalSolution& gs,
                         const std::array<double, 3>& point, double t);

/// Piecewise global state at a recorded time t in [start_time, valid_until).
State assemble_state(const GlobalSolution& gs, double t);
Field assemble_global(const GlobalSolution& gs, double t);

/// Max difference of u and of u_t between patches j and l over all grid
/// nodes and recorded times in I_{j,l}; u_t is sampled one cell inside the
/// overlap (its discrete dependency ball is one cell wider than u's).  A
/// positive value flags a configuration error (the patches saw different
/// data inside some dependency ball).
OverlapReport overlap_consistency(const GlobalSolution& gs, std::size_t j,
                                  std::size_t l);

/// Restarts from the assembled state at recorded time t0 < valid_until:
/// re-cuts with a fresh radius for budget K on a spacing-d lattice and
/// re-solves, extending validity to t0 + (r' - d)/2.
GlobalSolution recut_and_extend(const GlobalSolution& gs, double t0, double K,
                                double d, const SourceSpec& src,
                                const DampingSpec& dmp,
                                const SolveOptions& opts = {}, int jobs = 0);

}  // namespace wavepatch
