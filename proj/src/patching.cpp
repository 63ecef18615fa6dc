#include "wavepatch/patching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wavepatch/parallel.hpp"

namespace wavepatch {

namespace {

constexpr double kGeomFuzz = 1e-12;

double point_distance(const std::array<double, 3>& a,
                      const std::array<double, 3>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::array<int, 3> unflatten(const GridSpec& g, std::size_t flat) {
  const int n = g.nodes_per_axis();
  if (g.geometry == Geometry::Box3D) {
    const auto nn = static_cast<std::size_t>(n);
    return {static_cast<int>(flat / (nn * nn)),
            static_cast<int>((flat / nn) % nn), static_cast<int>(flat % nn)};
  }
  return {static_cast<int>(flat), 0, 0};
}

std::array<long, 3> axis_offsets(const GridSpec& inner, const GridSpec& outer) {
  std::array<long, 3> base{0, 0, 0};
  for (int a = 0; a < inner.axes(); ++a) {
    const double off = (inner.axis_min(a) - outer.axis_min(a)) / outer.h;
    base[static_cast<std::size_t>(a)] = std::lround(off);
    if (std::abs(off - static_cast<double>(base[static_cast<std::size_t>(a)])) >
        1e-6)
      throw std::invalid_argument("grids are not node-aligned");
  }
  return base;
}

std::size_t find_recorded(const Trajectory& traj, double t,
                          const char* what) {
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (std::abs(traj.states[k].t - t) <= 1e-9 * std::max(1.0, std::abs(t)))
      return k;
  }
  throw std::invalid_argument(std::string(what) +
                              ": time was not recorded by the run");
}

}  // namespace

bool ConeRegion::contains(const std::array<double, 3>& y, double s) const {
  if (s < -kGeomFuzz || s > height + kGeomFuzz) return false;
  return point_distance(y, vertex_center) <= base_radius - s + kGeomFuzz;
}

Lattice build_lattice(const GridSpec& grid, double d) {
  grid.validate();
  if (grid.geometry == Geometry::Radial3D)
    throw std::invalid_argument(
        "patch lattices need a translation-invariant grid");
  if (!(d > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
  const double spans = 2.0 * grid.extent / d;
  if (std::abs(spans - std::round(spans)) > 1e-9 * std::max(1.0, spans))
    throw std::invalid_argument("lattice spacing must divide the domain width");
  const double cells = d / grid.h;
  if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells))
    throw std::invalid_argument("node spacing must divide the lattice spacing");

  const int per_axis = static_cast<int>(std::round(spans)) + 1;
  Lattice lat;
  lat.d = d;
  if (grid.geometry == Geometry::Line1D) {
    for (int i = 0; i < per_axis; ++i)
      lat.centers.push_back({grid.axis_min(0) + i * d, 0.0, 0.0});
  } else {
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        for (int k = 0; k < per_axis; ++k)
          lat.centers.push_back({grid.axis_min(0) + i * d,
                                 grid.axis_min(1) + j * d,
                                 grid.axis_min(2) + k * d});
  }
  return lat;
}

double cover_radius(const GridSpec& grid, const Lattice& lattice) {
  if (lattice.centers.empty())
    throw std::invalid_argument("lattice has no centers");
  double worst = 0.0;
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    const auto p = grid.node_point(flat);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : lattice.centers)
      best = std::min(best, point_distance(p, c));
    worst = std::max(worst, best);
  }
  return worst;
}

ConeRegion patch_cone(const std::array<double, 3>& center, double r) {
  return ConeRegion{center, 0.5 * r, 0.5 * r};
}

ConeRegion enclosing_cone(const Lattice& lattice, double r, std::size_t j,
                          std::size_t l) {
  if (j >= lattice.centers.size() || l >= lattice.centers.size() || j == l)
    throw std::invalid_argument("enclosing cone needs two distinct patches");
  const auto& cj = lattice.centers[j];
  const auto& cl = lattice.centers[l];
  const double dist = point_distance(cj, cl);
  if (dist >= r)
    throw std::invalid_argument("the two cones do not intersect");
  ConeRegion cone;
  cone.vertex_center = {0.5 * (cj[0] + cl[0]), 0.5 * (cj[1] + cl[1]),
                        0.5 * (cj[2] + cl[2])};
  cone.base_radius = 0.5 * (r - dist);
  cone.height = cone.base_radius;
  return cone;
}

std::vector<OverlapRegion> overlap_regions(const Lattice& lattice, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("patch radius must be positive");
  std::vector<OverlapRegion> out;
  for (std::size_t j = 0; j + 1 < lattice.centers.size(); ++j) {
    for (std::size_t l = j + 1; l < lattice.centers.size(); ++l) {
      const double dist =
          point_distance(lattice.centers[j], lattice.centers[l]);
      if (dist < r - kGeomFuzz)
        out.push_back({j, l, 0.5 * (r - dist)});
    }
  }
  return out;
}

std::vector<CutData> cut_all(const Field& u0, const Field& u1,
                             const Lattice& lattice, const CutPlan& plan) {
  std::vector<CutData> out;
  out.reserve(lattice.centers.size());
  for (const auto& c : lattice.centers)
    out.push_back(cut_data(u0, u1, c, plan));
  return out;
}

GlobalSolution solve_all_patches(const GridSpec& grid, const Lattice& lattice,
                                 const CutPlan& plan, std::vector<CutData> data,
                                 const SourceSpec& src, const DampingSpec& dmp,
                                 double horizon, double start_time,
                                 const SolveOptions& opts, int jobs) {
  grid.validate();
  plan.validate();
  if (lattice.centers.empty())
    throw std::invalid_argument("lattice has no centers");
  if (!(lattice.d > 0.0 && lattice.d < 0.5 * plan.r))
    throw std::invalid_argument(
        "lattice spacing must satisfy 0 < d < r/2");
  if (data.size() != lattice.centers.size())
    throw std::invalid_argument("one cut datum per lattice center is required");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto snapped = snap_to_node(grid, lattice.centers[i]);
    if (point_distance(snapped, data[i].center) > kGeomFuzz)
      throw std::invalid_argument("cut data centers must match the lattice");
  }

  GlobalSolution gs;
  gs.grid = grid;
  gs.lattice = lattice;
  gs.plan = plan;
  gs.start_time = start_time;
  const double valid_rel =
      std::max(0.0, 0.5 * plan.r - cover_radius(grid, lattice));
  gs.valid_until = start_time + valid_rel;

  double span = horizon;
  if (span <= 0.0) span = valid_rel;
  const auto steps =
      std::max<long>(1, std::lround(std::ceil(span / grid.dt - 1e-9)));
  const double solve_horizon = static_cast<double>(steps) * grid.dt;

  gs.patches.resize(data.size());
  parallel_for(data.size(), jobs, [&](std::size_t i) {
    State s0;
    s0.u = data[i].u0;
    s0.v = data[i].u1;
    s0.t = start_time;
    gs.patches[i] = solve_on_patch(s0, solve_horizon, src, dmp, opts);
  });
  gs.data = std::move(data);

  gs.ok = true;
  for (std::size_t i = 0; i < gs.patches.size(); ++i) {
    const Trajectory& traj = gs.patches[i];
    if (traj.outcome == Outcome::Completed) continue;
    if (traj.outcome_time < gs.valid_until - kGeomFuzz) {
      gs.ok = false;
      gs.failed_patch = i;
      std::ostringstream msg;
      msg << "patch " << i << " " << outcome_name(traj.outcome) << " at t="
          << traj.outcome_time << " before the validity horizon "
          << gs.valid_until;
      gs.failure = msg.str();
      break;
    }
  }
  return gs;
}

std::size_t assign_patch(const GlobalSolution& gs,
                         const std::array<double, 3>& point, double t) {
  const double s = t - gs.start_time;
  if (s < -kGeomFuzz)
    throw std::invalid_argument("time precedes the run start");
  const double allowance = 0.5 * gs.plan.r - s;
  std::size_t best = gs.lattice.centers.size();
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < gs.lattice.centers.size(); ++j) {
    const double dist = point_distance(point, gs.lattice.centers[j]);
    if (dist <= allowance + kGeomFuzz && dist < best_dist) {
      best = j;
      best_dist = dist;
    }
  }
  if (best == gs.lattice.centers.size())
    throw std::runtime_error("point left every patch cone");
  return best;
}

State assemble_state(const GlobalSolution& gs, double t) {
  if (!gs.ok)
    throw std::runtime_error("global solution is not assemblable: " +
                             gs.failure);
  if (t < gs.start_time - kGeomFuzz || t >= gs.valid_until - kGeomFuzz)
    throw std::invalid_argument(
        "assembly time must lie inside the validity horizon");

  std::vector<std::size_t> state_idx(gs.patches.size());
  std::vector<std::array<long, 3>> base(gs.patches.size());
  for (std::size_t j = 0; j < gs.patches.size(); ++j) {
    state_idx[j] = find_recorded(gs.patches[j], t, "assemble");
    base[j] = axis_offsets(gs.data[j].u0.grid, gs.grid);
  }

  State out;
  out.u = Field(gs.grid);
  out.v = Field(gs.grid);
  out.t = t;
  const int pn = gs.data[0].u0.grid.nodes_per_axis();
  for (std::size_t flat = 0; flat < gs.grid.node_count(); ++flat) {
    const auto point = gs.grid.node_point(flat);
    const std::size_t j = assign_patch(gs, point, t);
    const auto gi = unflatten(gs.grid, flat);
    std::array<int, 3> pi{0, 0, 0};
    for (int a = 0; a < gs.grid.axes(); ++a) {
      const long v = static_cast<long>(gi[static_cast<std::size_t>(a)]) -
                     base[j][static_cast<std::size_t>(a)];
      if (v < 0 || v >= pn)
        throw std::runtime_error("assigned patch does not hold the node");
      pi[static_cast<std::size_t>(a)] = static_cast<int>(v);
    }
    const GridSpec& pg = gs.data[j].u0.grid;
    const std::size_t pf = pg.flat_index(pi[0], pi[1], pi[2]);
    const State& ps = gs.patches[j].states[state_idx[j]];
    out.u[flat] = ps.u[pf];
    out.v[flat] = ps.v[pf];
  }
  return out;
}

Field assemble_global(const GlobalSolution& gs, double t) {
  return assemble_state(gs, t).u;
}

OverlapReport overlap_consistency(const GlobalSolution& gs, std::size_t j,
                                  std::size_t l) {
  if (j >= gs.patches.size() || l >= gs.patches.size() || j == l)
    throw std::invalid_argument("overlap check needs two distinct patches");

  const auto& cj = gs.lattice.centers[j];
  const auto& cl = gs.lattice.centers[l];
  OverlapReport rep;
  rep.j = j;
  rep.l = l;
  const double dist = point_distance(cj, cl);
  if (dist >= gs.plan.r - kGeomFuzz) return rep;
  rep.max_time = 0.5 * (gs.plan.r - dist);

  const GridSpec& pgj = gs.data[j].u0.grid;
  const GridSpec& pgl = gs.data[l].u0.grid;
  const auto base_j = axis_offsets(pgj, gs.grid);
  const auto base_l = axis_offsets(pgl, gs.grid);
  const int pn = pgj.nodes_per_axis();

  const Trajectory& tj = gs.patches[j];
  const Trajectory& tl = gs.patches[l];
  for (std::size_t k = 0; k < tj.states.size(); ++k) {
    const double s = tj.states[k].t - gs.start_time;
    if (s > rep.max_time + kGeomFuzz) continue;
    const std::size_t kl = find_recorded(tl, tj.states[k].t, "overlap check");
    const double allowance = 0.5 * gs.plan.r - s;
    // The synchronized velocity reads the laplacian of u, so its dependency
    // ball is one cell wider than u's; its agreement cone is one cell
    // narrower, the same one-cell sharpening the speed checks use.
    const double allowance_v = allowance - gs.grid.h;
    for (std::size_t pf = 0; pf < pgj.node_count(); ++pf) {
      const auto y = pgj.node_point(pf);
      if (point_distance(y, cj) > allowance + kGeomFuzz) continue;
      if (point_distance(y, cl) > allowance + kGeomFuzz) continue;
      const bool check_v =
          point_distance(y, cj) <= allowance_v + kGeomFuzz &&
          point_distance(y, cl) <= allowance_v + kGeomFuzz;
      const auto idx = unflatten(pgj, pf);
      std::array<int, 3> li{0, 0, 0};
      bool inside = true;
      for (int a = 0; a < pgj.axes(); ++a) {
        const long v = static_cast<long>(idx[static_cast<std::size_t>(a)]) +
                       base_j[static_cast<std::size_t>(a)] -
                       base_l[static_cast<std::size_t>(a)];
        if (v < 0 || v >= pn) inside = false;
        li[static_cast<std::size_t>(a)] = static_cast<int>(v);
      }
      if (!inside)
        throw std::runtime_error("overlap node missing from the second patch");
      const std::size_t lf = pgl.flat_index(li[0], li[1], li[2]);
      rep.max_diff_u = std::max(
          rep.max_diff_u, std::abs(tj.states[k].u[pf] - tl.states[kl].u[lf]));
      if (check_v)
        rep.max_diff_ut = std::max(
            rep.max_diff_ut, std::abs(tj.states[k].v[pf] - tl.states[kl].v[lf]));
      ++rep.samples;
    }
  }
  return rep;
}

GlobalSolution recut_and_extend(const GlobalSolution& gs, double t0, double K,
                                double d, const SourceSpec& src,
                                const DampingSpec& dmp,
                                const SolveOptions& opts, int jobs) {
  const State restart = assemble_state(gs, t0);
  const Lattice lat = build_lattice(gs.grid, d);
  CutPlan plan = choose_radius(restart.u, restart.v, K, lat.centers);
  if (!(d < 0.5 * plan.r))
    throw std::invalid_argument(
        "lattice spacing too coarse for the re-selected radius");
  std::vector<CutData> cuts = cut_all(restart.u, restart.v, lat, plan);
  return solve_all_patches(gs.grid, lat, plan, std::move(cuts), src, dmp, 0.0,
                           t0, opts, jobs);
}

}  // namespace wavepatch
