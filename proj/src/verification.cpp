#include "wavepatch/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace wavepatch {

namespace {

constexpr double kGeomFuzz = 1e-12;

/// Plateau window: 1 on [-1/2, 1/2], quintic-smoothstep shoulders down to 0
/// at |xi| = 1, identically 0 beyond.  C^2 everywhere.
double window(double xi) {
  const double a = std::abs(xi);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  const double tau = 2.0 * a - 1.0;
  return 1.0 - tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

double window_d1(double xi) {
  const double a = std::abs(xi);
  if (a <= 0.5 || a >= 1.0) return 0.0;
  const double tau = 2.0 * a - 1.0;
  const double sp = 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau);
  return -2.0 * sp * (xi < 0.0 ? -1.0 : 1.0);
}

struct SpaceWindow {
  std::array<double, 3> center{};
  double scale = 1.0;

  double value(const GridSpec& g, std::size_t flat) const {
    const auto p = g.node_point(flat);
    double v = 1.0;
    for (int a = 0; a < g.axes(); ++a)
      v *= window((p[static_cast<std::size_t>(a)] -
                   center[static_cast<std::size_t>(a)]) /
                  scale);
    return v;
  }
};

/// Nodes within the support of a spatial window, with cell_weight * phi
/// cached; the per-step spatial inner products reduce to dot products over
/// this list.
struct WindowStencil {
  std::vector<std::size_t> nodes;
  std::vector<double> cphi;

  void build(const GridSpec& g, const SpaceWindow& sw) {
    nodes.clear();
    cphi.clear();
    for (std::size_t s = 0; s < g.node_count(); ++s) {
      const double phi = sw.value(g, s);
      if (phi == 0.0) continue;
      nodes.push_back(s);
      cphi.push_back(g.cell_weight(s) * phi);
    }
  }
};

/// 4-point Gauss-Legendre nodes/weights on [0, 1].
constexpr double kGaussX[4] = {0.06943184420297371, 0.33000947820757187,
                               0.66999052179242813, 0.93056815579702629};
constexpr double kGaussW[4] = {0.17392742256872693, 0.32607257743127307,
                               0.32607257743127307, 0.17392742256872693};

void check_stride_one(const Trajectory& traj) {
  if (traj.states.size() < 2)
    throw std::invalid_argument("weak_residual: trajectory too short");
  for (std::size_t k = 0; k < traj.state_steps.size(); ++k)
    if (traj.state_steps[k] != static_cast<int>(k))
      throw std::invalid_argument(
          "weak_residual: needs a trajectory recorded at every step");
}

}  // namespace

SpeedReport finite_speed_check(const Trajectory& traj,
                               const std::array<double, 3>& x0, double R) {
  if (traj.states.empty())
    throw std::invalid_argument("finite_speed_check: no recorded states");
  if (!(R > 0.0))
    throw std::invalid_argument("finite_speed_check: radius must be positive");

  const GridSpec& g = traj.states.front().u.grid;
  const State& init = traj.states.front();
  for (std::size_t s = 0; s < init.u.size(); ++s) {
    if (node_distance(g, s, x0) <= R + kGeomFuzz) continue;
    if (init.u[s] != 0.0 || init.v[s] != 0.0)
      throw std::invalid_argument(
          "finite_speed_check: initial data not supported in B(x0, R)");
  }

  SpeedReport rep;
  rep.radius = R;
  const double t0 = init.t;
  for (const State& st : traj.states) {
    const double t = st.t - t0;
    const double bound = R + t + g.h;
    double leak = 0.0;
    for (std::size_t s = 0; s < st.u.size(); ++s) {
      if (node_distance(g, s, x0) <= bound + kGeomFuzz) continue;
      leak = std::max(leak, std::max(std::abs(st.u[s]), std::abs(st.v[s])));
    }
    rep.times.push_back(t);
    rep.leakage.push_back(leak);
    rep.max_leakage = std::max(rep.max_leakage, leak);
  }
  return rep;
}

SpeedReport domain_of_dependence_check(const State& a0, const State& b0,
                                       const std::array<double, 3>& x0,
                                       double R, double horizon,
                                       const SourceSpec& src,
                                       const DampingSpec& dmp) {
  if (!a0.u.grid.same_layout(b0.u.grid))
    throw std::invalid_argument(
        "domain_of_dependence_check: states on different grids");
  if (a0.t != b0.t)
    throw std::invalid_argument(
        "domain_of_dependence_check: states start at different times");
  if (!(R > 0.0))
    throw std::invalid_argument(
        "domain_of_dependence_check: radius must be positive");

  const GridSpec& g = a0.u.grid;
  for (std::size_t s = 0; s < a0.u.size(); ++s) {
    if (node_distance(g, s, x0) > R + kGeomFuzz) continue;
    if (a0.u[s] != b0.u[s] || a0.v[s] != b0.v[s])
      throw std::invalid_argument(
          "domain_of_dependence_check: states disagree on B(x0, R)");
  }

  SolveOptions opts;
  opts.snapshot_stride = 1;
  opts.record_ledger = false;
  const Trajectory ta = solve_on_patch(a0, horizon, src, dmp, opts);
  const Trajectory tb = solve_on_patch(b0, horizon, src, dmp, opts);

  SpeedReport rep;
  rep.radius = R;
  const double t0 = a0.t;
  const std::size_t common = std::min(ta.states.size(), tb.states.size());
  for (std::size_t k = 0; k < common; ++k) {
    const State& sa = ta.states[k];
    const State& sb = tb.states[k];
    const double t = sa.t - t0;
    if (t >= R) break;
    const double bound = R - t - g.h;
    double disc = 0.0;
    if (bound > 0.0) {
      for (std::size_t s = 0; s < sa.u.size(); ++s) {
        if (node_distance(g, s, x0) >= bound - kGeomFuzz) continue;
        disc = std::max(disc, std::max(std::abs(sa.u[s] - sb.u[s]),
                                       std::abs(sa.v[s] - sb.v[s])));
      }
    }
    rep.times.push_back(t);
    rep.dod_discrepancy.push_back(disc);
    rep.max_dod_discrepancy = std::max(rep.max_dod_discrepancy, disc);
  }
  return rep;
}

namespace {

/// One admissible basis element with its per-step spatial inner products:
/// W pairs the synchronized velocity with phi, G pairs -lap(u) with phi
/// (the summation-by-parts image of grad u . grad phi), F pairs the source
/// and damping terms with phi.  The *_abs series carry the same sums with
/// absolute values, for the residual normalization.
struct BasisElement {
  WindowStencil stencil;
  double at = 0.0;
  double tc = 0.0;
  std::vector<double> W, G, F, Wabs, Gabs, Fabs;
};

}  // namespace

VariationalResidual weak_residual(const Trajectory& traj,
                                  const SourceSpec& src,
                                  const DampingSpec& dmp,
                                  const TestFunctionBasis& basis) {
  check_stride_one(traj);
  src.validate();
  dmp.validate();
  if (basis.spatial_scales < 1 || basis.temporal_scales < 1 ||
      basis.centers < 1)
    throw std::invalid_argument("weak_residual: empty basis");

  const GridSpec& g = traj.states.front().u.grid;
  const double t0 = traj.states.front().t;
  const double span = traj.states.back().t - t0;
  const double dt = traj.dt;
  const std::size_t rows = traj.states.size();

  const double spatial_base = g.extent * 0.5;
  const double spatial_factors[3] = {1.0, 0.6, 0.36};
  const double temporal_factors[3] = {0.4, 0.25, 0.15};

  std::mt19937_64 rng(basis.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  VariationalResidual out;
  std::ostringstream desc;
  desc << basis.spatial_scales << "x" << basis.temporal_scales
       << " scales, " << basis.centers << " centers, seed=" << basis.seed;
  out.basis_descriptor = desc.str();

  std::vector<BasisElement> elements;
  for (int is = 0; is < basis.spatial_scales; ++is) {
    const double as = spatial_base * spatial_factors[is % 3] / (1 + is / 3);
    for (int it = 0; it < basis.temporal_scales; ++it) {
      const double at = span * temporal_factors[it % 3] / (1 + it / 3);
      for (int ic = 0; ic < basis.centers; ++ic) {
        SpaceWindow sw;
        sw.scale = as;
        bool feasible = at >= 4.0 * dt;
        for (int a = 0; a < g.axes(); ++a) {
          double lo, hi;
          if (g.geometry == Geometry::Radial3D) {
            lo = 0.0;
            hi = g.extent - as - 2.0 * g.h;
          } else {
            lo = g.axis_min(a) + as + 2.0 * g.h;
            hi = g.axis_min(a) + 2.0 * g.extent - as - 2.0 * g.h;
          }
          const double draw = unit(rng);
          if (hi < lo) {
            feasible = false;
            continue;
          }
          double c = lo + draw * (hi - lo);
          if (g.geometry == Geometry::Radial3D && c > 0.5 * as && c < as) {
            c = as;  // keep the window smooth across the origin
            if (c > hi) feasible = false;
          }
          sw.center[static_cast<std::size_t>(a)] = c;
        }
        const double tc_lo = -0.5 * at;
        const double tc_hi = span - at - 2.0 * dt;
        const double tdraw = unit(rng);
        if (!feasible || tc_hi < tc_lo) {
          ++out.rejected;
          continue;
        }

        BasisElement el;
        el.at = at;
        el.tc = tc_lo + tdraw * (tc_hi - tc_lo);
        el.stencil.build(g, sw);
        el.W.assign(rows, 0.0);
        el.G.assign(rows, 0.0);
        el.F.assign(rows, 0.0);
        el.Wabs.assign(rows, 0.0);
        el.Gabs.assign(rows, 0.0);
        el.Fabs.assign(rows, 0.0);
        elements.push_back(std::move(el));
      }
    }
  }

  // One sweep over the trajectory fills every element's inner products.
  Field nterm(g);
  for (std::size_t k = 0; k < rows; ++k) {
    const State& st = traj.states[k];
    const Field lap = apply_laplacian(st.u);
    for (std::size_t s = 0; s < nterm.size(); ++s)
      nterm[s] = eval_source(src, st.u[s]) + eval_damping(dmp, st.v[s]);

    for (BasisElement& el : elements) {
      double W = 0.0, G = 0.0, F = 0.0;
      double Wa = 0.0, Ga = 0.0, Fa = 0.0;
      for (std::size_t q = 0; q < el.stencil.nodes.size(); ++q) {
        const std::size_t s = el.stencil.nodes[q];
        const double cphi = el.stencil.cphi[q];
        W += cphi * st.v[s];
        G -= cphi * lap[s];
        F += cphi * nterm[s];
        Wa += std::abs(cphi * st.v[s]);
        Ga += std::abs(cphi * lap[s]);
        Fa += std::abs(cphi * nterm[s]);
      }
      el.W[k] = W;
      el.G[k] = G;
      el.F[k] = F;
      el.Wabs[k] = Wa;
      el.Gabs[k] = Ga;
      el.Fabs[k] = Fa;
    }
  }

  // Time integration: 4-point Gauss per step on linearly interpolated inner
  // products against the analytic temporal window.  The identity tested is
  // the first-derivative weak form
  //   -int int u_t phi_t + int int (grad u . grad phi + f phi + g phi)
  //     = int u_1 phi(x, 0),
  // equivalent to the second-derivative form after one more integration by
  // parts in time.
  for (BasisElement& el : elements) {
    double lhs = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k + 1 < rows; ++k) {
      const double cell_lo = k * dt;
      if (cell_lo + dt < el.tc - el.at || cell_lo > el.tc + el.at) continue;
      for (int q = 0; q < 4; ++q) {
        const double alpha = kGaussX[q];
        const double t = cell_lo + alpha * dt;
        const double xi = (t - el.tc) / el.at;
        const double wt = window(xi);
        const double wt1 = window_d1(xi) / el.at;
        if (wt == 0.0 && wt1 == 0.0) continue;
        const double wq = kGaussW[q] * dt;
        const double W = el.W[k] + alpha * (el.W[k + 1] - el.W[k]);
        const double G = el.G[k] + alpha * (el.G[k + 1] - el.G[k]);
        const double F = el.F[k] + alpha * (el.F[k + 1] - el.F[k]);
        const double Wa = el.Wabs[k] + alpha * (el.Wabs[k + 1] - el.Wabs[k]);
        const double Ga = el.Gabs[k] + alpha * (el.Gabs[k + 1] - el.Gabs[k]);
        const double Fa = el.Fabs[k] + alpha * (el.Fabs[k + 1] - el.Fabs[k]);
        lhs += wq * (-W * wt1 + (G + F) * wt);
        scale += wq * (Wa * std::abs(wt1) + (Ga + Fa) * std::abs(wt));
      }
    }
    const double wt_at_0 = window((0.0 - el.tc) / el.at);
    const double rhs = el.W[0] * wt_at_0;
    scale += el.Wabs[0] * std::abs(wt_at_0);

    const double residual = std::abs(lhs - rhs) / (1.0 + scale);
    out.residuals.push_back(residual);
    out.max_residual = std::max(out.max_residual, residual);
    ++out.evaluated;
  }
  return out;
}

std::vector<FnConvergenceRow> fn_convergence_check(
    const Field& u, const SourceSpec& src, double mtilde,
    const std::vector<int>& levels) {
  if (!(mtilde >= 1.0))
    throw std::domain_error("fn_convergence_check: need mtilde >= 1");
  SourceSpec base = src;
  base.truncation.reset();
  base.validate();

  std::vector<FnConvergenceRow> rows;
  rows.reserve(levels.size());
  for (const int n : levels) {
    if (n < 1)
      throw std::invalid_argument(
          "fn_convergence_check: truncation levels start at 1");
    SourceSpec trunc = base;
    trunc.truncation = n;
    Field diff(u.grid);
    for (std::size_t s = 0; s < u.size(); ++s)
      diff[s] = eval_source(trunc, u[s]) - eval_source(base, u[s]);
    rows.push_back({n, norm_lq(diff, mtilde)});
  }
  return rows;
}

}  // namespace wavepatch
