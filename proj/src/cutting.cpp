#include "wavepatch/cutting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wavepatch {

namespace {

constexpr double kAlignTol = 1e-9;

double cbrt_pos(double x) { return std::cbrt(x); }

GridSpec sobolev_reference_grid(Geometry geom) {
  GridSpec g;
  g.geometry = geom;
  g.extent = 1.0;
  if (geom == Geometry::Box3D) {
    g.h = 1.0 / 32.0;
    g.dt = 0.4 * g.h;
  } else {
    g.h = 1.0 / 512.0;
    g.dt = 0.9 * g.h;
  }
  g.validate();
  return g;
}

double compute_sobolev(Geometry geom) {
  const GridSpec g = sobolev_reference_grid(geom);
  const std::array<double, 4> widths{0.08, 0.15, 0.3, 0.5};
  double best = 0.0;
  for (double w : widths) {
    const auto gauss = [&](const std::array<double, 3>& x) {
      const double rho2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      return std::exp(-0.5 * rho2 / (w * w));
    };
    const auto bump = [&](const std::array<double, 3>& x) {
      const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      if (rho >= w) return 0.0;
      const double t = 1.0 - (rho / w) * (rho / w);
      return t * t * t;
    };
    const auto tent = [&](const std::array<double, 3>& x) {
      const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      return std::max(0.0, 1.0 - rho / w);
    };
    for (const auto& shape : {std::function<double(const std::array<double, 3>&)>(gauss),
                              std::function<double(const std::array<double, 3>&)>(bump),
                              std::function<double(const std::array<double, 3>&)>(tent)}) {
      const Field u = make_field(g, shape);
      const double denom = seminorm_grad(u) + norm_lq(u, 2.0);
      if (denom <= 0.0) continue;
      best = std::max(best, norm_lq(u, 6.0) / denom);
    }
  }
  return best * best * best;
}

}  // namespace

void CutPlan::validate() const {
  if (!(K > 0.0)) throw std::invalid_argument("cut plan requires a positive budget K");
  if (!(r > 0.0)) throw std::invalid_argument("cut plan requires a positive radius");
  if (!(sobolev_C > 0.0)) throw std::invalid_argument("cut plan requires a positive embedding constant");
  if (!(omega3 > 0.0)) throw std::invalid_argument("cut plan requires a positive ball volume");
}

double sobolev_constant(Geometry geom) {
  switch (geom) {
    case Geometry::Line1D: {
      static const double c = compute_sobolev(Geometry::Line1D);
      return c;
    }
    case Geometry::Radial3D: {
      static const double c = compute_sobolev(Geometry::Radial3D);
      return c;
    }
    case Geometry::Box3D: {
      static const double c = compute_sobolev(Geometry::Box3D);
      return c;
    }
  }
  throw std::invalid_argument("unknown geometry");
}

std::array<double, 3> snap_to_node(const GridSpec& grid,
                                   const std::array<double, 3>& point) {
  std::array<double, 3> snapped{0.0, 0.0, 0.0};
  const int n = grid.nodes_per_axis();
  for (int a = 0; a < grid.axes(); ++a) {
    const double lo = grid.axis_min(a);
    long idx = std::lround((point[a] - lo) / grid.h);
    idx = std::clamp(idx, 0L, static_cast<long>(n - 1));
    snapped[a] = grid.coord(a, static_cast<int>(idx));
  }
  return snapped;
}

CutPlan choose_radius(const Field& u0, const Field& u1, double K,
                      const std::vector<std::array<double, 3>>& centers) {
  if (!u0.grid.same_layout(u1.grid))
    throw std::invalid_argument("initial data fields must share one grid");
  if (!(K > 0.0)) throw std::invalid_argument("budget K must be positive");
  if (centers.empty()) throw std::invalid_argument("at least one probe center is required");

  const double global = seminorm_grad(u0) + norm_lq(u1, 2.0);
  if (!(global < K))
    throw std::invalid_argument("budget K must exceed the global energy norm of the data");

  CutPlan plan;
  plan.K = K;
  plan.sobolev_C = sobolev_constant(u0.grid.geometry);
  const double s = cbrt_pos(plan.sobolev_C * plan.omega3);
  const double cap_eighth = K / (8.0 * s);
  const double cap_quarter = K / 4.0;
  const double grad_cap = std::min(cap_quarter, cap_eighth);

  const GridSpec& g = u0.grid;
  for (double r = g.extent; r > 8.0 * g.h + 1e-12; r *= 0.5) {
    const double cells = r / g.h;
    if (std::abs(cells - std::round(cells)) > kAlignTol * std::max(1.0, cells)) continue;
    bool pass = true;
    for (const auto& c : centers) {
      const double n0 = norm_lq_ball(u0, c, r, 2.0);
      const double n1 = norm_lq_ball(u1, c, r, 2.0);
      const double ng = seminorm_grad_ball(u0, c, r);
      if (!(n0 < cap_eighth && n1 < cap_quarter && ng < grad_cap &&
            2.0 * s * (ng + n0) < cap_quarter)) {
        pass = false;
        break;
      }
    }
    if (pass) {
      plan.r = r;
      return plan;
    }
  }
  throw std::runtime_error(
      "no localization radius above 8h satisfies the smallness conditions; "
      "refine the grid or enlarge the budget");
}

ThetaCutoff build_theta(const std::array<double, 3>& center, double r,
                        const GridSpec& grid) {
  if (!(r >= 4.0 * grid.h))
    throw std::invalid_argument("cutoff radius must be at least 4h");
  if (grid.geometry == Geometry::Radial3D) {
    if (std::abs(center[0]) > 1e-12 || std::abs(center[1]) > 1e-12 ||
        std::abs(center[2]) > 1e-12)
      throw std::invalid_argument("radial cutoffs must be centered at the origin");
  }

  const int segments =
      2 * std::max(8, static_cast<int>(std::ceil(2.0 * r / grid.h)));
  const double q = r / segments;
  std::vector<double> prof(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    const double rho = i * q;
    prof[static_cast<std::size_t>(i)] =
        std::clamp(2.0 - 2.0 * rho / r, 0.0, 1.0);
  }
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> next = prof;
    for (int i = segments / 2 + 1; i < segments; ++i) {
      const auto u = static_cast<std::size_t>(i);
      next[u] = 0.25 * prof[u - 1] + 0.5 * prof[u] + 0.25 * prof[u + 1];
    }
    prof.swap(next);
  }

  ThetaCutoff theta;
  theta.center = center;
  theta.r = r;
  theta.profile = Field(grid);
  for (std::size_t n = 0; n < theta.profile.size(); ++n) {
    const double d = node_distance(grid, n, center);
    double v = 0.0;
    if (d <= 0.5 * r) {
      v = 1.0;
    } else if (d < r) {
      const double x = d / q;
      const auto i = static_cast<std::size_t>(x);
      const double frac = x - static_cast<double>(i);
      const std::size_t hi = std::min(i + 1, prof.size() - 1);
      v = prof[i] * (1.0 - frac) + prof[hi] * frac;
    }
    theta.profile[n] = v;
  }

  double max_grad = 0.0;
  const int n = grid.nodes_per_axis();
  for (std::size_t flat = 0; flat < theta.profile.size(); ++flat) {
    std::size_t rem = flat;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < grid.axes(); ++a) {
      idx[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    std::size_t stride = 1;
    for (int a = 0; a < grid.axes(); ++a) {
      if (idx[static_cast<std::size_t>(a)] + 1 < n) {
        const double diff =
            std::abs(theta.profile[flat + stride] - theta.profile[flat]);
        max_grad = std::max(max_grad, diff / grid.h);
      }
      stride *= static_cast<std::size_t>(n);
    }
  }
  theta.max_gradient = max_grad;
  return theta;
}

GridSpec make_patch_grid(const GridSpec& global,
                         const std::array<double, 3>& center, double r) {
  const double cells = r / global.h;
  if (std::abs(cells - std::round(cells)) > kAlignTol * std::max(1.0, cells))
    throw std::invalid_argument("patch radius must be a whole number of cells");
  for (int a = 0; a < global.axes(); ++a) {
    const double off = (center[a] - global.axis_min(a)) / global.h;
    if (std::abs(off - std::round(off)) > kAlignTol * std::max(1.0, std::abs(off)) + kAlignTol)
      throw std::invalid_argument("patch center must sit on a grid node");
  }
  if (global.geometry == Geometry::Radial3D &&
      (std::abs(center[0]) > 1e-12 || std::abs(center[1]) > 1e-12 ||
       std::abs(center[2]) > 1e-12))
    throw std::invalid_argument("radial patches must be centered at the origin");

  GridSpec patch = global;
  patch.extent = r;
  if (global.geometry != Geometry::Radial3D) patch.origin = center;
  patch.validate();
  return patch;
}

Field restrict_field(const Field& global_field, const GridSpec& patch) {
  const GridSpec& g = global_field.grid;
  if (patch.geometry != g.geometry)
    throw std::invalid_argument("patch and global grids must share a geometry");
  if (std::abs(patch.h - g.h) > 1e-15)
    throw std::invalid_argument("patch and global grids must share the node spacing");

  const int gn = g.nodes_per_axis();
  const int pn = patch.nodes_per_axis();
  Field out(patch);
  std::array<long, 3> base{0, 0, 0};
  for (int a = 0; a < g.axes(); ++a) {
    const double off = (patch.axis_min(a) - g.axis_min(a)) / g.h;
    base[static_cast<std::size_t>(a)] = std::lround(off);
    if (std::abs(off - static_cast<double>(base[static_cast<std::size_t>(a)])) >
        1e-6)
      throw std::invalid_argument("patch nodes must align with global nodes");
  }
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t rem = flat;
    std::array<long, 3> gi{0, 0, 0};
    bool inside = true;
    for (int a = patch.axes() - 1; a >= 0; --a) {  // axis 2 varies fastest
      const long pi = static_cast<long>(rem % static_cast<std::size_t>(pn));
      rem /= static_cast<std::size_t>(pn);
      gi[static_cast<std::size_t>(a)] = base[static_cast<std::size_t>(a)] + pi;
      if (gi[static_cast<std::size_t>(a)] < 0 ||
          gi[static_cast<std::size_t>(a)] >= gn)
        inside = false;
    }
    if (!inside) continue;
    out[flat] = global_field[g.flat_index(static_cast<int>(gi[0]),
                                          static_cast<int>(gi[1]),
                                          static_cast<int>(gi[2]))];
  }
  return out;
}

CutData cut_data(const Field& u0, const Field& u1,
                 const std::array<double, 3>& center, const CutPlan& plan) {
  plan.validate();
  if (!u0.grid.same_layout(u1.grid))
    throw std::invalid_argument("initial data fields must share one grid");

  const GridSpec& g = u0.grid;
  CutData out;
  out.center = snap_to_node(g, center);

  const ThetaCutoff theta = build_theta(out.center, plan.r, g);
  Field cut0(g);
  for (std::size_t i = 0; i < cut0.size(); ++i)
    cut0[i] = theta.profile[i] * u0[i];

  const GridSpec patch = make_patch_grid(g, out.center, plan.r);
  out.u0 = restrict_field(cut0, patch);
  out.u1 = restrict_field(u1, patch);
  out.u0.clamp_boundary();
  out.u1.clamp_boundary();

  CutBoundReport& rep = out.report;
  rep.grad_u0_ball = seminorm_grad_ball(u0, out.center, plan.r);
  rep.u0_l2_ball = norm_lq_ball(u0, out.center, plan.r, 2.0);
  rep.u0_l6_ball = norm_lq_ball(u0, out.center, plan.r, 6.0);
  rep.u1_ball = norm_lq_ball(u1, out.center, plan.r, 2.0);
  rep.theta_inf = theta.profile.max_abs();
  rep.grad_theta_inf = theta.max_gradient;
  rep.chain_bound =
      rep.theta_inf * rep.grad_u0_ball + rep.grad_theta_inf * rep.u0_l2_ball;
  rep.holder_majorant = 2.0 * cbrt_pos(plan.omega3) * rep.u0_l6_ball;
  rep.sobolev_majorant = 2.0 * cbrt_pos(plan.sobolev_C * plan.omega3) *
                         (rep.grad_u0_ball + rep.u0_l2_ball);
  rep.grad_cut_ball = seminorm_grad_ball(cut0, out.center, plan.r);
  rep.total = rep.grad_cut_ball + rep.u1_ball;
  rep.chain_ok = rep.chain_bound < 0.5 * plan.K;
  rep.u1_ok = rep.u1_ball < 0.25 * plan.K;
  rep.total_ok = rep.total < plan.K;
  rep.margin = (plan.K - rep.total) / plan.K;
  return out;
}

}  // namespace wavepatch
