#include "wavepatch/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wavepatch {

namespace {

void laplacian_into(const Field& u, Field& out) {
  const GridSpec& g = u.grid;
  const double inv_h2 = 1.0 / (g.h * g.h);
  const int n = g.nodes_per_axis();

  switch (g.geometry) {
    case Geometry::Line1D: {
      out[0] = 0.0;
      out[static_cast<std::size_t>(n - 1)] = 0.0;
      for (int i = 1; i < n - 1; ++i) {
        const auto s = static_cast<std::size_t>(i);
        out[s] = (u[s + 1] - 2.0 * u[s] + u[s - 1]) * inv_h2;
      }
      return;
    }
    case Geometry::Radial3D: {
      out[0] = 6.0 * (u[1] - u[0]) * inv_h2;
      out[static_cast<std::size_t>(n - 1)] = 0.0;
      for (int i = 1; i < n - 1; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double di = static_cast<double>(i);
        out[s] = ((di + 1.0) * u[s + 1] - 2.0 * di * u[s] +
                  (di - 1.0) * u[s - 1]) *
                 inv_h2 / di;
      }
      return;
    }
    case Geometry::Box3D: {
      const std::size_t sn = static_cast<std::size_t>(n);
      const std::size_t sy = sn, sz = sn * sn;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            const std::size_t s = g.flat_index(i, j, k);
            if (i == 0 || i == n - 1 || j == 0 || j == n - 1 || k == 0 ||
                k == n - 1) {
              out[s] = 0.0;
              continue;
            }
            out[s] = (u[s + 1] + u[s - 1] + u[s + sy] + u[s - sy] +
                      u[s + sz] + u[s - sz] - 6.0 * u[s]) *
                     inv_h2;
          }
      return;
    }
  }
  throw std::logic_error("laplacian_into: unknown geometry");
}

void acceleration_into(const Field& u, const SourceSpec& src, Field& out) {
  laplacian_into(u, out);
  const GridSpec& g = u.grid;
  for (std::size_t s = 0; s < u.size(); ++s) {
    if (g.boundary_node(s)) continue;
    out[s] -= eval_source(src, u[s]);
  }
}

double gradient_energy(const Field& u) {
  const GridSpec& g = u.grid;
  const int n = g.nodes_per_axis();
  const double h = g.h;
  double acc = 0.0;
  switch (g.geometry) {
    case Geometry::Line1D: {
      for (int i = 0; i < n - 1; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double d = (u[s + 1] - u[s]) / h;
        acc += h * d * d;
      }
      return 0.5 * acc;
    }
    case Geometry::Radial3D: {
      // With w = rho * u and u(R) = 0 the radial gradient energy equals
      // 2 pi * int (dw/drho)^2 drho; the staggered sum telescopes with the
      // conservative stencil.
      for (int i = 0; i < n - 1; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double w0 = g.coord(0, i) * u[s];
        const double w1 = g.coord(0, i + 1) * u[s + 1];
        const double d = (w1 - w0) / h;
        acc += h * d * d;
      }
      return 2.0 * std::numbers::pi * acc;
    }
    case Geometry::Box3D: {
      const std::size_t sn = static_cast<std::size_t>(n);
      const std::size_t strides[3] = {1, sn, sn * sn};
      const double face = h * h * h;
      for (int axis = 0; axis < 3; ++axis) {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              const int along = axis == 0 ? i : axis == 1 ? j : k;
              if (along == n - 1) continue;
              const std::size_t s = g.flat_index(i, j, k);
              const double d = (u[s + strides[axis]] - u[s]) / h;
              acc += face * d * d;
            }
      }
      return 0.5 * acc;
    }
  }
  throw std::logic_error("gradient_energy: unknown geometry");
}

}  // namespace

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Completed: return "completed";
    case Outcome::BlewUp: return "blew-up";
    case Outcome::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

Field apply_laplacian(const Field& u) {
  Field out(u.grid);
  laplacian_into(u, out);
  return out;
}

Field acceleration(const Field& u, const SourceSpec& src) {
  Field out(u.grid);
  acceleration_into(u, src, out);
  return out;
}

double dissipation_rate(const Field& w, const DampingSpec& dmp) {
  double acc = 0.0;
  for (std::size_t s = 0; s < w.size(); ++s)
    acc += w.grid.cell_weight(s) * eval_damping(dmp, w[s]) * w[s];
  return acc;
}

EnergySample energy_sample(const Field& u, const Field& w,
                           const SourceSpec& src, const DampingSpec& dmp,
                           double t, double dissipation, double e0) {
  (void)dmp;
  EnergySample row;
  row.t = t;
  double kin = 0.0, pot = 0.0;
  for (std::size_t s = 0; s < u.size(); ++s) {
    const double c = u.grid.cell_weight(s);
    kin += c * w[s] * w[s];
    pot += c * source_antiderivative(src, u[s]);
  }
  row.kinetic = 0.5 * kin;
  row.gradient = gradient_energy(u);
  row.source_potential = pot;
  row.dissipation = dissipation;
  row.identity_residual = std::abs(row.kinetic + row.gradient +
                                   row.source_potential + dissipation - e0);
  return row;
}

EnergySample energy(const State& s, const SourceSpec& src) {
  EnergySample row =
      energy_sample(s.u, s.v, src, DampingSpec{}, s.t, 0.0, 0.0);
  row.identity_residual = 0.0;
  return row;
}

State step(const State& s, const SourceSpec& src, const DampingSpec& dmp) {
  SolveOptions opts;
  opts.snapshot_stride = 0;
  opts.record_ledger = false;
  Trajectory traj = solve_on_patch(s, s.u.grid.dt, src, dmp, opts);
  return traj.final_state();
}

Trajectory solve_on_patch(const State& s0, double horizon,
                          const SourceSpec& src, const DampingSpec& dmp,
                          const SolveOptions& opts) {
  if (!s0.u.grid.same_layout(s0.v.grid))
    throw std::invalid_argument("solve_on_patch: u and v on different grids");
  s0.u.grid.validate();
  src.validate();
  dmp.validate();
  if (!(horizon >= 0.0))
    throw std::invalid_argument("solve_on_patch: negative horizon");
  const GridSpec& grid = s0.u.grid;
  const double dt = grid.dt;
  const auto steps = static_cast<int>(std::llround(horizon / dt));
  if (std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, std::abs(horizon)))
    throw std::invalid_argument(
        "solve_on_patch: horizon is not a whole number of steps");

  Trajectory traj;
  traj.dt = dt;

  Field u = s0.u;
  Field w = s0.v;
  u.clamp_boundary();
  w.clamp_boundary();
  Field accel(grid), vhalf(grid);

  const auto record_state = [&](int k, double t) {
    traj.states.push_back({u, w, t});
    traj.state_steps.push_back(k);
  };

  // Synchronized step 0.
  acceleration_into(u, src, accel);
  double diss_rate_prev = dissipation_rate(w, dmp);
  double diss = 0.0;
  double e0 = 0.0;
  if (opts.record_ledger) {
    EnergySample first = energy_sample(u, w, src, dmp, s0.t, 0.0, 0.0);
    e0 = first.kinetic + first.gradient + first.source_potential;
    first.identity_residual = 0.0;
    traj.ledger.push_back(first);
  }
  traj.peak_abs_u = u.max_abs();
  record_state(0, s0.t);

  // Startup half step for the staggered velocity.
  const double half = 0.5 * dt;
  for (std::size_t s = 0; s < w.size(); ++s)
    vhalf[s] = grid.boundary_node(s)
                   ? 0.0
                   : w[s] + half * (accel[s] - eval_damping(dmp, w[s]));

  for (int k = 1; k <= steps; ++k) {
    const double t = s0.t + k * dt;
    for (std::size_t s = 0; s < u.size(); ++s) u[s] += dt * vhalf[s];
    acceleration_into(u, src, accel);
    for (std::size_t s = 0; s < u.size(); ++s) {
      if (grid.boundary_node(s)) {
        w[s] = 0.0;
        vhalf[s] = 0.0;
        continue;
      }
      const double rhs = vhalf[s] + half * accel[s];
      const double ws = solve_damping_update(vhalf[s], rhs, half, dmp);
      w[s] = ws;
      vhalf[s] = 2.0 * ws - vhalf[s];
    }

    if (!u.all_finite() || !w.all_finite()) {
      traj.outcome = Outcome::NumericalFailure;
      traj.outcome_time = t;
      traj.steps = k;
      traj.dissipation_total = diss;
      return traj;
    }

    const double rate = dissipation_rate(w, dmp);
    diss += half * (diss_rate_prev + rate);
    diss_rate_prev = rate;
    if (opts.record_ledger)
      traj.ledger.push_back(energy_sample(u, w, src, dmp, t, diss, e0));

    const double amp = u.max_abs();
    traj.peak_abs_u = std::max(traj.peak_abs_u, amp);

    const bool blew = amp >= opts.blowup_threshold;
    const bool last = blew || k == steps;
    if ((opts.snapshot_stride > 0 && k % opts.snapshot_stride == 0) || last)
      record_state(k, t);

    if (blew) {
      traj.outcome = Outcome::BlewUp;
      traj.outcome_time = t;
      traj.steps = k;
      traj.dissipation_total = diss;
      return traj;
    }
  }

  traj.outcome = Outcome::Completed;
  traj.outcome_time = s0.t + steps * dt;
  traj.steps = steps;
  traj.dissipation_total = diss;
  return traj;
}

namespace {

double ledger_bracket(const EnergySample& row) {
  return 2.0 * (row.kinetic + row.gradient);
}

}  // namespace

AprioriEnvelope fit_envelope(const Trajectory& traj, const SourceSpec& src,
                             const DampingSpec& dmp) {
  if (traj.ledger.empty())
    throw std::invalid_argument("fit_envelope: trajectory has no ledger");
  dmp.validate();

  const double t0 = traj.ledger.front().t;
  const double t_final = traj.ledger.back().t;
  const double span = t_final - t0;

  AprioriEnvelope env;
  env.initial_bracket = ledger_bracket(traj.ledger.front());

  // Young constant for ab <= eps1 a^{m+1} + C_eps1 b^{mtilde} at eps1 = l_m/4,
  // times an empirical Lipschitz ratio of the source between the first and
  // last snapshots.  This fixes the exponential rate; c_bar then absorbs
  // whatever growth the rate alone does not cover.
  const double mt = dmp.m > 0.0 ? dmp.mtilde() : 2.0;
  double lip = 1.0;
  if (traj.states.size() >= 2) {
    const LipschitzProbe probe =
        lipschitz_probe(src, traj.states.front().u, traj.states.back().u,
                        0.25, mt);
    if (!probe.skipped && std::isfinite(probe.ratio_fractional))
      lip = std::max(lip, probe.ratio_fractional);
  }
  double c_exp = 0.0;
  if (dmp.a() > 0.0) {
    const double eps1 = dmp.a() / 4.0;
    const double c_eps1 =
        (1.0 / mt) * std::pow(eps1 * (dmp.m + 1.0), -mt / (dmp.m + 1.0));
    c_exp = c_eps1 * std::pow(lip, mt);
  } else {
    c_exp = std::pow(lip, mt);
  }
  if (span > 0.0) c_exp = std::min(c_exp, 600.0 / span);
  env.c_exp = c_exp;

  double c_bar = 0.0;
  for (const EnergySample& row : traj.ledger) {
    const double t = row.t - t0;
    if (t <= 0.0) continue;
    const double needed =
        (ledger_bracket(row) * std::exp(-c_exp * t) - env.initial_bracket) / t;
    c_bar = std::max(c_bar, needed);
  }
  env.c_bar = c_bar > 0.0 ? 1.05 * c_bar + 1e-12 : 0.0;

  if (dmp.a() > 0.0)
    env.budget_m1 = 1.05 * traj.dissipation_total / dmp.a() + 1e-12;

  return env;
}

AprioriReport check_apriori(const Trajectory& traj, const DampingSpec& dmp,
                            const AprioriEnvelope& env) {
  if (traj.ledger.empty())
    throw std::invalid_argument("check_apriori: trajectory has no ledger");
  dmp.validate();

  AprioriReport rep;
  rep.bracket_ok = true;
  rep.min_margin = std::numeric_limits<double>::infinity();
  const double t0 = traj.ledger.front().t;
  for (const EnergySample& row : traj.ledger) {
    const double bound = env.eval(row.t - t0);
    const double margin = bound - ledger_bracket(row);
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < 0.0) rep.bracket_ok = false;
  }

  if (dmp.a() > 0.0) {
    const double used = traj.dissipation_total / dmp.a();
    rep.budget_margin = env.budget_m1 - used;
    rep.budget_ok = rep.budget_margin >= 0.0;
  } else {
    rep.budget_skipped = true;
    rep.budget_ok = true;
    rep.budget_margin = 0.0;
  }

  std::ostringstream details;
  details << "rows=" << traj.ledger.size() << " initial_bracket="
         << env.initial_bracket << " c_bar=" << env.c_bar
         << " c_exp=" << env.c_exp << " budget_m1=" << env.budget_m1
         << " min_margin=" << rep.min_margin;
  rep.details = details.str();
  return rep;
}

}  // namespace wavepatch
