#include "wavepatch/phase_explorer.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "wavepatch/nonlinearity.hpp"
#include "wavepatch/parallel.hpp"

namespace wavepatch {

namespace {

double smooth01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

int outcome_code(CellOutcome o) {
  switch (o) {
    case CellOutcome::Survived: return 1;
    case CellOutcome::BlewUp: return 0;
    case CellOutcome::Failed: return -1;
  }
  return -1;
}

}  // namespace

std::string cell_outcome_name(CellOutcome o) {
  switch (o) {
    case CellOutcome::Survived: return "survived";
    case CellOutcome::BlewUp: return "blew-up";
    case CellOutcome::Failed: return "failed";
  }
  return "unknown";
}

void SweepProtocol::validate() const {
  grid.validate();
  if (!(horizon > 0.0))
    throw std::invalid_argument("SweepProtocol: horizon must be positive");
  const double steps = horizon / grid.dt;
  if (std::abs(steps - std::llround(steps)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument(
        "SweepProtocol: horizon is not a whole number of steps");
  if (!(bump_plateau > 0.0) || !(bump_support > bump_plateau) ||
      !(bump_support <= grid.extent))
    throw std::invalid_argument(
        "SweepProtocol: need 0 < plateau < support <= extent");
  if (source_sign != 1.0 && source_sign != -1.0)
    throw std::invalid_argument("SweepProtocol: source sign must be +1 or -1");
  if (!(source_coeff >= 0.0) || !(damping_coeff >= 0.0))
    throw std::invalid_argument("SweepProtocol: negative coefficient");
  if (!(blowup_threshold > 0.0))
    throw std::invalid_argument("SweepProtocol: threshold must be positive");
}

SweepProtocol default_sweep_protocol() {
  SweepProtocol proto;
  proto.grid.geometry = Geometry::Line1D;
  proto.grid.extent = 1.0;
  proto.grid.h = 1.0 / 128.0;
  proto.grid.dt = 2e-3;
  return proto;
}

std::vector<double> default_p_values() { return {2.0, 2.75, 3.5, 4.25, 5.0}; }

std::vector<double> default_m_values() { return {1.0, 1.5, 2.5, 4.0, 12.0}; }

std::vector<double> default_data_scales() { return {0.5, 1.0, 2.0, 4.0, 8.0}; }

Field sweep_data(const SweepProtocol& proto, double scale) {
  proto.validate();
  const double plateau = proto.bump_plateau;
  const double support = proto.bump_support;
  return make_field(proto.grid, [&](const std::array<double, 3>& pt) {
    const double rho =
        std::sqrt(pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2]);
    if (rho >= support) return 0.0;
    if (rho <= plateau) return scale;
    return scale * (1.0 - smooth01((rho - plateau) / (support - plateau)));
  });
}

PhaseCell run_cell(double p, double m, double data_scale,
                   const SweepProtocol& proto) {
  PhaseCell cell;
  cell.p = p;
  cell.m = m;
  cell.data_scale = data_scale;
  try {
    SourceSpec src;
    src.p = p;
    src.coeff = proto.source_coeff;
    src.sign = proto.source_sign;
    DampingSpec dmp;
    dmp.m = m;
    dmp.l_m = dmp.L_m = proto.damping_coeff;

    State s0;
    s0.u = sweep_data(proto, data_scale);
    s0.v = Field(proto.grid);
    s0.t = 0.0;

    SolveOptions opts;
    opts.snapshot_stride = 0;
    opts.record_ledger = false;
    opts.blowup_threshold = proto.blowup_threshold;

    const Trajectory traj = solve_on_patch(s0, proto.horizon, src, dmp, opts);
    cell.t_star = traj.outcome_time;
    cell.peak_abs_u = traj.peak_abs_u;
    switch (traj.outcome) {
      case Outcome::Completed:
        cell.outcome = CellOutcome::Survived;
        break;
      case Outcome::BlewUp:
        cell.outcome = CellOutcome::BlewUp;
        break;
      case Outcome::NumericalFailure:
        cell.outcome = CellOutcome::Failed;
        cell.failure = "non-finite field values";
        break;
    }
  } catch (const std::exception& e) {
    cell.outcome = CellOutcome::Failed;
    cell.failure = e.what();
    cell.t_star = 0.0;
  }
  return cell;
}

const PhaseCell& PhaseDiagram::cell(std::size_t i_p, std::size_t i_m) const {
  if (i_p >= p_values.size() || i_m >= m_values.size())
    throw std::out_of_range("PhaseDiagram::cell: index outside the grid");
  return cells[i_p * m_values.size() + i_m];
}

PhaseDiagram sweep(const std::vector<double>& p_values,
                   const std::vector<double>& m_values, double data_scale,
                   const SweepProtocol& proto, int jobs) {
  proto.validate();
  if (p_values.empty() || m_values.empty())
    throw std::invalid_argument("sweep: empty exponent grid");
  if (proto.source_sign != -1.0)
    throw std::invalid_argument("sweep: protocol must use a focusing source");
  if (!(data_scale >= 0.0))
    throw std::invalid_argument("sweep: negative data scale");

  PhaseDiagram diagram;
  diagram.p_values = p_values;
  diagram.m_values = m_values;
  diagram.data_scale = data_scale;
  diagram.protocol = proto;
  diagram.cells.resize(p_values.size() * m_values.size());

  parallel_for(diagram.cells.size(), jobs, [&](std::size_t idx) {
    const std::size_t i_p = idx / m_values.size();
    const std::size_t i_m = idx % m_values.size();
    diagram.cells[idx] =
        run_cell(p_values[i_p], m_values[i_m], data_scale, proto);
  });
  return diagram;
}

double DichotomySplit::survived_fraction() const {
  if (strong_total == 0) return 1.0;
  return static_cast<double>(strong_survived) /
         static_cast<double>(strong_total);
}

double DichotomySplit::blewup_fraction() const {
  if (weak_total == 0) return 1.0;
  return static_cast<double>(weak_blewup) / static_cast<double>(weak_total);
}

DichotomySplit split_by_damping_strength(const PhaseDiagram& diagram) {
  DichotomySplit split;
  for (const PhaseCell& c : diagram.cells) {
    if (c.m >= c.p) {
      ++split.strong_total;
      if (c.outcome == CellOutcome::Survived) ++split.strong_survived;
    } else {
      ++split.weak_total;
      if (c.outcome == CellOutcome::BlewUp) ++split.weak_blewup;
    }
  }
  return split;
}

std::vector<PhaseCell> blowup_time_scaling(double p, double m,
                                           const std::vector<double>& scales,
                                           const SweepProtocol& proto,
                                           int jobs) {
  proto.validate();
  if (!(m < p))
    throw std::invalid_argument(
        "blowup_time_scaling: needs weak damping (m < p)");
  if (proto.source_sign != -1.0)
    throw std::invalid_argument(
        "blowup_time_scaling: protocol must use a focusing source");
  if (scales.empty())
    throw std::invalid_argument("blowup_time_scaling: empty scale list");

  std::vector<PhaseCell> table(scales.size());
  parallel_for(table.size(), jobs, [&](std::size_t i) {
    table[i] = run_cell(p, m, scales[i], proto);
  });
  return table;
}

bool t_star_nonincreasing(const std::vector<PhaseCell>& table) {
  bool have_prev = false;
  double prev = 0.0;
  for (const PhaseCell& c : table) {
    if (c.outcome != CellOutcome::BlewUp) continue;
    if (have_prev && c.t_star > prev + 1e-12) return false;
    prev = c.t_star;
    have_prev = true;
  }
  return true;
}

void write_diagram_csv(std::ostream& os, const PhaseDiagram& diagram) {
  os << "p,m,lambda,outcome,t_star\n";
  os << std::setprecision(12);
  for (const PhaseCell& c : diagram.cells) {
    os << c.p << ',' << c.m << ',' << c.data_scale << ','
       << cell_outcome_name(c.outcome) << ',' << c.t_star << '\n';
  }
}

void write_region_map(std::ostream& os, const PhaseDiagram& diagram) {
  os << "# survival map at data scale " << diagram.data_scale << "\n";
  os << "# columns: p m code (1 survived, 0 blew up, -1 failed)\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < diagram.p_values.size(); ++i) {
    for (std::size_t j = 0; j < diagram.m_values.size(); ++j) {
      const PhaseCell& c = diagram.cell(i, j);
      os << c.p << ' ' << c.m << ' ' << outcome_code(c.outcome) << '\n';
    }
    os << '\n';
  }
}

}  // namespace wavepatch
