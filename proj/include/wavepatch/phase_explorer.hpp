/// @file phase_explorer.hpp
/// Sweeps the source/damping exponent plane at fixed initial data, recording
/// per cell whether the run survives to the horizon or the amplitude escapes.
/// With a focusing source and large data the plane splits along m = p: strong
/// damping (m >= p) keeps runs alive, weak damping (m < p) lets them blow up.
/// Survival here is finite-horizon censoring, not a global-existence proof,
/// and blow-up is amplitude escape past a threshold, a numerical proxy.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "wavepatch/gridfield.hpp"
#include "wavepatch/local_solver.hpp"

namespace wavepatch {

enum class CellOutcome { Survived, BlewUp, Failed };

std::string cell_outcome_name(CellOutcome o);

/// Fixed run recipe shared by every cell of a sweep: same grid, data shape,
/// horizon, and escape threshold, so outcomes are comparable across the
/// exponent plane.
struct SweepProtocol {
  GridSpec grid;
  /// Default 40 = 20 crossings of the default extent-1 domain.
  double horizon = 40.0;
  /// Initial displacement is scale * plateau bump at the origin, zero
  /// initial velocity.
  double bump_plateau = 0.1;
  double bump_support = 0.35;
  double source_coeff = 1.0;
  double source_sign = -1.0;
  double damping_coeff = 1.0;
  double blowup_threshold = 1e8;

  void validate() const;
};

/// Line grid of extent 1 at h = 1/128, dt = 2e-3, horizon 40.
SweepProtocol default_sweep_protocol();

/// Default exponent grids and data scales for the 5x5 survey.  The m grid
/// stays off the m = p diagonal so no cell is classified ambiguously.
std::vector<double> default_p_values();
std::vector<double> default_m_values();
std::vector<double> default_data_scales();

/// The shared initial displacement: scale times a quintic-smoothstep plateau
/// bump centered at the origin.
Field sweep_data(const SweepProtocol& proto, double scale);

struct PhaseCell {
  double p = 0.0;
  double m = 0.0;
  double data_scale = 0.0;
  CellOutcome outcome = CellOutcome::Failed;
  /// Horizon for Survived, detection time otherwise.
  double t_star = 0.0;
  double peak_abs_u = 0.0;
  /// Diagnostic message for Failed cells.
  std::string failure;
};

struct PhaseDiagram {
  std::vector<double> p_values;
  std::vector<double> m_values;
  double data_scale = 0.0;
  SweepProtocol protocol;
  /// Row-major: cells[i * m_values.size() + j] is (p_values[i], m_values[j]).
  std::vector<PhaseCell> cells;

  const PhaseCell& cell(std::size_t i_p, std::size_t i_m) const;
};

/// Survival/escape counts split by damping strength relative to the source.
struct DichotomySplit {
  std::size_t strong_total = 0;  ///< cells with m >= p
  std::size_t strong_survived = 0;
  std::size_t weak_total = 0;  ///< cells with m < p
  std::size_t weak_blewup = 0;

  /// Fraction of m >= p cells that survived (1 when there are none).
  double survived_fraction() const;
  /// Fraction of m < p cells that blew up (1 when there are none).
  double blewup_fraction() const;
};

/// One run at the protocol's data shape.  Never throws for a bad exponent
/// pair; the cell comes back Failed with the reason recorded.
PhaseCell run_cell(double p, double m, double data_scale,
                   const SweepProtocol& proto);

/// Full rectangular sweep, cells computed concurrently (jobs <= 0 uses the
/// hardware concurrency).  Results are deterministic and independent of the
/// worker count.  Requires a focusing source (sign -1) in the protocol.
PhaseDiagram sweep(const std::vector<double>& p_values,
                   const std::vector<double>& m_values, double data_scale,
                   const SweepProtocol& proto, int jobs = 0);

DichotomySplit split_by_damping_strength(const PhaseDiagram& diagram);

/// Blow-up time as a function of the data scale at one weak-damping exponent
/// pair (requires m < p and a focusing protocol).  Scales that survive the
/// horizon stay in the table but are excluded from monotonicity checks.
std::vector<PhaseCell> blowup_time_scaling(double p, double m,
                                           const std::vector<double>& scales,
                                           const SweepProtocol& proto,
                                           int jobs = 0);

/// True when detection times over the BlewUp cells, taken in table order,
/// never increase.  Survived and Failed cells are skipped.
bool t_star_nonincreasing(const std::vector<PhaseCell>& table);

/// CSV with header "p,m,lambda,outcome,t_star", one row per cell.
void write_diagram_csv(std::ostream& os, const PhaseDiagram& diagram);

/// Gnuplot-ready map: "p m code" triples, one block per p value separated by
/// blank lines; code 1 = survived, 0 = blew up, -1 = failed.
void write_region_map(std::ostream& os, const PhaseDiagram& diagram);

}  // namespace wavepatch
