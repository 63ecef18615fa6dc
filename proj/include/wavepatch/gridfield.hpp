/// @file gridfield.hpp
/// @brief Uniform computational grids, nodal fields, discrete norms, and
///        snapshot serialization.
///
/// Three geometries are supported:
///   - Line1D:   the interval [origin - extent, origin + extent]
///   - Radial3D: radial profiles on [0, extent], carrying the 4*pi*rho^2
///               measure in every integral (fields are functions of radius)
///   - Box3D:    the cube [origin - extent, origin + extent]^3
///
/// Nodes are spaced h apart along every axis.  Dirichlet boundary nodes are
/// the interval/cube faces; the radial origin rho = 0 is a regular (free)
/// node.  Quadrature uses dual cells clipped to the domain: weight h per
/// interior node and h/2 at the ends, tensorized across axes, with the
/// 4*pi*rho^2 factor folded in for Radial3D.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace wavepatch {

enum class Geometry { Line1D, Radial3D, Box3D };

std::string geometry_name(Geometry g);
Geometry parse_geometry(const std::string& name);

struct GridSpec {
  Geometry geometry = Geometry::Line1D;
  double extent = 1.0;                  // half-width (Line1D/Box3D) or radius (Radial3D)
  double h = 1.0 / 64.0;                // node spacing, equal on all axes
  double dt = 0.9 / 64.0;               // time step carried with the grid
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  /// Stability bound on dt/h for the explicit stencil.  Unit ratio is part
  /// of the contract for Line1D/Radial3D: at dt = h the stencil's influence
  /// cone coincides with the physical speed-1 cone exactly, which the
  /// cone-sharp checks rely on.
  static double cfl_limit(Geometry g);

  int axes() const { return geometry == Geometry::Box3D ? 3 : 1; }
  int nodes_per_axis() const;
  std::size_t node_count() const;

  double axis_min(int axis) const;
  double coord(int axis, int i) const { return axis_min(axis) + i * h; }
  std::array<double, 3> node_point(std::size_t flat) const;
  std::size_t flat_index(int i, int j = 0, int k = 0) const;

  /// True for nodes pinned to zero by the Dirichlet condition.
  bool boundary_node(std::size_t flat) const;

  /// Quadrature weight of the node's dual cell (includes the radial measure).
  double cell_weight(std::size_t flat) const;

  bool same_layout(const GridSpec& other) const;

  /// Throws std::invalid_argument when the spec is unusable: non-positive
  /// sizes, extent not a node multiple of h, fewer than 8 nodes per axis,
  /// dt/h above the stability bound, or a non-zero radial origin.
  void validate() const;
};

struct Field {
  GridSpec grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const GridSpec& g) : grid(g), values(g.node_count(), 0.0) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }

  double max_abs() const;
  bool all_finite() const;

  /// Zeroes the Dirichlet boundary nodes in place.
  void clamp_boundary();
};

Field make_field(const GridSpec& grid,
                 const std::function<double(const std::array<double, 3>&)>& f);

inline constexpr double kNormInf = std::numeric_limits<double>::infinity();

/// Lebesgue q-norm, q in [1, inf].  q = kNormInf gives the max norm.
double norm_lq(const Field& u, double q);

/// Discrete |grad u|_2 seminorm: centered differences at interior nodes,
/// one-sided at the boundary.
double seminorm_grad(const Field& u);

/// Full H1 norm: sqrt(|u|_2^2 + |grad u|_2^2).
double norm_h1(const Field& u);

/// Interpolation surrogate for the H^{1-eps} norm: |u|_2^eps * |u|_H1^(1-eps),
/// eps in (0, 1).
double norm_h1me(const Field& u, double eps);

/// Ball-restricted variants over B(center, radius); nodes within
/// radius + 1e-12 are included with their full dual-cell weight.
double norm_lq_ball(const Field& u, const std::array<double, 3>& center,
                    double radius, double q);
double seminorm_grad_ball(const Field& u, const std::array<double, 3>& center,
                          double radius);

double node_distance(const GridSpec& grid, std::size_t flat,
                     const std::array<double, 3>& center);

/// CSV snapshot, header "x[,y[,z]],u,ut", nodes in flat-index order, values
/// printed with enough digits to round-trip exactly.
void write_snapshot_csv(const std::filesystem::path& path, const Field& u,
                        const Field& ut);
std::pair<Field, Field> read_snapshot_csv(const std::filesystem::path& path,
                                          const GridSpec& grid);

}  // namespace wavepatch
