#include "wavepatch/gridfield.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wavepatch {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

long long rounded_ratio(double num, double den) {
  return std::llround(num / den);
}

bool is_node_multiple(double value, double h) {
  const long long n = rounded_ratio(value, h);
  return std::abs(value - static_cast<double>(n) * h) <=
         1e-9 * std::max(1.0, std::abs(value));
}

}  // namespace

std::string geometry_name(Geometry g) {
  switch (g) {
    case Geometry::Line1D: return "line1d";
    case Geometry::Radial3D: return "radial3d";
    case Geometry::Box3D: return "box3d";
  }
  return "unknown";
}

Geometry parse_geometry(const std::string& name) {
  if (name == "line1d") return Geometry::Line1D;
  if (name == "radial3d") return Geometry::Radial3D;
  if (name == "box3d") return Geometry::Box3D;
  throw std::invalid_argument("unknown geometry '" + name +
                              "' (expected line1d, radial3d, or box3d)");
}

double GridSpec::cfl_limit(Geometry g) {
  return g == Geometry::Box3D ? 0.5 : 1.0;
}

int GridSpec::nodes_per_axis() const {
  const long long n = rounded_ratio(extent, h);
  if (geometry == Geometry::Radial3D) return static_cast<int>(n) + 1;
  return 2 * static_cast<int>(n) + 1;
}

std::size_t GridSpec::node_count() const {
  const std::size_t n = static_cast<std::size_t>(nodes_per_axis());
  return geometry == Geometry::Box3D ? n * n * n : n;
}

double GridSpec::axis_min(int axis) const {
  if (geometry == Geometry::Radial3D) return 0.0;
  return origin[static_cast<std::size_t>(axis)] - extent;
}

std::array<double, 3> GridSpec::node_point(std::size_t flat) const {
  const int n = nodes_per_axis();
  if (geometry == Geometry::Box3D) {
    const int k = static_cast<int>(flat % static_cast<std::size_t>(n));
    const int j = static_cast<int>((flat / static_cast<std::size_t>(n)) %
                                   static_cast<std::size_t>(n));
    const int i = static_cast<int>(flat / (static_cast<std::size_t>(n) *
                                           static_cast<std::size_t>(n)));
    return {coord(0, i), coord(1, j), coord(2, k)};
  }
  return {coord(0, static_cast<int>(flat)), 0.0, 0.0};
}

std::size_t GridSpec::flat_index(int i, int j, int k) const {
  if (geometry == Geometry::Box3D) {
    const std::size_t n = static_cast<std::size_t>(nodes_per_axis());
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n +
           static_cast<std::size_t>(k);
  }
  return static_cast<std::size_t>(i);
}

bool GridSpec::boundary_node(std::size_t flat) const {
  const int n = nodes_per_axis();
  if (geometry == Geometry::Box3D) {
    const std::size_t nn = static_cast<std::size_t>(n);
    const int k = static_cast<int>(flat % nn);
    const int j = static_cast<int>((flat / nn) % nn);
    const int i = static_cast<int>(flat / (nn * nn));
    return i == 0 || i == n - 1 || j == 0 || j == n - 1 || k == 0 || k == n - 1;
  }
  if (geometry == Geometry::Radial3D) return static_cast<int>(flat) == n - 1;
  return flat == 0 || static_cast<int>(flat) == n - 1;
}

double GridSpec::cell_weight(std::size_t flat) const {
  const int n = nodes_per_axis();
  auto axis_w = [&](int i) { return (i == 0 || i == n - 1) ? 0.5 * h : h; };
  if (geometry == Geometry::Box3D) {
    const std::size_t nn = static_cast<std::size_t>(n);
    const int k = static_cast<int>(flat % nn);
    const int j = static_cast<int>((flat / nn) % nn);
    const int i = static_cast<int>(flat / (nn * nn));
    return axis_w(i) * axis_w(j) * axis_w(k);
  }
  if (geometry == Geometry::Radial3D) {
    const double rho = coord(0, static_cast<int>(flat));
    return axis_w(static_cast<int>(flat)) * kFourPi * rho * rho;
  }
  return axis_w(static_cast<int>(flat));
}

bool GridSpec::same_layout(const GridSpec& other) const {
  return geometry == other.geometry && extent == other.extent && h == other.h &&
         dt == other.dt && origin == other.origin;
}

void GridSpec::validate() const {
  if (!(extent > 0.0) || !(h > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("grid: extent, h, dt must be positive");
  if (!is_node_multiple(extent, h))
    throw std::invalid_argument("grid: extent must be an integer multiple of h");
  if (nodes_per_axis() < 8)
    throw std::invalid_argument("grid: fewer than 8 nodes per axis");
  if (dt / h > cfl_limit(geometry) + 1e-12)
    throw std::invalid_argument("grid: dt/h exceeds the stability bound for " +
                                geometry_name(geometry));
  if (geometry == Geometry::Radial3D &&
      (origin[0] != 0.0 || origin[1] != 0.0 || origin[2] != 0.0))
    throw std::invalid_argument("grid: radial grids are centered at the origin");
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

void Field::clamp_boundary() {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (grid.boundary_node(i)) values[i] = 0.0;
}

Field make_field(const GridSpec& grid,
                 const std::function<double(const std::array<double, 3>&)>& f) {
  Field out(grid);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = f(grid.node_point(i));
  return out;
}

namespace {

/// Squared gradient magnitude at a node: centered differences inside,
/// one-sided at the domain ends.
double grad_sq_at(const Field& u, std::size_t flat) {
  const GridSpec& g = u.grid;
  const int n = g.nodes_per_axis();
  const double h = g.h;
  if (g.geometry == Geometry::Box3D) {
    const std::size_t nn = static_cast<std::size_t>(n);
    const int k = static_cast<int>(flat % nn);
    const int j = static_cast<int>((flat / nn) % nn);
    const int i = static_cast<int>(flat / (nn * nn));
    auto diff = [&](int a, int b, int c, int axis) {
      int idx[3] = {a, b, c};
      double d;
      if (idx[axis] == 0) {
        int up[3] = {a, b, c};
        up[axis] += 1;
        d = (u[g.flat_index(up[0], up[1], up[2])] - u[flat]) / h;
      } else if (idx[axis] == n - 1) {
        int dn[3] = {a, b, c};
        dn[axis] -= 1;
        d = (u[flat] - u[g.flat_index(dn[0], dn[1], dn[2])]) / h;
      } else {
        int up[3] = {a, b, c}, dn[3] = {a, b, c};
        up[axis] += 1;
        dn[axis] -= 1;
        d = (u[g.flat_index(up[0], up[1], up[2])] -
             u[g.flat_index(dn[0], dn[1], dn[2])]) /
            (2.0 * h);
      }
      return d;
    };
    const double dx = diff(i, j, k, 0);
    const double dy = diff(i, j, k, 1);
    const double dz = diff(i, j, k, 2);
    return dx * dx + dy * dy + dz * dz;
  }
  const int i = static_cast<int>(flat);
  double d;
  if (i == 0)
    d = (u[1] - u[0]) / h;
  else if (i == n - 1)
    d = (u[flat] - u[flat - 1]) / h;
  else
    d = (u[flat + 1] - u[flat - 1]) / (2.0 * h);
  return d * d;
}

}  // namespace

double norm_lq(const Field& u, double q) {
  if (q == kNormInf) return u.max_abs();
  if (!(q >= 1.0)) throw std::domain_error("norm_lq: q must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    acc += u.grid.cell_weight(i) * std::pow(std::abs(u[i]), q);
  return std::pow(acc, 1.0 / q);
}

double seminorm_grad(const Field& u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    acc += u.grid.cell_weight(i) * grad_sq_at(u, i);
  return std::sqrt(acc);
}

double norm_h1(const Field& u) {
  const double l2 = norm_lq(u, 2.0);
  const double g = seminorm_grad(u);
  return std::sqrt(l2 * l2 + g * g);
}

double norm_h1me(const Field& u, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::domain_error("norm_h1me: eps must lie in (0, 1)");
  const double l2 = norm_lq(u, 2.0);
  const double h1 = norm_h1(u);
  if (l2 == 0.0 || h1 == 0.0) return 0.0;
  return std::pow(l2, eps) * std::pow(h1, 1.0 - eps);
}

double node_distance(const GridSpec& grid, std::size_t flat,
                     const std::array<double, 3>& center) {
  const std::array<double, 3> p = grid.node_point(flat);
  if (grid.geometry == Geometry::Box3D) {
    const double dx = p[0] - center[0];
    const double dy = p[1] - center[1];
    const double dz = p[2] - center[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return std::abs(p[0] - center[0]);
}

double norm_lq_ball(const Field& u, const std::array<double, 3>& center,
                    double radius, double q) {
  if (q == kNormInf) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (node_distance(u.grid, i, center) <= radius + 1e-12)
        m = std::max(m, std::abs(u[i]));
    return m;
  }
  if (!(q >= 1.0)) throw std::domain_error("norm_lq_ball: q must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (node_distance(u.grid, i, center) <= radius + 1e-12)
      acc += u.grid.cell_weight(i) * std::pow(std::abs(u[i]), q);
  return std::pow(acc, 1.0 / q);
}

double seminorm_grad_ball(const Field& u, const std::array<double, 3>& center,
                          double radius) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (node_distance(u.grid, i, center) <= radius + 1e-12)
      acc += u.grid.cell_weight(i) * grad_sq_at(u, i);
  return std::sqrt(acc);
}

void write_snapshot_csv(const std::filesystem::path& path, const Field& u,
                        const Field& ut) {
  if (!u.grid.same_layout(ut.grid))
    throw std::invalid_argument("snapshot: u and ut live on different grids");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path.string());
  const bool box = u.grid.geometry == Geometry::Box3D;
  out << (box ? "x,y,z,u,ut\n" : "x,u,ut\n");
  char line[256];
  for (std::size_t i = 0; i < u.size(); ++i) {
    const std::array<double, 3> p = u.grid.node_point(i);
    if (box)
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p[0],
                    p[1], p[2], u[i], ut[i]);
    else
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p[0], u[i], ut[i]);
    out << line;
  }
  if (!out) throw std::runtime_error("snapshot: write failed " + path.string());
}

std::pair<Field, Field> read_snapshot_csv(const std::filesystem::path& path,
                                          const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  Field u(grid), ut(grid);
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i >= u.size())
      throw std::runtime_error("snapshot: too many rows in " + path.string());
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
    if (cols.size() < 3)
      throw std::runtime_error("snapshot: malformed row in " + path.string());
    u[i] = cols[cols.size() - 2];
    ut[i] = cols[cols.size() - 1];
    ++i;
  }
  if (i != u.size())
    throw std::runtime_error("snapshot: row count mismatch in " + path.string());
  return {u, ut};
}

}  // namespace wavepatch
