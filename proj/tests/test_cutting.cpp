#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wavepatch/cutting.hpp"

using namespace wavepatch;

namespace {

double smooth01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double plateau_bump(double r, double plateau, double support) {
  const double a = std::abs(r);
  if (a <= plateau) return 1.0;
  if (a >= support) return 0.0;
  return 1.0 - smooth01((a - plateau) / (support - plateau));
}

GridSpec line_grid(double extent, double h) {
  GridSpec g;
  g.geometry = Geometry::Line1D;
  g.extent = extent;
  g.h = h;
  g.dt = h;
  return g;
}

Field bump_field(const GridSpec& g, double amp, double shift, double plateau,
                 double support) {
  return make_field(g, [&](const std::array<double, 3>& p) {
    const double r = std::sqrt((p[0] - shift) * (p[0] - shift) +
                               p[1] * p[1] + p[2] * p[2]);
    return amp * plateau_bump(r, plateau, support);
  });
}

}  // namespace

TEST_CASE("sobolev constant estimates are positive and cached") {
  const double line = sobolev_constant(Geometry::Line1D);
  const double radial = sobolev_constant(Geometry::Radial3D);
  CHECK(line > 0.0);
  CHECK(radial > 0.0);
  CHECK(sobolev_constant(Geometry::Line1D) == line);
}

TEST_CASE("radius selection returns the full extent for zero data") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const Field u0(g);
  const Field u1(g);
  const CutPlan plan = choose_radius(u0, u1, 1.0, {{0.0, 0.0, 0.0}});
  CHECK(plan.r == 1.0);
  CHECK(plan.K == 1.0);
  CHECK(plan.sobolev_C == sobolev_constant(Geometry::Line1D));
}

TEST_CASE("radius selection never shrinks when the data halves") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const Field u0 = bump_field(g, 0.8, 0.0, 0.2, 0.4);
  const Field u1 = bump_field(g, 0.3, 0.1, 0.1, 0.3);
  const double K = 2.0 * (seminorm_grad(u0) + norm_lq(u1, 2.0));
  const std::vector<std::array<double, 3>> centers{
      {-1.0, 0.0, 0.0}, {-0.5, 0.0, 0.0}, {0.0, 0.0, 0.0},
      {0.5, 0.0, 0.0},  {1.0, 0.0, 0.0}};

  const CutPlan full = choose_radius(u0, u1, K, centers);

  Field half0 = u0;
  Field half1 = u1;
  for (std::size_t i = 0; i < half0.size(); ++i) {
    half0[i] *= 0.5;
    half1[i] *= 0.5;
  }
  const CutPlan halved = choose_radius(half0, half1, K, centers);
  CHECK(halved.r >= full.r);
}

TEST_CASE("radius selection fails cleanly when no radius is fine enough") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const Field u0 = bump_field(g, 1.0, 0.0, 0.0, 4.0 * g.h);
  const Field u1(g);
  const double K = 1.05 * seminorm_grad(u0);
  CHECK_THROWS_AS(choose_radius(u0, u1, K, {{0.0, 0.0, 0.0}}),
                  std::runtime_error);
}

TEST_CASE("radius selection rejects an exhausted budget") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const Field u0 = bump_field(g, 1.0, 0.0, 0.2, 0.6);
  const Field u1(g);
  const double K = 0.5 * seminorm_grad(u0);
  CHECK_THROWS_AS(choose_radius(u0, u1, K, {{0.0, 0.0, 0.0}}),
                  std::invalid_argument);
}

TEST_CASE("cutoff plateau, support, and gradient bound hold exactly") {
  struct Case {
    GridSpec grid;
    std::array<double, 3> center;
  };
  GridSpec box;
  box.geometry = Geometry::Box3D;
  box.extent = 1.0;
  box.h = 1.0 / 16;
  box.dt = 0.5 * box.h;
  GridSpec radial;
  radial.geometry = Geometry::Radial3D;
  radial.extent = 1.0;
  radial.h = 1.0 / 128;
  radial.dt = radial.h;
  const std::vector<Case> cases{
      {line_grid(1.0, 1.0 / 128), {0.25, 0.0, 0.0}},
      {radial, {0.0, 0.0, 0.0}},
      {box, {0.25, -0.25, 0.0}},
  };
  const double r = 0.25;

  for (const auto& c : cases) {
    const ThetaCutoff theta = build_theta(c.center, r, c.grid);
    CHECK(theta.max_gradient <= 2.0 / r * (1.0 + 1e-12));
    for (std::size_t n = 0; n < theta.profile.size(); ++n) {
      const double d = node_distance(c.grid, n, c.center);
      const double v = theta.profile[n];
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
      if (d <= 0.5 * r) REQUIRE(v == 1.0);
      if (d >= r) REQUIRE(v == 0.0);
    }
  }
}

TEST_CASE("cutoff construction rejects tight radii and off-origin radial centers") {
  const GridSpec g = line_grid(1.0, 1.0 / 64);
  CHECK_THROWS_AS(build_theta({0.0, 0.0, 0.0}, 3.0 * g.h, g),
                  std::invalid_argument);

  GridSpec radial;
  radial.geometry = Geometry::Radial3D;
  radial.extent = 1.0;
  radial.h = 1.0 / 64;
  radial.dt = radial.h;
  CHECK_THROWS_AS(build_theta({0.5, 0.0, 0.0}, 0.25, radial),
                  std::invalid_argument);
}

TEST_CASE("patch grids align their nodes with the global grid") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const Field f = make_field(g, [](const std::array<double, 3>& p) {
    return std::sin(3.0 * p[0]) + 0.25 * p[0];
  });

  const GridSpec patch = make_patch_grid(g, {0.25, 0.0, 0.0}, 0.25);
  const Field restricted = restrict_field(f, patch);
  for (std::size_t i = 0; i < restricted.size(); ++i) {
    const auto p = patch.node_point(i);
    const int gi = static_cast<int>(std::lround((p[0] - g.axis_min(0)) / g.h));
    REQUIRE(restricted[i] == f[g.flat_index(gi)]);
  }

  CHECK_THROWS_AS(make_patch_grid(g, {0.25 + 0.4 * g.h, 0.0, 0.0}, 0.25),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_patch_grid(g, {0.25, 0.0, 0.0}, 0.3),
                  std::invalid_argument);
}

TEST_CASE("patch restriction reads zero outside the global domain") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const Field f = make_field(g, [](const std::array<double, 3>&) { return 1.0; });
  const GridSpec patch = make_patch_grid(g, {1.0, 0.0, 0.0}, 0.25);
  const Field restricted = restrict_field(f, patch);
  for (std::size_t i = 0; i < restricted.size(); ++i) {
    const auto p = patch.node_point(i);
    if (p[0] > g.extent + 1e-12)
      REQUIRE(restricted[i] == 0.0);
    else
      REQUIRE(restricted[i] == 1.0);
  }
}

TEST_CASE("cut data keeps plateau-supported data exact with zero trace") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const std::array<double, 3> center{0.25, 0.0, 0.0};
  CutPlan plan;
  plan.K = 8.0;
  plan.r = 0.5;
  plan.sobolev_C = sobolev_constant(g.geometry);

  const Field u0 = bump_field(g, 0.4, 0.25, 0.05, 0.2);
  const Field u1 = bump_field(g, 0.2, 0.25, 0.05, 0.2);
  const CutData cut = cut_data(u0, u1, center, plan);

  CHECK(cut.center == center);
  const Field plain = restrict_field(u0, cut.u0.grid);
  for (std::size_t i = 0; i < cut.u0.size(); ++i)
    REQUIRE(cut.u0[i] == plain[i]);
  REQUIRE(cut.u0[0] == 0.0);
  REQUIRE(cut.u0[cut.u0.size() - 1] == 0.0);

  CHECK(cut.report.total_ok);
  CHECK(cut.report.chain_ok);
  CHECK(cut.report.u1_ok);
  CHECK(cut.report.margin > 0.01);
}

TEST_CASE("cut bound chain is internally consistent at one percent tolerance") {
  GridSpec radial;
  radial.geometry = Geometry::Radial3D;
  radial.extent = 1.0;
  radial.h = 1.0 / 256;
  radial.dt = radial.h;
  const std::array<double, 3> center{0.0, 0.0, 0.0};

  const Field u0 = bump_field(radial, 0.6, 0.0, 0.1, 0.6);
  const Field u1 = bump_field(radial, 0.2, 0.0, 0.1, 0.4);
  const double K = 2.0 * (seminorm_grad(u0) + norm_lq(u1, 2.0));
  const CutPlan plan = choose_radius(u0, u1, K, {center});
  const CutData cut = cut_data(u0, u1, center, plan);
  const CutBoundReport& rep = cut.report;

  CHECK(rep.grad_cut_ball <= rep.chain_bound * 1.01);
  CHECK(rep.grad_theta_inf * rep.u0_l2_ball <= rep.holder_majorant * 1.01);
  CHECK(rep.grad_u0_ball < 0.25 * K);
  CHECK(rep.u1_ball < 0.25 * K);
  CHECK(rep.sobolev_majorant < 0.25 * K);
  CHECK(rep.total_ok);
  CHECK(rep.margin > 0.01);
}

TEST_CASE("cutting at every lattice center keeps the verified bound under budget") {
  const GridSpec g = line_grid(1.0, 1.0 / 128);
  const Field u0 = bump_field(g, 0.8, 0.0, 0.2, 0.4);
  const Field u1 = bump_field(g, 0.3, -0.1, 0.1, 0.3);
  const double K = 2.0 * (seminorm_grad(u0) + norm_lq(u1, 2.0));
  const std::vector<std::array<double, 3>> centers{
      {-1.0, 0.0, 0.0}, {-0.5, 0.0, 0.0}, {0.0, 0.0, 0.0},
      {0.5, 0.0, 0.0},  {1.0, 0.0, 0.0}};

  const CutPlan plan = choose_radius(u0, u1, K, centers);
  CHECK(plan.r >= 8.0 * g.h);
  for (const auto& c : centers) {
    const CutData cut = cut_data(u0, u1, c, plan);
    CHECK(cut.report.total_ok);
    CHECK(cut.report.margin >= 0.01);
    CHECK(cut.report.u1_ok);
  }
}
