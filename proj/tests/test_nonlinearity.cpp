#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "wavepatch/gridfield.hpp"
#include "wavepatch/nonlinearity.hpp"

using namespace wavepatch;

TEST_CASE("exponent classification") {
  CHECK(classify_exponent(2.0) == Criticality::Subcritical);
  CHECK(classify_exponent(3.0) == Criticality::Critical);
  CHECK(classify_exponent(4.0) == Criticality::Supercritical);
  CHECK(classify_exponent(5.0) == Criticality::SuperSupercritical);
  CHECK(classify_exponent(5.9) == Criticality::SuperSupercritical);
  CHECK_THROWS_AS(classify_exponent(0.9), std::domain_error);
  CHECK_THROWS_AS(classify_exponent(6.0), std::domain_error);
}

TEST_CASE("source evaluation") {
  SourceSpec cubic{3.0, 1.0, -1.0, std::nullopt};
  CHECK(eval_source(cubic, 2.0) == doctest::Approx(-8.0));
  CHECK(eval_source(cubic, -2.0) == doctest::Approx(8.0));
  CHECK(eval_source(cubic, 0.0) == 0.0);

  SourceSpec trunc = cubic;
  trunc.truncation = 1;
  CHECK(eval_source(trunc, 3.0) == 0.0);  // past the support edge 2n
  trunc.truncation = 4;
  CHECK(eval_source(trunc, 2.0) == doctest::Approx(-8.0));  // on the plateau

  // Saturation instead of overflow.
  SourceSpec steep{5.0, 1.0, -1.0, std::nullopt};
  CHECK(std::isfinite(eval_source(steep, 1e100)));

  SourceSpec bad = cubic;
  bad.sign = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("cutoff profile") {
  CutoffProfile eta = build_cutoff_eta(2);
  CHECK(eta.value(0.0) == 1.0);
  CHECK(eta.value(1.5) == 1.0);
  CHECK(eta.value(2.0) == 1.0);
  CHECK(eta.value(3.0) == doctest::Approx(0.5));
  CHECK(eta.value(4.0) == 0.0);
  CHECK(eta.value(5.0) == 0.0);
  CHECK(eta.value(-3.0) == eta.value(3.0));

  // Slope bound (15/8)/n, attained mid-ramp.
  const double bound = eta.deriv_bound / 2.0;
  CHECK(std::abs(eta.derivative(3.0)) == doctest::Approx(bound));
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double s = 1.9 + 2.2 * i / 400.0;
    worst = std::max(worst, std::abs(eta.derivative(s)));
    // Finite differences track the analytic derivative.
    const double fd = (eta.value(s + 1e-6) - eta.value(s - 1e-6)) / 2e-6;
    CHECK(eta.derivative(s) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(worst <= bound + 1e-12);

  CHECK_THROWS_AS(build_cutoff_eta(0), std::invalid_argument);
}

TEST_CASE("source antiderivative") {
  SourceSpec cubic{3.0, 1.0, -1.0, std::nullopt};
  CHECK(source_antiderivative(cubic, 0.0) == 0.0);
  CHECK(source_antiderivative(cubic, 2.0) == doctest::Approx(-4.0));
  CHECK(source_antiderivative(cubic, -2.0) == doctest::Approx(-4.0));

  SourceSpec trunc = cubic;
  trunc.truncation = 2;
  // Plateau region agrees with the untruncated closed form.
  CHECK(source_antiderivative(trunc, 1.5) ==
        doctest::Approx(-std::pow(1.5, 4.0) / 4.0).epsilon(1e-14));
  // Constant past the support edge.
  const double tail = source_antiderivative(trunc, 4.0);
  CHECK(source_antiderivative(trunc, 7.0) == doctest::Approx(tail));
  CHECK(source_antiderivative(trunc, -5.0) == doctest::Approx(tail));

  // d/ds F_n = f_n across plateau, ramp, and tail.
  for (double s : {0.7, 1.9, 2.3, 2.9, 3.5, 4.2}) {
    const double fd = (source_antiderivative(trunc, s + 5e-6) -
                       source_antiderivative(trunc, s - 5e-6)) /
                      1e-5;
    CHECK(fd == doctest::Approx(eval_source(trunc, s)).epsilon(1e-7));
  }
}

TEST_CASE("implicit damping update") {
  DampingSpec cubicd{3.0, 1.0, 1.0};
  // y + y^3 = 2 has the exact root y = 1.
  CHECK(solve_damping_update(0.0, 2.0, 1.0, cubicd) == doctest::Approx(1.0));
  CHECK(solve_damping_update(0.0, -2.0, 1.0, cubicd) == doctest::Approx(-1.0));
  CHECK(solve_damping_update(0.5, 0.0, 1.0, cubicd) == 0.0);

  DampingSpec lin{1.0, 2.0, 2.0};
  CHECK(solve_damping_update(0.0, 3.0, 0.25, lin) ==
        doctest::Approx(3.0 / 1.5));

  DampingSpec dry{0.0, 1.0, 1.0};
  CHECK(solve_damping_update(0.0, 3.0, 0.5, dry) == doctest::Approx(2.5));
  CHECK(solve_damping_update(0.0, 0.3, 0.5, dry) == 0.0);
  CHECK(solve_damping_update(0.0, -3.0, 0.5, dry) == doctest::Approx(-2.5));

  // Residual contract for fractional and large exponents.
  for (double m : {0.5, 1.6, 2.2, 7.0, 12.0}) {
    DampingSpec d{m, 0.8, 0.8};
    for (double rhs : {1e-8, 0.3, 1.0, 47.0, 1e6}) {
      const double dt = 3e-3;
      const double y = solve_damping_update(0.0, rhs, dt, d);
      const double resid =
          std::abs(y + dt * d.a() * std::pow(std::abs(y), m - 1.0) * y - rhs);
      CHECK(resid <= 1e-12 * std::max(1.0, rhs));
      CHECK(y >= 0.0);
      CHECK(y <= rhs);
    }
  }
}

TEST_CASE("assumption report") {
  DampingSpec d6{6.0, 1.0, 1.0};
  SourceSpec p5{5.0, 1.0, -1.0, std::nullopt};
  auto rep = check_assumptions(p5, d6);
  CHECK(rep.ag_ok);
  CHECK(rep.af_branch == AfBranch::B);
  CHECK(rep.epsilon == doctest::Approx(std::ldexp(1.0, -7)));

  DampingSpec d5{5.0, 1.0, 1.0};
  rep = check_assumptions(p5, d5);
  CHECK(rep.af_branch == AfBranch::Neither);

  DampingSpec dry{0.0, 1.0, 1.0};
  SourceSpec p2{2.0, 1.0, -1.0, std::nullopt};
  rep = check_assumptions(p2, dry);
  CHECK(rep.ag_ok);
  CHECK(rep.af_branch == AfBranch::A);
  CHECK(rep.epsilon == 0.0);

  CHECK(af_branch_name(AfBranch::B) == "b");
}

TEST_CASE("lipschitz probe") {
  GridSpec g;
  g.geometry = Geometry::Line1D;
  g.extent = 1.0;
  g.h = 1.0 / 64.0;
  g.dt = g.h;
  g.validate();
  SourceSpec src{3.0, 1.0, -1.0, 2};
  Field u = make_field(g, [](const std::array<double, 3>& x) {
    return std::exp(-8.0 * x[0] * x[0]);
  });
  Field v = u;
  auto same = lipschitz_probe(src, u, v, 0.25, 2.0);
  CHECK(same.skipped);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= 0.9;
  auto probe = lipschitz_probe(src, u, v, 0.25, 2.0);
  CHECK_FALSE(probe.skipped);
  CHECK(probe.ratio_fractional > 0.0);
  CHECK(probe.ratio_l2_h1 > 0.0);
  CHECK(std::isfinite(probe.ratio_fractional));
}
