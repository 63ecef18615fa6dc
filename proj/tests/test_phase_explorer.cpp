#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavepatch/phase_explorer.hpp"

using namespace wavepatch;

namespace {

SweepProtocol coarse_protocol(double horizon) {
  SweepProtocol proto = default_sweep_protocol();
  proto.grid.h = 1.0 / 32.0;
  proto.grid.dt = 1.0 / 64.0;
  proto.horizon = horizon;
  return proto;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("default protocol is internally consistent") {
  const SweepProtocol proto = default_sweep_protocol();
  proto.validate();
  CHECK(proto.grid.geometry == Geometry::Line1D);
  CHECK(proto.grid.extent == 1.0);
  CHECK(proto.horizon == 40.0);
  const double steps = proto.horizon / proto.grid.dt;
  CHECK(std::abs(steps - 20000.0) < 1e-6);
  CHECK(proto.source_sign == -1.0);

  const auto ps = default_p_values();
  const auto ms = default_m_values();
  const auto scales = default_data_scales();
  REQUIRE(ps.size() == 5);
  REQUIRE(ms.size() == 5);
  REQUIRE(scales.size() == 5);
  CHECK(scales.back() == 8.0);
  for (double p : ps) CHECK((p >= 1.0 && p < 6.0));
  for (double m : ms) CHECK(m >= 0.0);
  for (double p : ps)
    for (double m : ms) CHECK(m != p);
}

TEST_CASE("protocol validation rejects broken recipes") {
  SweepProtocol proto = coarse_protocol(1.0);
  proto.horizon = 1.0 + 0.3 * proto.grid.dt;
  CHECK_THROWS_AS(proto.validate(), std::invalid_argument);

  proto = coarse_protocol(1.0);
  proto.bump_support = proto.bump_plateau;
  CHECK_THROWS_AS(proto.validate(), std::invalid_argument);

  proto = coarse_protocol(1.0);
  proto.source_sign = 0.5;
  CHECK_THROWS_AS(proto.validate(), std::invalid_argument);

  proto = coarse_protocol(1.0);
  proto.blowup_threshold = 0.0;
  CHECK_THROWS_AS(proto.validate(), std::invalid_argument);
}

TEST_CASE("zero data scale survives everywhere") {
  const SweepProtocol proto = coarse_protocol(2.0);
  const PhaseDiagram diagram = sweep({2.0, 3.0}, {1.0, 3.0}, 0.0, proto, 2);
  REQUIRE(diagram.cells.size() == 4);
  for (const PhaseCell& c : diagram.cells) {
    CHECK(c.outcome == CellOutcome::Survived);
    CHECK(c.t_star == proto.horizon);
    CHECK(c.peak_abs_u == 0.0);
  }
}

TEST_CASE("strong damping survives a moderate pulse at two resolutions") {
  SweepProtocol coarse = default_sweep_protocol();
  coarse.grid.h = 1.0 / 64.0;
  coarse.grid.dt = 1.0 / 128.0;
  coarse.horizon = 4.0;

  SweepProtocol fine = coarse;
  fine.grid.h = 1.0 / 128.0;
  fine.grid.dt = 1.0 / 256.0;

  const PhaseCell a = run_cell(2.0, 3.0, 2.0, coarse);
  const PhaseCell b = run_cell(2.0, 3.0, 2.0, fine);
  CHECK(a.outcome == CellOutcome::Survived);
  CHECK(b.outcome == CellOutcome::Survived);
  CHECK(a.t_star == coarse.horizon);
  CHECK(b.t_star == fine.horizon);
}

TEST_CASE("weak damping blows up and the detection time is refinement-stable") {
  SweepProtocol coarse = default_sweep_protocol();
  coarse.horizon = 20.0;

  SweepProtocol fine = coarse;
  fine.grid.h = 1.0 / 256.0;
  fine.grid.dt = 1e-3;

  const PhaseCell a = run_cell(3.0, 1.0, 8.0, coarse);
  const PhaseCell b = run_cell(3.0, 1.0, 8.0, fine);
  REQUIRE(a.outcome == CellOutcome::BlewUp);
  REQUIRE(b.outcome == CellOutcome::BlewUp);
  CHECK(a.t_star < coarse.horizon);
  CHECK(std::abs(a.t_star - b.t_star) <= 0.1 * std::max(a.t_star, b.t_star));
}

TEST_CASE("sweep covers the grid deterministically across worker counts") {
  const SweepProtocol proto = coarse_protocol(2.0);
  const std::vector<double> ps{2.0, 3.0, 4.0};
  const std::vector<double> ms{1.0, 2.0, 5.0};

  const PhaseDiagram serial = sweep(ps, ms, 3.0, proto, 1);
  const PhaseDiagram parallel = sweep(ps, ms, 3.0, proto, 4);
  REQUIRE(serial.cells.size() == 9);
  REQUIRE(parallel.cells.size() == 9);
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].outcome == parallel.cells[i].outcome);
    CHECK(serial.cells[i].t_star == parallel.cells[i].t_star);
    CHECK(serial.cells[i].peak_abs_u == parallel.cells[i].peak_abs_u);
  }

  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ms.size(); ++j) {
      CHECK(serial.cell(i, j).p == ps[i]);
      CHECK(serial.cell(i, j).m == ms[j]);
    }
  CHECK_THROWS_AS(serial.cell(3, 0), std::out_of_range);

  CHECK_THROWS_AS(sweep({}, ms, 1.0, proto), std::invalid_argument);
  SweepProtocol defocusing = proto;
  defocusing.source_sign = 1.0;
  CHECK_THROWS_AS(sweep(ps, ms, 1.0, defocusing), std::invalid_argument);
}

TEST_CASE("a bad exponent fails its cells without aborting the sweep") {
  const SweepProtocol proto = coarse_protocol(1.0);
  const PhaseDiagram diagram = sweep({2.0, 6.5}, {1.0, 3.0}, 1.0, proto, 2);
  REQUIRE(diagram.cells.size() == 4);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(diagram.cell(0, j).outcome != CellOutcome::Failed);
    CHECK(diagram.cell(1, j).outcome == CellOutcome::Failed);
    CHECK(!diagram.cell(1, j).failure.empty());
  }
}

TEST_CASE("blow-up time table is nonincreasing in the data scale") {
  SweepProtocol proto = default_sweep_protocol();
  proto.horizon = 8.0;

  const std::vector<double> scales{0.25, 3.0, 4.0, 8.0};
  const auto table = blowup_time_scaling(3.0, 1.0, scales, proto, 2);
  REQUIRE(table.size() == scales.size());

  CHECK(table[0].outcome == CellOutcome::Survived);
  for (std::size_t i = 1; i < table.size(); ++i) {
    REQUIRE(table[i].outcome == CellOutcome::BlewUp);
    CHECK(table[i].t_star >= proto.grid.dt);
  }
  CHECK(table[2].t_star <= table[1].t_star);
  CHECK(table[3].t_star <= table[2].t_star);
  CHECK(t_star_nonincreasing(table));

  CHECK_THROWS_AS(blowup_time_scaling(2.0, 3.0, scales, proto),
                  std::invalid_argument);
  SweepProtocol defocusing = proto;
  defocusing.source_sign = 1.0;
  CHECK_THROWS_AS(blowup_time_scaling(3.0, 1.0, scales, defocusing),
                  std::invalid_argument);
}

TEST_CASE("monotonicity helper skips censored cells") {
  std::vector<PhaseCell> table(4);
  table[0].outcome = CellOutcome::Survived;
  table[0].t_star = 1.0;
  table[1].outcome = CellOutcome::BlewUp;
  table[1].t_star = 3.0;
  table[2].outcome = CellOutcome::Failed;
  table[2].t_star = 100.0;
  table[3].outcome = CellOutcome::BlewUp;
  table[3].t_star = 3.0;
  CHECK(t_star_nonincreasing(table));
  table[3].t_star = 3.5;
  CHECK(!t_star_nonincreasing(table));
}

TEST_CASE("diagram exports match the pinned formats") {
  const SweepProtocol proto = coarse_protocol(1.0);
  const PhaseDiagram diagram = sweep({2.0, 3.0}, {1.0, 4.0}, 2.0, proto, 2);

  std::ostringstream csv;
  write_diagram_csv(csv, diagram);
  const auto lines = split_lines(csv.str());
  REQUIRE(lines.size() == 1 + diagram.cells.size());
  CHECK(lines[0] == "p,m,lambda,outcome,t_star");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 5);
    const PhaseCell& c = diagram.cells[i - 1];
    CHECK(std::stod(fields[0]) == c.p);
    CHECK(std::stod(fields[1]) == c.m);
    CHECK(std::stod(fields[2]) == 2.0);
    CHECK(fields[3] == cell_outcome_name(c.outcome));
    CHECK(std::stod(fields[4]) == doctest::Approx(c.t_star).epsilon(1e-10));
  }

  std::ostringstream region;
  write_region_map(region, diagram);
  const auto rows = split_lines(region.str());
  int blanks = 0;
  int triples = 0;
  for (const auto& r : rows) {
    if (r.empty()) {
      ++blanks;
      continue;
    }
    if (r[0] == '#') continue;
    std::istringstream row(r);
    double p = 0.0, m = 0.0;
    int code = 42;
    REQUIRE((row >> p >> m >> code));
    CHECK((code == 1 || code == 0 || code == -1));
    ++triples;
  }
  CHECK(triples == static_cast<int>(diagram.cells.size()));
  CHECK(blanks == static_cast<int>(diagram.p_values.size()));
}

TEST_CASE("split counts the plane by damping strength") {
  PhaseDiagram diagram;
  diagram.p_values = {2.0, 4.0};
  diagram.m_values = {1.0, 3.0};
  diagram.cells.resize(4);
  auto& c00 = diagram.cells[0];  // p=2, m=1: weak
  auto& c01 = diagram.cells[1];  // p=2, m=3: strong
  auto& c10 = diagram.cells[2];  // p=4, m=1: weak
  auto& c11 = diagram.cells[3];  // p=4, m=3: weak
  c00 = {2.0, 1.0, 1.0, CellOutcome::BlewUp, 0.5, 0.0, ""};
  c01 = {2.0, 3.0, 1.0, CellOutcome::Survived, 1.0, 0.0, ""};
  c10 = {4.0, 1.0, 1.0, CellOutcome::Failed, 0.0, 0.0, "x"};
  c11 = {4.0, 3.0, 1.0, CellOutcome::BlewUp, 0.25, 0.0, ""};

  const DichotomySplit split = split_by_damping_strength(diagram);
  CHECK(split.strong_total == 1);
  CHECK(split.strong_survived == 1);
  CHECK(split.weak_total == 3);
  CHECK(split.weak_blewup == 2);
  CHECK(split.survived_fraction() == 1.0);
  CHECK(split.blewup_fraction() == doctest::Approx(2.0 / 3.0));
}
