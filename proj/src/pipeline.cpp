#include "wavepatch/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wavepatch/config.hpp"
#include "wavepatch/cutting.hpp"
#include "wavepatch/gridfield.hpp"
#include "wavepatch/local_solver.hpp"
#include "wavepatch/nonlinearity.hpp"
#include "wavepatch/patching.hpp"
#include "wavepatch/phase_explorer.hpp"
#include "wavepatch/verification.hpp"

namespace wavepatch {

namespace {

namespace fs = std::filesystem;

struct StageTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  double seconds() const {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - t0).count();
  }
};

Geometry geometry_from_name(const std::string& name) {
  if (name == "line") return Geometry::Line1D;
  if (name == "radial") return Geometry::Radial3D;
  if (name == "box") return Geometry::Box3D;
  throw std::invalid_argument("grid.geometry must be line, radial, or box");
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.csv", step);
  return buf;
}

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> grid_keys() {
  return {"grid.geometry", "grid.extent", "grid.h", "grid.dt"};
}

std::vector<std::string> physics_keys() {
  return {"source.p",           "source.coeff", "source.sign",
          "source.truncation_n", "damping.m",    "damping.a"};
}

std::vector<std::string> data_keys() {
  return {"data.kind",    "data.amplitude", "data.cx",
          "data.cy",      "data.cz",        "data.plateau",
          "data.support", "data.sigma",     "data.u1_amplitude"};
}

GridSpec grid_from(const ConfigMap& cfg, ConfigMap& resolved) {
  GridSpec g;
  const std::string geom = cfg.get_string("grid.geometry", "line");
  g.geometry = geometry_from_name(geom);
  g.extent = cfg.get_double("grid.extent", 1.0);
  g.h = cfg.get_double("grid.h", 1.0 / 128.0);
  g.dt = cfg.get_double("grid.dt", GridSpec::cfl_limit(g.geometry) * g.h);
  g.validate();
  resolved.set("grid.geometry", geom);
  resolved.set_double("grid.extent", g.extent);
  resolved.set_double("grid.h", g.h);
  resolved.set_double("grid.dt", g.dt);
  return g;
}

SourceSpec source_from(const ConfigMap& cfg, ConfigMap& resolved) {
  SourceSpec src;
  src.p = cfg.get_double("source.p", 2.0);
  src.coeff = cfg.get_double("source.coeff", 1.0);
  src.sign = cfg.get_double("source.sign", -1.0);
  if (cfg.has("source.truncation_n")) {
    src.truncation = cfg.get_int("source.truncation_n");
    resolved.set_int("source.truncation_n", *src.truncation);
  }
  src.validate();
  resolved.set_double("source.p", src.p);
  resolved.set_double("source.coeff", src.coeff);
  resolved.set_double("source.sign", src.sign);
  return src;
}

DampingSpec damping_from(const ConfigMap& cfg, ConfigMap& resolved) {
  DampingSpec dmp;
  dmp.m = cfg.get_double("damping.m", 1.0);
  dmp.l_m = dmp.L_m = cfg.get_double("damping.a", 1.0);
  dmp.validate();
  resolved.set_double("damping.m", dmp.m);
  resolved.set_double("damping.a", dmp.l_m);
  return dmp;
}

struct DataSpec {
  std::string kind = "zero";
  double amplitude = 1.0;
  double u1_amplitude = 0.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double plateau = 0.1;
  double support = 0.35;
  double sigma = 0.2;
};

DataSpec data_from(const ConfigMap& cfg, ConfigMap& resolved) {
  DataSpec d;
  d.kind = cfg.get_string("data.kind", "zero");
  if (d.kind != "zero" && d.kind != "bump" && d.kind != "gaussian")
    throw std::invalid_argument("data.kind must be zero, bump, or gaussian");
  d.amplitude = cfg.get_double("data.amplitude", 1.0);
  d.u1_amplitude = cfg.get_double("data.u1_amplitude", 0.0);
  d.center = {cfg.get_double("data.cx", 0.0), cfg.get_double("data.cy", 0.0),
              cfg.get_double("data.cz", 0.0)};
  d.plateau = cfg.get_double("data.plateau", 0.1);
  d.support = cfg.get_double("data.support", 0.35);
  d.sigma = cfg.get_double("data.sigma", 0.2);
  if (!(d.plateau > 0.0) || !(d.support > d.plateau))
    throw std::invalid_argument("data: need 0 < data.plateau < data.support");
  if (!(d.sigma > 0.0))
    throw std::invalid_argument("data.sigma must be positive");
  resolved.set("data.kind", d.kind);
  resolved.set_double("data.amplitude", d.amplitude);
  resolved.set_double("data.u1_amplitude", d.u1_amplitude);
  resolved.set_double("data.cx", d.center[0]);
  resolved.set_double("data.cy", d.center[1]);
  resolved.set_double("data.cz", d.center[2]);
  resolved.set_double("data.plateau", d.plateau);
  resolved.set_double("data.support", d.support);
  resolved.set_double("data.sigma", d.sigma);
  return d;
}

double smooth01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double data_shape(const DataSpec& d, const std::array<double, 3>& p) {
  const double dx = p[0] - d.center[0];
  const double dy = p[1] - d.center[1];
  const double dz = p[2] - d.center[2];
  const double rho = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (d.kind == "gaussian")
    return std::exp(-0.5 * rho * rho / (d.sigma * d.sigma));
  if (rho <= d.plateau) return 1.0;
  if (rho >= d.support) return 0.0;
  return 1.0 - smooth01((rho - d.plateau) / (d.support - d.plateau));
}

std::pair<Field, Field> build_data(const GridSpec& grid, const DataSpec& d) {
  if (d.kind == "zero") return {Field(grid), Field(grid)};
  Field u0 = make_field(grid, [&](const std::array<double, 3>& p) {
    return d.amplitude * data_shape(d, p);
  });
  Field u1 = make_field(grid, [&](const std::array<double, 3>& p) {
    return d.u1_amplitude * data_shape(d, p);
  });
  return {std::move(u0), std::move(u1)};
}

struct CheckList {
  struct Row {
    std::string name;
    std::string status;
    std::string detail;
  };
  std::vector<Row> rows;

  void add(const std::string& name, bool pass, const std::string& detail) {
    rows.push_back({name, pass ? "pass" : "fail", detail});
  }
  void skip(const std::string& name, const std::string& why) {
    rows.push_back({name, "skipped", why});
  }
  bool all_pass() const {
    for (const Row& r : rows)
      if (r.status == "fail") return false;
    return true;
  }
  const Row* first_fail() const {
    for (const Row& r : rows)
      if (r.status == "fail") return &r;
    return nullptr;
  }
  void to_manifest(ConfigMap& manifest) const {
    for (const Row& r : rows) manifest.set("check." + r.name, r.status);
  }
  void print(bool quiet) const {
    if (quiet) return;
    for (const Row& r : rows) {
      std::cout << "check " << r.name << ": " << r.status;
      if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
      std::cout << '\n';
    }
  }
};

void echo_config(ConfigMap& manifest, const ConfigMap& resolved) {
  for (const std::string& key : resolved.keys())
    manifest.set("config." + key, resolved.get_string(key));
}

ConfigMap config_echo_view(const ConfigMap& manifest) {
  ConfigMap sub;
  for (const std::string& key : manifest.keys())
    if (key.rfind("config.", 0) == 0)
      sub.set(key.substr(7), manifest.get_string(key));
  return sub;
}

class RunDir {
 public:
  static RunDir prepare(const std::string& dir) {
    if (dir.empty()) throw std::invalid_argument("empty output directory");
    fs::path final_path(dir);
    if (fs::exists(final_path))
      throw std::runtime_error("output directory already exists: " + dir);
    fs::path partial(dir + ".partial");
    fs::remove_all(partial);
    fs::create_directories(partial);
    return RunDir(std::move(final_path), std::move(partial));
  }

  RunDir(RunDir&& other) noexcept
      : final_(std::move(other.final_)),
        partial_(std::move(other.partial_)),
        finished_(other.finished_) {
    other.finished_ = true;
  }
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;
  RunDir& operator=(RunDir&&) = delete;

  fs::path file(const std::string& name) const { return partial_ / name; }

  void finish() {
    fs::rename(partial_, final_);
    finished_ = true;
  }

  ~RunDir() {
    if (!finished_) {
      std::error_code ec;
      fs::remove_all(partial_, ec);
    }
  }

 private:
  RunDir(fs::path final_path, fs::path partial)
      : final_(std::move(final_path)), partial_(std::move(partial)) {}

  fs::path final_;
  fs::path partial_;
  bool finished_ = false;
};

std::string resolved_out_dir(const ConfigMap& cfg, const CliOptions& opt) {
  std::string dir = opt.out_dir;
  if (dir.empty() && cfg.has("output.dir")) dir = cfg.get_string("output.dir");
  if (dir.empty())
    throw std::invalid_argument(
        "no output directory: set output.dir or --out");
  if (fs::exists(dir))
    throw std::invalid_argument("output directory already exists: " + dir);
  return dir;
}

void write_ledger_csv(const fs::path& path,
                      const std::vector<EnergySample>& ledger) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t,kinetic,gradient,source_potential,dissipation,identity_residual\n";
  char line[256];
  for (const EnergySample& row : ledger) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  row.t, row.kinetic, row.gradient, row.source_potential,
                  row.dissipation, row.identity_residual);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EnergySample> read_ledger_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,kinetic,gradient,source_potential,dissipation,"
              "identity_residual")
    throw std::runtime_error("bad ledger header in " + path.string());
  std::vector<EnergySample> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
    if (cols.size() != 6)
      throw std::runtime_error("malformed ledger row in " + path.string());
    EnergySample row;
    row.t = cols[0];
    row.kinetic = cols[1];
    row.gradient = cols[2];
    row.source_potential = cols[3];
    row.dissipation = cols[4];
    row.identity_residual = cols[5];
    rows.push_back(row);
  }
  return rows;
}

void write_overlaps_csv(const fs::path& path,
                        const std::vector<OverlapReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "j,l,max_time,max_diff_u,max_diff_ut,samples\n";
  char line[256];
  for (const OverlapReport& r : reports) {
    std::snprintf(line, sizeof line, "%zu,%zu,%.17g,%.17g,%.17g,%zu\n", r.j,
                  r.l, r.max_time, r.max_diff_u, r.max_diff_ut, r.samples);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_theta_csv(const fs::path& path, const ThetaCutoff& theta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const GridSpec& g = theta.profile.grid;
  const bool box = g.geometry == Geometry::Box3D;
  out << (box ? "x,y,z,theta\n" : "x,theta\n");
  char line[160];
  for (std::size_t i = 0; i < theta.profile.size(); ++i) {
    const std::array<double, 3> p = g.node_point(i);
    if (box)
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", p[0], p[1],
                    p[2], theta.profile[i]);
    else
      std::snprintf(line, sizeof line, "%.17g,%.17g\n", p[0],
                    theta.profile[i]);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int finish_command(RunDir& dir, ConfigMap& manifest, const CheckList& checks,
                   const CliOptions& opt) {
  checks.to_manifest(manifest);
  manifest.write_atomic(dir.file("manifest.txt").string());
  dir.finish();
  checks.print(opt.quiet);
  if (const CheckList::Row* fail = checks.first_fail()) {
    std::cerr << "verification failed: " << fail->name;
    if (!fail->detail.empty()) std::cerr << ": " << fail->detail;
    std::cerr << '\n';
    return 1;
  }
  return 0;
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string sanitize_value(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '#') c = ' ';
  return s.empty() ? std::string("unknown") : s;
}

}  // namespace

int cmd_run(const std::string& config_path, const CliOptions& opt) {
  ConfigMap resolved;
  GridSpec grid;
  SourceSpec src;
  DampingSpec dmp;
  DataSpec data;
  double T = 0.0;
  int stride = 1;
  double threshold = 0.0;
  bool check_identity = true;
  double identity_tol = 0.0;
  std::string expected_outcome;
  bool check_weak = true;
  double weak_tol = 0.0;
  bool check_speed = false;
  double speed_tol = 0.0;
  std::string oracle;
  double oracle_tol = 0.0;
  std::string out;
  try {
    const ConfigMap cfg = ConfigMap::parse_file(config_path);
    cfg.require_known(concat(
        concat(concat(grid_keys(), physics_keys()), data_keys()),
        {"run.T", "run.snapshot_stride", "run.blowup_threshold",
         "verify.identity", "verify.identity_tol", "verify.outcome",
         "verify.weak", "verify.weak_tol", "verify.speed", "verify.speed_tol",
         "verify.oracle", "verify.oracle_tol", "output.dir"}));
    grid = grid_from(cfg, resolved);
    src = source_from(cfg, resolved);
    dmp = damping_from(cfg, resolved);
    data = data_from(cfg, resolved);

    T = cfg.get_double("run.T");
    if (!(T > 0.0)) throw std::invalid_argument("run.T must be positive");
    const double steps = T / grid.dt;
    if (std::abs(steps - std::llround(steps)) > 1e-9 * std::max(1.0, steps))
      throw std::invalid_argument("run.T is not a whole number of steps");
    stride = cfg.get_int("run.snapshot_stride", 1);
    if (stride < 0)
      throw std::invalid_argument("run.snapshot_stride must be >= 0");
    threshold = cfg.get_double("run.blowup_threshold", 1e8);
    if (!(threshold > 0.0))
      throw std::invalid_argument("run.blowup_threshold must be positive");

    check_identity = cfg.get_bool("verify.identity", true);
    identity_tol = cfg.get_double("verify.identity_tol", 1e-3);
    expected_outcome = cfg.get_string("verify.outcome", "completed");
    if (expected_outcome != "completed" && expected_outcome != "blew-up" &&
        expected_outcome != "any")
      throw std::invalid_argument(
          "verify.outcome must be completed, blew-up, or any");
    check_weak = cfg.get_bool("verify.weak", true);
    weak_tol = cfg.get_double("verify.weak_tol", 1e-2);
    check_speed = cfg.get_bool("verify.speed", false);
    speed_tol = cfg.get_double("verify.speed_tol", 1e-12);
    if (check_speed && data.kind != "bump")
      throw std::invalid_argument(
          "verify.speed needs compactly supported data (data.kind = bump)");
    oracle = cfg.get_string("verify.oracle", "none");
    if (oracle != "none" && oracle != "dalembert")
      throw std::invalid_argument("verify.oracle must be none or dalembert");
    if (oracle == "dalembert") {
      const bool linear = src.coeff == 0.0 && dmp.a() == 0.0;
      if (grid.geometry != Geometry::Line1D || data.kind != "gaussian" ||
          data.u1_amplitude != 0.0 || !linear)
        throw std::invalid_argument(
            "verify.oracle = dalembert needs a line grid, gaussian data, "
            "zero initial velocity, and zero source/damping");
    }
    oracle_tol = cfg.get_double("verify.oracle_tol", 1e-3);

    resolved.set_double("run.T", T);
    resolved.set_int("run.snapshot_stride", stride);
    resolved.set_double("run.blowup_threshold", threshold);
    resolved.set_bool("verify.identity", check_identity);
    resolved.set_double("verify.identity_tol", identity_tol);
    resolved.set("verify.outcome", expected_outcome);
    resolved.set_bool("verify.weak", check_weak);
    resolved.set_double("verify.weak_tol", weak_tol);
    resolved.set_bool("verify.speed", check_speed);
    resolved.set_double("verify.speed_tol", speed_tol);
    resolved.set("verify.oracle", oracle);
    resolved.set_double("verify.oracle_tol", oracle_tol);

    out = resolved_out_dir(cfg, opt);
    resolved.set("output.dir", out);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunDir dir = RunDir::prepare(out);

    auto [u0, u1] = build_data(grid, data);
    State s0;
    s0.u = std::move(u0);
    s0.v = std::move(u1);
    s0.t = 0.0;
    SolveOptions opts;
    opts.snapshot_stride = stride;
    opts.record_ledger = true;
    opts.blowup_threshold = threshold;

    const StageTimer total_t;
    const StageTimer solve_t;
    const Trajectory traj = solve_on_patch(s0, T, src, dmp, opts);
    const double solve_s = solve_t.seconds();

    const StageTimer verify_t;
    CheckList checks;
    ConfigMap manifest;
    manifest.set("manifest.kind", "run");
    manifest.set_int("manifest.schema", 1);
    echo_config(manifest, resolved);

    const std::string outcome = outcome_name(traj.outcome);
    checks.add("outcome",
               expected_outcome == "any" || outcome == expected_outcome,
               "outcome " + outcome + ", expected " + expected_outcome);

    double max_identity = 0.0;
    for (const EnergySample& row : traj.ledger)
      max_identity = std::max(max_identity, row.identity_residual);
    if (check_identity)
      checks.add("energy-identity", max_identity <= identity_tol,
                 "max residual " + format_g(max_identity) + ", tol " +
                     format_g(identity_tol));
    else
      checks.skip("energy-identity", "disabled");

    if (!check_weak) {
      checks.skip("weak-residual", "disabled");
    } else if (stride != 1) {
      checks.skip("weak-residual", "needs run.snapshot_stride = 1");
    } else if (traj.outcome != Outcome::Completed) {
      checks.skip("weak-residual", "run did not complete");
    } else {
      const TestFunctionBasis basis;
      const VariationalResidual weak = weak_residual(traj, src, dmp, basis);
      checks.add("weak-residual", weak.max_residual <= weak_tol,
                 "max residual " + format_g(weak.max_residual) + ", tol " +
                     format_g(weak_tol));
      manifest.set_double("result.weak_residual", weak.max_residual);
      manifest.set_int("result.weak_evaluated", weak.evaluated);
      manifest.set_int("result.weak_rejected", weak.rejected);
      manifest.set("result.weak_seed", std::to_string(basis.seed));
    }

    if (check_speed) {
      try {
        const SpeedReport speed =
            finite_speed_check(traj, data.center, data.support);
        checks.add("finite-speed", speed.max_leakage <= speed_tol,
                   "max leakage " + format_g(speed.max_leakage) + ", tol " +
                       format_g(speed_tol));
        manifest.set_double("result.speed_max_leakage", speed.max_leakage);
      } catch (const std::exception& e) {
        checks.add("finite-speed", false, e.what());
      }
    }

    if (oracle == "dalembert") {
      const State& last = traj.final_state();
      const double t = last.t;
      Field diff(grid);
      for (std::size_t i = 0; i < diff.size(); ++i) {
        const std::array<double, 3> p = grid.node_point(i);
        const std::array<double, 3> left{p[0] - t, p[1], p[2]};
        const std::array<double, 3> right{p[0] + t, p[1], p[2]};
        const double exact = 0.5 * data.amplitude *
                             (data_shape(data, left) + data_shape(data, right));
        diff[i] = last.u[i] - exact;
      }
      const double err = norm_lq(diff, 2.0);
      checks.add("oracle", err <= oracle_tol,
                 "dalembert L2 error " + format_g(err) + " at t = " +
                     format_g(t) + ", tol " + format_g(oracle_tol));
      manifest.set_double("result.oracle_l2_error", err);
    }
    const double verify_s = verify_t.seconds();

    const StageTimer io_t;
    write_ledger_csv(dir.file("ledger.csv"), traj.ledger);
    for (std::size_t i = 0; i < traj.states.size(); ++i)
      write_snapshot_csv(dir.file(snapshot_name(traj.state_steps[i])),
                         traj.states[i].u, traj.states[i].v);
    const double io_s = io_t.seconds();

    manifest.set("result.outcome", outcome);
    manifest.set_double("result.outcome_time", traj.outcome_time);
    manifest.set_double("result.peak_abs_u", traj.peak_abs_u);
    manifest.set_int("result.steps", traj.steps);
    manifest.set_double("result.dissipation_total", traj.dissipation_total);
    manifest.set_int("result.states_recorded",
                     static_cast<long long>(traj.states.size()));
    manifest.set_int("result.ledger_rows",
                     static_cast<long long>(traj.ledger.size()));
    manifest.set_double("result.max_identity_residual", max_identity);
    manifest.set_double("timing.solve_s", solve_s);
    manifest.set_double("timing.verify_s", verify_s);
    manifest.set_double("timing.io_s", io_s);
    manifest.set_double("timing.total_s", total_t.seconds());

    return finish_command(dir, manifest, checks, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_patch_run(const std::string& config_path, const CliOptions& opt) {
  ConfigMap resolved;
  GridSpec grid;
  SourceSpec src;
  DampingSpec dmp;
  DataSpec data;
  Field u0, u1;
  Lattice lat;
  CutPlan plan;
  int stride = 1;
  double threshold = 0.0;
  bool check_overlap = true;
  double overlap_tol = 0.0;
  bool check_cut = true;
  std::string out;
  try {
    const ConfigMap cfg = ConfigMap::parse_file(config_path);
    cfg.require_known(concat(
        concat(concat(grid_keys(), physics_keys()), data_keys()),
        {"cut.K", "patch.d", "patch.r_override", "run.snapshot_stride",
         "run.blowup_threshold", "verify.overlap", "verify.overlap_tol",
         "verify.cut", "output.dir"}));
    grid = grid_from(cfg, resolved);
    src = source_from(cfg, resolved);
    dmp = damping_from(cfg, resolved);
    data = data_from(cfg, resolved);

    const double d = cfg.get_double("patch.d");
    stride = cfg.get_int("run.snapshot_stride", 1);
    if (stride < 1)
      throw std::invalid_argument("run.snapshot_stride must be >= 1");
    threshold = cfg.get_double("run.blowup_threshold", 1e8);
    if (!(threshold > 0.0))
      throw std::invalid_argument("run.blowup_threshold must be positive");
    check_overlap = cfg.get_bool("verify.overlap", true);
    overlap_tol = cfg.get_double("verify.overlap_tol", 1e-12);
    check_cut = cfg.get_bool("verify.cut", true);

    std::tie(u0, u1) = build_data(grid, data);
    lat = build_lattice(grid, d);

    const double global_norm = seminorm_grad(u0) + norm_lq(u1, 2.0);
    const double K =
        cfg.has("cut.K") ? cfg.get_double("cut.K")
                         : std::max(2.0 * global_norm, 1.0);
    if (cfg.has("patch.r_override")) {
      plan.K = K;
      plan.r = cfg.get_double("patch.r_override");
      plan.sobolev_C = sobolev_constant(grid.geometry);
      plan.validate();
      make_patch_grid(grid, snap_to_node(grid, lat.centers.front()), plan.r);
      resolved.set_double("patch.r_override", plan.r);
    } else {
      plan = choose_radius(u0, u1, K, lat.centers);
    }
    if (!(d < 0.5 * plan.r))
      throw std::invalid_argument(
          "patch.d must be smaller than half the localization radius (d = " +
          format_g(d) + ", r = " + format_g(plan.r) + ")");

    resolved.set_double("patch.d", d);
    resolved.set_double("cut.K", K);
    resolved.set_int("run.snapshot_stride", stride);
    resolved.set_double("run.blowup_threshold", threshold);
    resolved.set_bool("verify.overlap", check_overlap);
    resolved.set_double("verify.overlap_tol", overlap_tol);
    resolved.set_bool("verify.cut", check_cut);

    out = resolved_out_dir(cfg, opt);
    resolved.set("output.dir", out);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunDir dir = RunDir::prepare(out);

    const StageTimer total_t;
    const StageTimer cut_t;
    std::vector<CutData> cut = cut_all(u0, u1, lat, plan);
    const double cut_s = cut_t.seconds();

    SolveOptions opts;
    opts.snapshot_stride = stride;
    opts.record_ledger = false;
    opts.blowup_threshold = threshold;
    const StageTimer solve_t;
    const GlobalSolution gs = solve_all_patches(
        grid, lat, plan, std::move(cut), src, dmp, 0.0, 0.0, opts, opt.jobs);
    const double solve_s = solve_t.seconds();

    ConfigMap manifest;
    manifest.set("manifest.kind", "patch-run");
    manifest.set_int("manifest.schema", 1);
    echo_config(manifest, resolved);
    manifest.set_double("cut.r", plan.r);
    manifest.set_double("cut.sobolev_c", plan.sobolev_C);
    manifest.set_int("lattice.centers",
                     static_cast<long long>(lat.centers.size()));
    manifest.set_double("result.valid_until", gs.valid_until);

    CheckList checks;
    bool cuts_ok = true;
    for (std::size_t i = 0; i < gs.data.size(); ++i) {
      const std::string prefix = "patch." + std::to_string(i);
      const Trajectory& traj = gs.patches[i];
      const CutBoundReport& rep = gs.data[i].report;
      manifest.set(prefix + ".outcome", outcome_name(traj.outcome));
      manifest.set_double(prefix + ".outcome_time", traj.outcome_time);
      manifest.set_double(prefix + ".peak_abs_u", traj.peak_abs_u);
      manifest.set_double(prefix + ".cut_total", rep.total);
      manifest.set_double(prefix + ".cut_margin", rep.margin);
      manifest.set_bool(prefix + ".cut_ok", rep.total_ok);
      cuts_ok = cuts_ok && rep.total_ok;
    }
    if (check_cut)
      checks.add("cut-bounds", cuts_ok,
                 cuts_ok ? "every patch datum under the budget"
                         : "a patch datum exceeds the budget");
    else
      checks.skip("cut-bounds", "disabled");

    checks.add("patches", gs.ok, gs.ok ? "all completed" : gs.failure);
    if (!gs.ok) {
      manifest.set_int("result.failed_patch",
                       static_cast<long long>(gs.failed_patch));
      manifest.set("result.failure", sanitize_value(gs.failure));
      manifest.set_int("result.states_recorded", 0);
    }

    const StageTimer verify_t;
    double io_s = 0.0;
    if (!gs.ok) {
      checks.skip("overlap", "patches failed");
    } else {
      const std::vector<OverlapRegion> regions =
          overlap_regions(gs.lattice, plan.r);
      std::vector<OverlapReport> reports;
      double max_u = 0.0, max_ut = 0.0;
      std::size_t samples = 0;
      for (const OverlapRegion& reg : regions) {
        reports.push_back(overlap_consistency(gs, reg.j, reg.l));
        max_u = std::max(max_u, reports.back().max_diff_u);
        max_ut = std::max(max_ut, reports.back().max_diff_ut);
        samples += reports.back().samples;
      }
      manifest.set_int("overlap.pairs",
                       static_cast<long long>(reports.size()));
      manifest.set_double("overlap.max_diff_u", max_u);
      manifest.set_double("overlap.max_diff_ut", max_ut);
      manifest.set_int("overlap.samples", static_cast<long long>(samples));
      if (!check_overlap)
        checks.skip("overlap", "disabled");
      else if (reports.empty())
        checks.skip("overlap", "no overlapping patches");
      else
        checks.add("overlap", std::max(max_u, max_ut) <= overlap_tol,
                   "max discrepancy " + format_g(std::max(max_u, max_ut)) +
                       ", tol " + format_g(overlap_tol));

      const StageTimer io_t;
      write_overlaps_csv(dir.file("overlaps.csv"), reports);
      int recorded = 0;
      for (int k = 0;; k += stride) {
        const double t = k * grid.dt;
        if (!(t < gs.valid_until - 1e-12)) break;
        const State st = assemble_state(gs, t);
        write_snapshot_csv(dir.file(snapshot_name(k)), st.u, st.v);
        ++recorded;
      }
      manifest.set_int("result.states_recorded", recorded);
      io_s = io_t.seconds();
    }
    const double verify_s = verify_t.seconds();

    manifest.set_double("timing.cut_s", cut_s);
    manifest.set_double("timing.solve_s", solve_s);
    manifest.set_double("timing.verify_s", verify_s);
    manifest.set_double("timing.io_s", io_s);
    manifest.set_double("timing.total_s", total_t.seconds());

    return finish_command(dir, manifest, checks, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_cut_demo(const std::string& config_path, const CliOptions& opt) {
  ConfigMap resolved;
  GridSpec grid;
  DataSpec data;
  Field u0, u1;
  std::vector<std::array<double, 3>> centers;
  CutPlan plan;
  bool check_cut = true;
  std::string out;
  try {
    const ConfigMap cfg = ConfigMap::parse_file(config_path);
    cfg.require_known(concat(concat(grid_keys(), data_keys()),
                             {"cut.K", "patch.d", "verify.cut",
                              "output.dir"}));
    grid = grid_from(cfg, resolved);
    data = data_from(cfg, resolved);
    check_cut = cfg.get_bool("verify.cut", true);
    std::tie(u0, u1) = build_data(grid, data);

    if (cfg.has("patch.d")) {
      const double d = cfg.get_double("patch.d");
      centers = build_lattice(grid, d).centers;
      resolved.set_double("patch.d", d);
    } else {
      centers = {snap_to_node(grid, {0.0, 0.0, 0.0})};
    }

    const double global_norm = seminorm_grad(u0) + norm_lq(u1, 2.0);
    const double K =
        cfg.has("cut.K") ? cfg.get_double("cut.K")
                         : std::max(2.0 * global_norm, 1.0);
    plan = choose_radius(u0, u1, K, centers);

    resolved.set_double("cut.K", K);
    resolved.set_bool("verify.cut", check_cut);
    out = resolved_out_dir(cfg, opt);
    resolved.set("output.dir", out);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunDir dir = RunDir::prepare(out);
    const StageTimer total_t;

    ConfigMap manifest;
    manifest.set("manifest.kind", "cut-demo");
    manifest.set_int("manifest.schema", 1);
    echo_config(manifest, resolved);
    manifest.set_double("cut.r", plan.r);
    manifest.set_double("cut.sobolev_c", plan.sobolev_C);
    manifest.set_int("lattice.centers",
                     static_cast<long long>(centers.size()));

    CheckList checks;
    bool all_ok = true;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const CutData cut = cut_data(u0, u1, centers[i], plan);
      const ThetaCutoff theta = build_theta(cut.center, plan.r, grid);
      write_theta_csv(dir.file("theta_" + std::to_string(i) + ".csv"), theta);
      const std::string prefix = "cut." + std::to_string(i);
      manifest.set_double(prefix + ".total", cut.report.total);
      manifest.set_double(prefix + ".margin", cut.report.margin);
      manifest.set_bool(prefix + ".ok", cut.report.total_ok);
      manifest.set_double(prefix + ".max_theta_gradient", theta.max_gradient);
      all_ok = all_ok && cut.report.total_ok;
    }
    if (check_cut)
      checks.add("cut-bounds", all_ok,
                 all_ok ? "every center under the budget"
                        : "a center exceeds the budget");
    else
      checks.skip("cut-bounds", "disabled");

    manifest.set_double("timing.total_s", total_t.seconds());
    return finish_command(dir, manifest, checks, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_sweep(const std::string& config_path, const CliOptions& opt) {
  ConfigMap resolved;
  SweepProtocol proto;
  std::vector<double> p_values, m_values;
  double lambda = 8.0;
  bool check_cells = true;
  std::string out;
  try {
    const ConfigMap cfg = ConfigMap::parse_file(config_path);
    cfg.require_known(concat(
        grid_keys(),
        {"sweep.T", "sweep.lambda", "sweep.p_values", "sweep.m_values",
         "data.plateau", "data.support", "source.coeff", "source.sign",
         "damping.a", "run.blowup_threshold", "verify.cells", "output.dir"}));
    proto = default_sweep_protocol();
    const std::string geom = cfg.get_string("grid.geometry", "line");
    proto.grid.geometry = geometry_from_name(geom);
    proto.grid.extent = cfg.get_double("grid.extent", proto.grid.extent);
    proto.grid.h = cfg.get_double("grid.h", proto.grid.h);
    proto.grid.dt = cfg.get_double("grid.dt", proto.grid.dt);
    proto.horizon = cfg.get_double("sweep.T", proto.horizon);
    proto.bump_plateau = cfg.get_double("data.plateau", proto.bump_plateau);
    proto.bump_support = cfg.get_double("data.support", proto.bump_support);
    proto.source_coeff = cfg.get_double("source.coeff", proto.source_coeff);
    proto.source_sign = cfg.get_double("source.sign", proto.source_sign);
    proto.damping_coeff = cfg.get_double("damping.a", proto.damping_coeff);
    proto.blowup_threshold =
        cfg.get_double("run.blowup_threshold", proto.blowup_threshold);
    proto.validate();
    if (proto.source_sign != -1.0)
      throw std::invalid_argument("sweep needs a focusing source (sign -1)");

    p_values = cfg.get_list("sweep.p_values", default_p_values());
    m_values = cfg.get_list("sweep.m_values", default_m_values());
    lambda = cfg.get_double("sweep.lambda", 8.0);
    if (!(lambda >= 0.0))
      throw std::invalid_argument("sweep.lambda must be nonnegative");
    check_cells = cfg.get_bool("verify.cells", true);

    resolved.set("grid.geometry", geom);
    resolved.set_double("grid.extent", proto.grid.extent);
    resolved.set_double("grid.h", proto.grid.h);
    resolved.set_double("grid.dt", proto.grid.dt);
    resolved.set_double("sweep.T", proto.horizon);
    resolved.set_double("sweep.lambda", lambda);
    resolved.set_list("sweep.p_values", p_values);
    resolved.set_list("sweep.m_values", m_values);
    resolved.set_double("data.plateau", proto.bump_plateau);
    resolved.set_double("data.support", proto.bump_support);
    resolved.set_double("source.coeff", proto.source_coeff);
    resolved.set_double("source.sign", proto.source_sign);
    resolved.set_double("damping.a", proto.damping_coeff);
    resolved.set_double("run.blowup_threshold", proto.blowup_threshold);
    resolved.set_bool("verify.cells", check_cells);
    out = resolved_out_dir(cfg, opt);
    resolved.set("output.dir", out);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunDir dir = RunDir::prepare(out);
    const StageTimer total_t;
    const StageTimer sweep_t;
    const PhaseDiagram diagram =
        sweep(p_values, m_values, lambda, proto, opt.jobs);
    const double sweep_s = sweep_t.seconds();

    {
      std::ofstream csv(dir.file("diagram.csv"));
      if (!csv) throw std::runtime_error("cannot write diagram.csv");
      write_diagram_csv(csv, diagram);
    }
    {
      std::ofstream map(dir.file("region.dat"));
      if (!map) throw std::runtime_error("cannot write region.dat");
      write_region_map(map, diagram);
    }

    ConfigMap manifest;
    manifest.set("manifest.kind", "sweep");
    manifest.set_int("manifest.schema", 1);
    echo_config(manifest, resolved);

    std::size_t failed = 0;
    for (const PhaseCell& c : diagram.cells)
      if (c.outcome == CellOutcome::Failed) ++failed;
    const DichotomySplit split = split_by_damping_strength(diagram);
    manifest.set_int("result.cells",
                     static_cast<long long>(diagram.cells.size()));
    manifest.set_int("result.failed_cells", static_cast<long long>(failed));
    manifest.set_int("result.strong_total",
                     static_cast<long long>(split.strong_total));
    manifest.set_int("result.strong_survived",
                     static_cast<long long>(split.strong_survived));
    manifest.set_int("result.weak_total",
                     static_cast<long long>(split.weak_total));
    manifest.set_int("result.weak_blewup",
                     static_cast<long long>(split.weak_blewup));
    manifest.set_double("result.survived_fraction",
                        split.survived_fraction());
    manifest.set_double("result.blewup_fraction", split.blewup_fraction());
    manifest.set_double("timing.sweep_s", sweep_s);
    manifest.set_double("timing.total_s", total_t.seconds());

    CheckList checks;
    if (check_cells)
      checks.add("cells", failed == 0,
                 failed == 0 ? "no failed cells"
                             : std::to_string(failed) + " failed cells");
    else
      checks.skip("cells", "disabled");

    return finish_command(dir, manifest, checks, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

namespace {

struct StoredRun {
  fs::path dir;
  ConfigMap manifest;
};

std::vector<std::pair<int, fs::path>> snapshot_files(const fs::path& dir) {
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int step = -1;
    if (std::sscanf(name.c_str(), "snapshot_%d.csv", &step) == 1 && step >= 0)
      files.emplace_back(step, entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

void verify_run_dir(const StoredRun& run, CheckList& checks) {
  const ConfigMap echo = config_echo_view(run.manifest);
  ConfigMap scratch;
  const GridSpec grid = grid_from(echo, scratch);
  const SourceSpec src = source_from(echo, scratch);
  const DampingSpec dmp = damping_from(echo, scratch);
  const int stride = echo.get_int("run.snapshot_stride");

  {
    std::string missing;
    for (const char* key :
         {"result.outcome", "result.steps", "result.states_recorded",
          "result.ledger_rows", "result.max_identity_residual"})
      if (!run.manifest.has(key)) missing = key;
    checks.add("manifest", missing.empty(),
               missing.empty() ? "all required keys present"
                               : "missing key " + missing);
    if (!missing.empty()) return;
  }

  std::vector<EnergySample> ledger;
  try {
    ledger = read_ledger_csv(run.dir / "ledger.csv");
    const auto expected =
        static_cast<std::size_t>(run.manifest.get_int("result.ledger_rows"));
    if (ledger.size() != expected)
      throw std::runtime_error("ledger has " + std::to_string(ledger.size()) +
                               " rows, manifest says " +
                               std::to_string(expected));
    if (ledger.empty()) throw std::runtime_error("ledger is empty");
    const double e0 = ledger.front().kinetic + ledger.front().gradient +
                      ledger.front().source_potential;
    double max_residual = 0.0;
    for (const EnergySample& row : ledger) {
      const double recomputed = std::abs(row.kinetic + row.gradient +
                                         row.source_potential +
                                         row.dissipation - e0);
      if (std::abs(recomputed - row.identity_residual) >
          1e-12 * std::max(1.0, std::abs(e0)))
        throw std::runtime_error(
            "stored identity residual at t = " + format_g(row.t) +
            " does not match its energy columns");
      max_residual = std::max(max_residual, row.identity_residual);
    }
    const double recorded =
        run.manifest.get_double("result.max_identity_residual");
    if (!close_rel(max_residual, recorded, 1e-9))
      throw std::runtime_error("max residual " + format_g(max_residual) +
                               " does not match manifest " +
                               format_g(recorded));
    checks.add("ledger-identity", true,
               "max residual " + format_g(max_residual));
  } catch (const std::exception& e) {
    checks.add("ledger-identity", false, e.what());
  }

  std::vector<State> states;
  std::vector<int> steps;
  try {
    const auto files = snapshot_files(run.dir);
    const auto expected = static_cast<std::size_t>(
        run.manifest.get_int("result.states_recorded"));
    if (files.size() != expected)
      throw std::runtime_error("found " + std::to_string(files.size()) +
                               " snapshots, manifest says " +
                               std::to_string(expected));
    for (const auto& [step, path] : files) {
      auto [u, ut] = read_snapshot_csv(path, grid);
      if (!u.all_finite() || !ut.all_finite())
        throw std::runtime_error("non-finite values in " +
                                 path.filename().string());
      states.push_back({std::move(u), std::move(ut), step * grid.dt});
      steps.push_back(step);
    }
    checks.add("snapshots", true,
               std::to_string(states.size()) + " files parsed");
  } catch (const std::exception& e) {
    checks.add("snapshots", false, e.what());
    return;
  }

  try {
    if (ledger.empty()) throw std::runtime_error("no ledger to compare");
    std::size_t compared = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto row_idx = static_cast<std::size_t>(steps[i]);
      if (row_idx >= ledger.size()) continue;
      const EnergySample expect = ledger[row_idx];
      const EnergySample got = energy(states[i], src);
      if (!close_rel(got.kinetic, expect.kinetic, 1e-9) ||
          !close_rel(got.gradient, expect.gradient, 1e-9) ||
          !close_rel(got.source_potential, expect.source_potential, 1e-9))
        throw std::runtime_error(
            "snapshot energy at step " + std::to_string(steps[i]) +
            " does not match the ledger row");
      ++compared;
    }
    if (compared == 0) throw std::runtime_error("no comparable rows");
    checks.add("snapshot-energy", true,
               std::to_string(compared) + " states cross-checked");
  } catch (const std::exception& e) {
    checks.add("snapshot-energy", false, e.what());
  }

  if (!run.manifest.has("result.weak_residual")) {
    checks.skip("weak-residual", "not recorded in the manifest");
  } else if (stride != 1) {
    checks.skip("weak-residual", "snapshots not at every step");
  } else {
    try {
      bool contiguous = !steps.empty() && steps.front() == 0;
      for (std::size_t i = 0; i < steps.size(); ++i)
        contiguous = contiguous && steps[i] == static_cast<int>(i);
      if (!contiguous)
        throw std::runtime_error("snapshot steps are not contiguous");
      Trajectory traj;
      traj.states = std::move(states);
      traj.state_steps = std::move(steps);
      traj.dt = grid.dt;
      traj.steps = traj.state_steps.back();
      TestFunctionBasis basis;
      basis.seed = std::stoull(run.manifest.get_string("result.weak_seed"));
      const VariationalResidual weak = weak_residual(traj, src, dmp, basis);
      const double recorded = run.manifest.get_double("result.weak_residual");
      if (!close_rel(weak.max_residual, recorded, 1e-9))
        throw std::runtime_error("recomputed residual " +
                                 format_g(weak.max_residual) +
                                 " does not match manifest " +
                                 format_g(recorded));
      checks.add("weak-residual", true,
                 "max residual " + format_g(weak.max_residual));
    } catch (const std::exception& e) {
      checks.add("weak-residual", false, e.what());
    }
  }
}

void verify_patch_dir(const StoredRun& run, CheckList& checks) {
  const ConfigMap echo = config_echo_view(run.manifest);
  ConfigMap scratch;
  const GridSpec grid = grid_from(echo, scratch);

  {
    std::string missing;
    for (const char* key : {"result.valid_until", "cut.r",
                            "result.states_recorded", "overlap.max_diff_u"})
      if (!run.manifest.has(key)) missing = key;
    checks.add("manifest", missing.empty(),
               missing.empty() ? "all required keys present"
                               : "missing key " + missing);
    if (!missing.empty()) return;
  }

  try {
    std::ifstream in(run.dir / "overlaps.csv");
    if (!in) throw std::runtime_error("cannot read overlaps.csv");
    std::string line;
    if (!std::getline(in, line) ||
        line != "j,l,max_time,max_diff_u,max_diff_ut,samples")
      throw std::runtime_error("bad overlaps.csv header");
    double max_u = 0.0, max_ut = 0.0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string tok;
      std::vector<double> cols;
      while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
      if (cols.size() != 6)
        throw std::runtime_error("malformed overlaps.csv row");
      max_u = std::max(max_u, cols[3]);
      max_ut = std::max(max_ut, cols[4]);
      ++rows;
    }
    const auto pairs =
        static_cast<std::size_t>(run.manifest.get_int("overlap.pairs"));
    if (rows != pairs)
      throw std::runtime_error("overlaps.csv rows do not match the manifest");
    if (!close_rel(max_u, run.manifest.get_double("overlap.max_diff_u"),
                   1e-12) ||
        !close_rel(max_ut, run.manifest.get_double("overlap.max_diff_ut"),
                   1e-12))
      throw std::runtime_error(
          "overlap maxima do not match the manifest record");
    const double tol = echo.get_double("verify.overlap_tol", 1e-12);
    if (echo.get_bool("verify.overlap", true) &&
        std::max(max_u, max_ut) > tol)
      throw std::runtime_error("recorded overlap discrepancy " +
                               format_g(std::max(max_u, max_ut)) +
                               " exceeds tol " + format_g(tol));
    checks.add("overlaps", true, std::to_string(rows) + " pairs checked");
  } catch (const std::exception& e) {
    checks.add("overlaps", false, e.what());
  }

  try {
    const auto files = snapshot_files(run.dir);
    const auto expected = static_cast<std::size_t>(
        run.manifest.get_int("result.states_recorded"));
    if (files.size() != expected)
      throw std::runtime_error("found " + std::to_string(files.size()) +
                               " snapshots, manifest says " +
                               std::to_string(expected));
    for (const auto& [step, path] : files) {
      auto [u, ut] = read_snapshot_csv(path, grid);
      if (!u.all_finite() || !ut.all_finite())
        throw std::runtime_error("non-finite values in " +
                                 path.filename().string());
      if (!(step * grid.dt < run.manifest.get_double("result.valid_until")))
        throw std::runtime_error(path.filename().string() +
                                 " lies beyond the validity horizon");
    }
    checks.add("snapshots", true,
               std::to_string(files.size()) + " files parsed");
  } catch (const std::exception& e) {
    checks.add("snapshots", false, e.what());
  }
}

void verify_sweep_dir(const StoredRun& run, CheckList& checks) {
  try {
    std::ifstream in(run.dir / "diagram.csv");
    if (!in) throw std::runtime_error("cannot read diagram.csv");
    std::string line;
    if (!std::getline(in, line) || line != "p,m,lambda,outcome,t_star")
      throw std::runtime_error("bad diagram.csv header");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string tok;
      std::vector<std::string> cols;
      while (std::getline(ss, tok, ',')) cols.push_back(tok);
      if (cols.size() != 5)
        throw std::runtime_error("malformed diagram.csv row");
      if (cols[3] != "survived" && cols[3] != "blew-up" && cols[3] != "failed")
        throw std::runtime_error("unknown outcome '" + cols[3] + "'");
      if (!(std::stod(cols[4]) >= 0.0))
        throw std::runtime_error("negative detection time");
      ++rows;
    }
    const auto cells =
        static_cast<std::size_t>(run.manifest.get_int("result.cells"));
    if (rows != cells)
      throw std::runtime_error("diagram.csv rows do not match the manifest");
    checks.add("diagram", true, std::to_string(rows) + " cells listed");
  } catch (const std::exception& e) {
    checks.add("diagram", false, e.what());
  }
}

void verify_cut_dir(const StoredRun& run, CheckList& checks) {
  try {
    const auto centers =
        static_cast<std::size_t>(run.manifest.get_int("lattice.centers"));
    for (std::size_t i = 0; i < centers; ++i) {
      const fs::path path =
          run.dir / ("theta_" + std::to_string(i) + ".csv");
      std::ifstream in(path);
      if (!in)
        throw std::runtime_error("cannot read " + path.filename().string());
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.rfind(',');
        const double theta = std::stod(line.substr(comma + 1));
        if (!(theta >= 0.0) || !(theta <= 1.0))
          throw std::runtime_error("cutoff value outside [0, 1] in " +
                                   path.filename().string());
      }
    }
    checks.add("theta-profiles", true,
               std::to_string(centers) + " profiles in range");
  } catch (const std::exception& e) {
    checks.add("theta-profiles", false, e.what());
  }
}

}  // namespace

int cmd_verify(const std::string& config_path, const CliOptions& opt) {
  std::string dir_name = opt.out_dir;
  try {
    if (dir_name.empty()) {
      if (config_path.empty())
        throw std::invalid_argument(
            "verify needs a run directory: pass --out or a config with "
            "output.dir");
      const ConfigMap cfg = ConfigMap::parse_file(config_path);
      cfg.require_known({"output.dir"});
      dir_name = cfg.get_string("output.dir");
    }
    if (!fs::is_directory(dir_name))
      throw std::invalid_argument("not a run directory: " + dir_name);
    if (!fs::exists(fs::path(dir_name) / "manifest.txt"))
      throw std::invalid_argument("no manifest.txt in " + dir_name +
                                  " (empty or foreign directory)");
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  CheckList checks;
  try {
    StoredRun run{fs::path(dir_name),
                  ConfigMap::parse_file(
                      (fs::path(dir_name) / "manifest.txt").string())};
    std::size_t stored_fails = 0;
    for (const std::string& key : run.manifest.keys())
      if (key.rfind("check.", 0) == 0 &&
          run.manifest.get_string(key) == "fail")
        ++stored_fails;
    checks.add("stored-checks", stored_fails == 0,
               stored_fails == 0
                   ? "no failures recorded at run time"
                   : std::to_string(stored_fails) + " recorded failures");
    const std::string kind = run.manifest.get_string("manifest.kind");
    if (kind == "run")
      verify_run_dir(run, checks);
    else if (kind == "patch-run")
      verify_patch_dir(run, checks);
    else if (kind == "sweep")
      verify_sweep_dir(run, checks);
    else if (kind == "cut-demo")
      verify_cut_dir(run, checks);
    else
      checks.add("manifest", false, "unknown manifest.kind '" + kind + "'");
  } catch (const std::exception& e) {
    checks.add("manifest", false, e.what());
  }

  checks.print(opt.quiet);
  if (const CheckList::Row* fail = checks.first_fail()) {
    std::cerr << "verification failed: " << fail->name;
    if (!fail->detail.empty()) std::cerr << ": " << fail->detail;
    std::cerr << '\n';
    return 1;
  }
  return 0;
}

}  // namespace wavepatch
