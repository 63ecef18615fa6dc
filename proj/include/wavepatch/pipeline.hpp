/// @file pipeline.hpp
/// Configuration-driven entry points behind the command-line tool.  Each
/// command reads a flat key/value config, computes into a fresh run
/// directory, writes CSV outputs plus a manifest in the same key/value
/// format, and finishes with an atomic rename of the directory.
///
/// Exit codes: 0 when the run and every enabled check passed, 1 when the
/// compute or a verification failed, 2 for configuration or usage errors
/// (nothing is written in that case).

#pragma once

#include <string>

namespace wavepatch {

struct CliOptions {
  int jobs = 0;
  /// Overrides output.dir; for the verify command this names the run
  /// directory to inspect.
  std::string out_dir;
  bool quiet = false;
};

/// Single-domain solve: ledger, state snapshots, enabled checks, manifest.
int cmd_run(const std::string& config_path, const CliOptions& opt = {});

/// Cut/solve/patch pipeline: per-patch solves, overlap report, assembled
/// global snapshots up to the validity horizon, manifest.
int cmd_patch_run(const std::string& config_path, const CliOptions& opt = {});

/// Re-checks a stored run directory against its own manifest.
/// `config_path` may be empty when the directory is given via --out.
int cmd_verify(const std::string& config_path, const CliOptions& opt = {});

/// Exponent-plane sweep to diagram CSV and region map.
int cmd_sweep(const std::string& config_path, const CliOptions& opt = {});

/// Cutting stage only: radius selection, cutoff profiles, bound reports.
int cmd_cut_demo(const std::string& config_path, const CliOptions& opt = {});

}  // namespace wavepatch
