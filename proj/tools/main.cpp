#include <functional>
#include <string>

#include <CLI11.hpp>

#include "wavepatch/pipeline.hpp"

namespace {

struct SubcommandArgs {
  std::string config;
  wavepatch::CliOptions opt;
};

CLI::App* add_subcommand(CLI::App& app, SubcommandArgs& args,
                         const std::string& name, const std::string& brief,
                         bool config_required) {
  CLI::App* sub = app.add_subcommand(name, brief);
  CLI::Option* cfg =
      sub->add_option("--config", args.config, "recipe file (key = value)");
  if (config_required)
    cfg->required()->check(CLI::ExistingFile);
  else
    cfg->check(CLI::ExistingFile);
  sub->add_option("--jobs", args.opt.jobs,
                  "worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", args.opt.out_dir,
                  "output directory (overrides output.dir)");
  sub->add_flag("--quiet", args.opt.quiet, "suppress per-check output");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"damped semilinear wave runs: local solves, cutting, cone "
               "patching, and verification"};
  app.require_subcommand(1);

  SubcommandArgs run_args, patch_args, verify_args, sweep_args, cut_args;
  CLI::App* run = add_subcommand(
      app, run_args, "run", "solve one configuration on the full grid", true);
  CLI::App* patch = add_subcommand(
      app, patch_args, "patch-run",
      "cut the data on a lattice, solve every patch, assemble the cones",
      true);
  CLI::App* verify = add_subcommand(
      app, verify_args, "verify",
      "recheck a stored run directory against its manifest", false);
  CLI::App* sweep = add_subcommand(
      app, sweep_args, "sweep",
      "map survival versus blow-up across source and damping exponents",
      true);
  CLI::App* cut = add_subcommand(
      app, cut_args, "cut-demo",
      "cut initial data around lattice centers and report the bounds", true);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return wavepatch::cmd_run(run_args.config, run_args.opt);
  if (patch->parsed())
    return wavepatch::cmd_patch_run(patch_args.config, patch_args.opt);
  if (verify->parsed())
    return wavepatch::cmd_verify(verify_args.config, verify_args.opt);
  if (sweep->parsed())
    return wavepatch::cmd_sweep(sweep_args.config, sweep_args.opt);
  if (cut->parsed())
    return wavepatch::cmd_cut_demo(cut_args.config, cut_args.opt);
  return 2;
}
