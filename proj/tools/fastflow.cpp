// fastflow: counterflow pedestrian simulations from the command line.
//
//   fastflow run CONFIG [--seed N] [--out DIR] [--snapshot-every K]
//   fastflow fd CONFIG --densities LIST [--seeds K] [--out DIR] [--jobs J]
//   fastflow sweep CONFIG --param kf|n_max --values LIST --densities LIST [--seeds K] [--out DIR] [--jobs J]
//   fastflow render CONFIG [--rounds R] [--seed N]

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace fastflow::cli;

  CLI::App app{"Floor-field pedestrian simulator with comoving counterflow potentials"};
  app.require_subcommand(1);

  RunOptions run_opt;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "run one simulation and write metrics.csv");
  run_cmd->add_option("config", run_opt.config, "scenario config file")->required();
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "override the config seed");
  run_cmd->add_option("--out", run_opt.out, "output directory")->capture_default_str();
  run_cmd->add_option("--snapshot-every", run_opt.snapshot_every, "write frames/NNNNNN.txt every K rounds (0: off)")
      ->check(CLI::NonNegativeNumber);

  FdOptions fd_opt;
  int fd_jobs = 0;
  auto* fd_cmd = app.add_subcommand("fd", "fundamental diagram over densities and seeds");
  fd_cmd->add_option("config", fd_opt.config, "scenario config file")->required();
  fd_cmd->add_option("--densities", fd_opt.densities, "'0.1,0.2' or '0.05..0.6 step 0.05'")->required();
  fd_cmd->add_option("--seeds", fd_opt.seeds, "replicates per density")->capture_default_str();
  fd_cmd->add_option("--out", fd_opt.out, "output directory")->capture_default_str();
  auto* fd_jobs_opt = fd_cmd->add_option("--jobs", fd_jobs, "worker threads (default: FASTFLOW_JOBS or 1)");

  SweepOptions sw_opt;
  int sw_jobs = 0;
  auto* sw_cmd = app.add_subcommand("sweep", "one fundamental diagram per parameter value");
  sw_cmd->add_option("config", sw_opt.fd.config, "scenario config file")->required();
  sw_cmd->add_option("--param", sw_opt.param, "kf or n_max")->required();
  sw_cmd->add_option("--values", sw_opt.values, "parameter values, list or range")->required();
  sw_cmd->add_option("--densities", sw_opt.fd.densities, "'0.1,0.2' or '0.05..0.6 step 0.05'")->required();
  sw_cmd->add_option("--seeds", sw_opt.fd.seeds, "replicates per density")->capture_default_str();
  sw_cmd->add_option("--out", sw_opt.fd.out, "output directory")->capture_default_str();
  auto* sw_jobs_opt = sw_cmd->add_option("--jobs", sw_jobs, "worker threads (default: FASTFLOW_JOBS or 1)");

  RenderOptions render_opt;
  std::uint64_t render_seed = 0;
  auto* render_cmd = app.add_subcommand("render", "print the text frame after R rounds");
  render_cmd->add_option("config", render_opt.config, "scenario config file")->required();
  render_cmd->add_option("--rounds", render_opt.rounds, "rounds to simulate first")->capture_default_str();
  auto* render_seed_opt = render_cmd->add_option("--seed", render_seed, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  if (*run_cmd) {
    if (*run_seed_opt) run_opt.seed = run_seed;
    return run(run_opt, std::cout, std::cerr);
  }
  if (*fd_cmd) {
    if (*fd_jobs_opt) fd_opt.jobs = fd_jobs;
    return fd(fd_opt, std::cout, std::cerr);
  }
  if (*sw_cmd) {
    if (*sw_jobs_opt) sw_opt.fd.jobs = sw_jobs;
    return sweep(sw_opt, std::cout, std::cerr);
  }
  if (*render_cmd) {
    if (*render_seed_opt) render_opt.seed = render_seed;
    return render_frame(render_opt, std::cout, std::cerr);
  }
  return kConfigError;
}
