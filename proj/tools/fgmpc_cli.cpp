#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "fgmpc/fgmpc.h"

namespace {

struct Args {
  std::string config;
  std::string out;
  double tol = 0.0;
  int cap = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--tol", args.tol, "convergence tolerance for the audits")->check(CLI::PositiveNumber);
  cmd->add_option("--cap", args.cap, "largest horizon tried when searching for N*")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--quiet", args.quiet, "print only errors and final results");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feasibility-governed MPC: set construction, simulation and comparison"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fgmpc_version());
  Args args;
  const char* verbs[][2] = {
      {"sets", "build and export the terminal, feasible, governed and reference sets"},
      {"simulate", "run the first configured controller in closed loop and audit it"},
      {"compare", "run every configured controller and tabulate their metrics"},
      {"nstar", "find the smallest feasible horizon for (x0, r)"},
  };
  for (const auto& v : verbs) add_common(app.add_subcommand(v[0], v[1]), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  fgmpc_config* cfg = nullptr;
  if (fgmpc_config_load(args.config.c_str(), &cfg) != FGMPC_OK) {
    std::fprintf(stderr, "error: %s\n", fgmpc_last_error());
    return 2;
  }
  fgmpc_run_options opts;
  fgmpc_run_options_init(&opts);
  opts.out_dir = args.out.empty() ? nullptr : args.out.c_str();
  opts.tol = args.tol;
  opts.cap = args.cap;
  opts.quiet = args.quiet ? 1 : 0;

  int code = 2;
  const std::string verb = app.get_subcommands().front()->get_name();
  if (fgmpc_run_command(cfg, verb.c_str(), &opts, &code) != FGMPC_OK) {
    std::fprintf(stderr, "error: %s\n", fgmpc_last_error());
    code = 2;
  }
  fgmpc_config_destroy(cfg);
  return code;
}
