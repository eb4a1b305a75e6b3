#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "fgmpc/config.hpp"
#include "fgmpc/governor.hpp"
#include "fgmpc/mpc.hpp"
#include "fgmpc/sim.hpp"

namespace fgmpc {

enum ExitCode : int {
  kExitOk = 0,
  kExitAuditFailed = 1,
  kExitError = 2,
  kExitUsage = 3,
};

struct CommandOptions {
  // Output directory; created if missing. Empty writes no files.
  std::string out_dir;
  std::optional<double> tol;
  std::optional<int> cap;
  bool quiet = false;
};

/// Plant-level objects shared by every controller of a config.
struct Model {
  LtiPlant plant;
  EquilibriumMap em;
  HPolyhedron reference_set;
  PolytopeOptions polytope;
};

Model build_model(const ScenarioConfig& cfg);

/// A controller with its offline sets.
struct BuiltController {
  ControllerSpec spec;
  int horizon = 0;
  OcpDesign design;
  Controller controller;
  // Set whose membership the governed loop keeps invariant: the governor's
  // joint set, or null for plain MPC.
  std::shared_ptr<const HPolyhedron> admissible;
};

/// `nstar_cap` bounds the horizon search when spec.horizon < 0.
BuiltController build_controller(const ScenarioConfig& cfg, const Model& model, const ControllerSpec& spec,
                                 int nstar_cap);

/// Executes `verb` (sets, simulate, compare, nstar) and returns the exit code.
/// Summaries go to `out` unless quiet; error messages go to `err`.
int run_command(const std::string& verb, const ScenarioConfig& cfg, const CommandOptions& opts,
                std::ostream& out, std::ostream& err);

}  // namespace fgmpc
