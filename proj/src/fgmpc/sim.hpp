#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fgmpc/governor.hpp"
#include "fgmpc/mpc.hpp"
#include "fgmpc/plant.hpp"

namespace fgmpc {

enum class ControllerKind {
  kMpc,    // MPC tracking r directly
  kMpcFg,  // MPC with the feasibility governor in front
  kCg,     // LQR with the command governor in front
};

const char* to_string(ControllerKind kind);
std::optional<ControllerKind> parse_controller_kind(const std::string& name);

/// Offline data for one control law. Unused members stay empty.
struct Controller {
  ControllerKind kind = ControllerKind::kMpc;
  std::shared_ptr<const CondensedQp> qp;
  std::shared_ptr<const GovernorProblem> governor;
  Eigen::MatrixXd K;
};

struct Scenario {
  LtiPlant plant;
  EquilibriumMap em;
  HPolyhedron Y;
  Controller controller;
  Eigen::VectorXd x0;
  Eigen::VectorXd r;
  int steps = 1;
  // Each solve is repeated this many times and the median time is logged.
  int timing_repeats = 1;
};

/// Entry k describes the step taken from x[k]. Times are seconds.
struct TrajectoryLog {
  std::vector<Eigen::VectorXd> x, u, y, z, v;
  Eigen::VectorXd x_final;
  std::vector<double> V;
  std::vector<double> t_fg;
  std::vector<double> t_mpc;
  std::vector<bool> feasible;
  std::vector<bool> satisfied;

  int size() const { return static_cast<int>(x.size()); }
};

/// Simulates the closed loop for sc.steps steps. Any failed solve aborts with
/// an Error whose message starts with "step <k>: " and keeps the cause's code.
TrajectoryLog run_closed_loop(const Scenario& sc);

struct SolveTimeStats {
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct Metrics {
  int steps = 0;
  // First k with the tracked output 90% of the way from z_0 to r_star; -1 if
  // never. 0 when there is nothing to travel.
  int rise_step = -1;
  // First k after which v stays exactly r_star; -1 if it never settles.
  int v_convergence_step = -1;
  // max_k max(0, max row violation of y_k in Y).
  double max_residual = 0.0;
  SolveTimeStats fg;
  SolveTimeStats mpc;
  SolveTimeStats total;
  // V(v_{k+1}) <= V(v_k) + 1e-9 for every k.
  bool lyapunov_monotone = true;
};

Metrics metrics(const TrajectoryLog& log, const Eigen::VectorXd& r_star, const HPolyhedron& Y);

struct AuditVerdict {
  std::string name;
  bool pass = true;
  int first_failure = -1;
};

/// Checks, in order: (x_k, v_k) in `admissible` (per-step feasible flags when
/// null); y_k in Y; V non-increasing; v settles exactly at r_star; the final
/// state within `tol` of x_star.
std::vector<AuditVerdict> audit_invariants(const TrajectoryLog& log, const HPolyhedron* admissible,
                                           const HPolyhedron& Y, const Eigen::VectorXd& r_star,
                                           const Eigen::VectorXd& x_star, double tol);

bool all_pass(const std::vector<AuditVerdict>& verdicts);

/// For each v, the first k with (x_k, v) in `set`, or -1.
std::vector<int> slice_entry_steps(const TrajectoryLog& log, const HPolyhedron& set,
                                   const std::vector<Eigen::VectorXd>& vs);

/// Columns k, x*, u*, y*, z*, v*, V, t_fg_us, t_mpc_us.
std::string format_trajectory_csv(const TrajectoryLog& log);
/// key=value lines.
std::string format_metrics(const Metrics& m);

/// Runs fn(0..count-1) on at most `threads` workers. The first exception is
/// rethrown after all workers finish.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// FGMPC_THREADS if set and positive, else the hardware concurrency.
int default_thread_count();

}  // namespace fgmpc
