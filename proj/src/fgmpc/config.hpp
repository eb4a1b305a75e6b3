#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "fgmpc/polytope.hpp"
#include "fgmpc/sim.hpp"

namespace fgmpc {

struct ControllerSpec {
  ControllerKind kind = ControllerKind::kMpcFg;
  // -1: use the smallest feasible horizon for (x0, r), found by n_star.
  int horizon = 10;
  std::string label;
};

/// A scenario file after validation. Dimensions are mutually consistent.
struct ScenarioConfig {
  std::string name;
  Eigen::MatrixXd A, B, C, D, E, F;
  double sample_time = 0.0;
  HPolyhedron Y;
  double epsilon = 0.01;
  double terminal_epsilon = 0.01;
  Eigen::MatrixXd Q, R;
  int horizon = 10;
  std::vector<ControllerSpec> controllers;
  Eigen::VectorXd x0, r;
  int steps = 400;
  int nstar_cap = 500;
  double tol = 1e-3;
  std::size_t row_cap = 100000;
  std::vector<Eigen::VectorXd> slices;
  int timing_repeats = 1;
};

/// Parses JSON scenario text. Relative file references resolve against
/// `base_dir`. Failures are kConfig errors of the form
/// "config line <n>: <field>: <problem>".
ScenarioConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);

}  // namespace fgmpc
