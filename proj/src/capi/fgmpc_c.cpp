#include "fgmpc/fgmpc.h"

#include <iostream>
#include <memory>
#include <new>
#include <string>

#include "fgmpc/app.hpp"
#include "fgmpc/error.hpp"
#include "fgmpc/io.hpp"

struct fgmpc_polytope {
  fgmpc::HPolyhedron set;
};

struct fgmpc_config {
  fgmpc::ScenarioConfig cfg;
};

struct fgmpc_controller {
  fgmpc::Model model;
  fgmpc::BuiltController built;
  fgmpc::GovernorState governor_state;
  std::vector<int> mpc_warm;
};

namespace {

thread_local std::string g_last_error;

fgmpc_status to_status(fgmpc::ErrorCode code) {
  using fgmpc::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return FGMPC_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return FGMPC_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kEmptySet: return FGMPC_ERR_EMPTY_SET;
    case ErrorCode::kInfeasible: return FGMPC_ERR_INFEASIBLE;
    case ErrorCode::kOutsideRoa: return FGMPC_ERR_OUTSIDE_ROA;
    case ErrorCode::kProjectionIntractable: return FGMPC_ERR_PROJECTION_INTRACTABLE;
    case ErrorCode::kNoFeasibleHorizon: return FGMPC_ERR_NO_FEASIBLE_HORIZON;
    case ErrorCode::kNotFinitelyDetermined: return FGMPC_ERR_NOT_FINITELY_DETERMINED;
    case ErrorCode::kAssumptionViolated: return FGMPC_ERR_ASSUMPTION_VIOLATED;
    case ErrorCode::kNonConvergence: return FGMPC_ERR_NON_CONVERGENCE;
    case ErrorCode::kSolverFailure: return FGMPC_ERR_SOLVER_FAILURE;
    case ErrorCode::kConfig: return FGMPC_ERR_CONFIG;
    case ErrorCode::kIo: return FGMPC_ERR_IO;
  }
  return FGMPC_ERR_INTERNAL;
}

// Runs fn, translating exceptions into a status and the thread's last error.
template <typename Fn>
fgmpc_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FGMPC_OK;
  } catch (const fgmpc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return FGMPC_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw fgmpc::Error(fgmpc::ErrorCode::kInvalidArgument, what);
}

Eigen::Map<const Eigen::VectorXd> view(const double* p, int n) { return {p, n}; }

fgmpc_polytope* wrap(fgmpc::HPolyhedron set) { return new fgmpc_polytope{std::move(set)}; }

}  // namespace

extern "C" {

const char* fgmpc_version(void) { return "0.1.0"; }

const char* fgmpc_last_error(void) { return g_last_error.c_str(); }

const char* fgmpc_status_string(fgmpc_status status) {
  switch (status) {
    case FGMPC_OK: return "ok";
    case FGMPC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FGMPC_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case FGMPC_ERR_EMPTY_SET: return "empty set";
    case FGMPC_ERR_INFEASIBLE: return "infeasible";
    case FGMPC_ERR_OUTSIDE_ROA: return "outside region of attraction";
    case FGMPC_ERR_PROJECTION_INTRACTABLE: return "projection intractable";
    case FGMPC_ERR_NO_FEASIBLE_HORIZON: return "no feasible horizon";
    case FGMPC_ERR_NOT_FINITELY_DETERMINED: return "not finitely determined";
    case FGMPC_ERR_ASSUMPTION_VIOLATED: return "assumption violated";
    case FGMPC_ERR_NON_CONVERGENCE: return "non-convergence";
    case FGMPC_ERR_SOLVER_FAILURE: return "solver failure";
    case FGMPC_ERR_CONFIG: return "configuration error";
    case FGMPC_ERR_IO: return "i/o error";
    case FGMPC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

fgmpc_status fgmpc_polytope_create(int dim, int rows, const double* A, const double* b, fgmpc_polytope** out) {
  return guarded([&] {
    require(out && dim >= 1 && rows >= 0 && (rows == 0 || (A && b)), "polytope_create: bad arguments");
    Eigen::MatrixXd M(rows, dim);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < dim; ++j) M(i, j) = A[static_cast<std::size_t>(i) * dim + j];
    *out = wrap(fgmpc::HPolyhedron(M, rows ? Eigen::VectorXd(view(b, rows)) : Eigen::VectorXd()));
  });
}

fgmpc_status fgmpc_polytope_from_box(int dim, const double* lower, const double* upper, fgmpc_polytope** out) {
  return guarded([&] {
    require(out && dim >= 1 && lower && upper, "polytope_from_box: bad arguments");
    *out = wrap(fgmpc::HPolyhedron::from_box(view(lower, dim), view(upper, dim)));
  });
}

fgmpc_status fgmpc_polytope_read_hrep(const char* path, fgmpc_polytope** out) {
  return guarded([&] {
    require(path && out, "polytope_read_hrep: null argument");
    *out = wrap(fgmpc::read_hrep(path));
  });
}

fgmpc_status fgmpc_polytope_write_hrep(const fgmpc_polytope* p, const char* path) {
  return guarded([&] {
    require(p && path, "polytope_write_hrep: null argument");
    fgmpc::write_hrep(path, p->set);
  });
}

void fgmpc_polytope_destroy(fgmpc_polytope* p) { delete p; }

int fgmpc_polytope_dim(const fgmpc_polytope* p) { return p ? p->set.dim() : -1; }

int fgmpc_polytope_rows(const fgmpc_polytope* p) { return p ? p->set.rows() : -1; }

fgmpc_status fgmpc_polytope_get(const fgmpc_polytope* p, double* A, double* b) {
  return guarded([&] {
    require(p && A && b, "polytope_get: null argument");
    const int n = p->set.dim();
    for (int i = 0; i < p->set.rows(); ++i) {
      for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(i) * n + j] = p->set.A()(i, j);
      b[i] = p->set.b()[i];
    }
  });
}

fgmpc_status fgmpc_polytope_contains(const fgmpc_polytope* p, const double* x, double tol, int* result) {
  return guarded([&] {
    require(p && x && result && tol >= 0, "polytope_contains: bad arguments");
    *result = p->set.contains_point(view(x, p->set.dim()), tol) ? 1 : 0;
  });
}

fgmpc_status fgmpc_polytope_contains_set(const fgmpc_polytope* p, const fgmpc_polytope* q, double tol,
                                         int* result) {
  return guarded([&] {
    require(p && q && result && tol >= 0, "polytope_contains_set: bad arguments");
    *result = fgmpc::contains_set(p->set, q->set, tol) ? 1 : 0;
  });
}

fgmpc_status fgmpc_polytope_remove_redundancy(const fgmpc_polytope* p, fgmpc_polytope** out) {
  return guarded([&] {
    require(p && out, "polytope_remove_redundancy: null argument");
    *out = wrap(fgmpc::remove_redundancy(p->set));
  });
}

fgmpc_status fgmpc_polytope_project(const fgmpc_polytope* p, const int* keep, int count, fgmpc_polytope** out) {
  return guarded([&] {
    require(p && keep && out && count >= 1, "polytope_project: bad arguments");
    *out = wrap(fgmpc::project(p->set, std::span<const int>(keep, static_cast<std::size_t>(count))));
  });
}

fgmpc_status fgmpc_config_load(const char* path, fgmpc_config** out) {
  return guarded([&] {
    require(path && out, "config_load: null argument");
    *out = new fgmpc_config{fgmpc::load_config(path)};
  });
}

fgmpc_status fgmpc_config_parse(const char* json_text, const char* base_dir, fgmpc_config** out) {
  return guarded([&] {
    require(json_text && out, "config_parse: null argument");
    *out = new fgmpc_config{fgmpc::parse_config(json_text, base_dir ? base_dir : ".")};
  });
}

void fgmpc_config_destroy(fgmpc_config* cfg) { delete cfg; }

int fgmpc_config_controller_count(const fgmpc_config* cfg) {
  return cfg ? static_cast<int>(cfg->cfg.controllers.size()) : -1;
}

void fgmpc_run_options_init(fgmpc_run_options* opts) {
  if (!opts) return;
  opts->out_dir = nullptr;
  opts->tol = 0.0;
  opts->cap = -1;
  opts->quiet = 0;
}

fgmpc_status fgmpc_run_command(const fgmpc_config* cfg, const char* verb, const fgmpc_run_options* opts,
                               int* exit_code) {
  return guarded([&] {
    require(cfg && verb && exit_code, "run_command: null argument");
    fgmpc::CommandOptions o;
    if (opts) {
      if (opts->out_dir) o.out_dir = opts->out_dir;
      if (opts->tol > 0) o.tol = opts->tol;
      if (opts->cap >= 0) o.cap = opts->cap;
      o.quiet = opts->quiet != 0;
    }
    *exit_code = fgmpc::run_command(verb, cfg->cfg, o, std::cout, std::cerr);
    std::cout.flush();
  });
}

fgmpc_status fgmpc_controller_create(const fgmpc_config* cfg, int index, fgmpc_controller** out) {
  return guarded([&] {
    require(cfg && out, "controller_create: null argument");
    require(index >= 0 && index < static_cast<int>(cfg->cfg.controllers.size()),
            "controller_create: index out of range");
    fgmpc::Model model = fgmpc::build_model(cfg->cfg);
    fgmpc::BuiltController built =
        fgmpc::build_controller(cfg->cfg, model, cfg->cfg.controllers[index], cfg->cfg.nstar_cap);
    *out = new fgmpc_controller{std::move(model), std::move(built), {}, {}};
  });
}

void fgmpc_controller_destroy(fgmpc_controller* c) { delete c; }

int fgmpc_controller_nx(const fgmpc_controller* c) { return c ? c->model.plant.nx() : -1; }
int fgmpc_controller_nu(const fgmpc_controller* c) { return c ? c->model.plant.nu() : -1; }
int fgmpc_controller_nv(const fgmpc_controller* c) { return c ? c->model.em.nv() : -1; }
int fgmpc_controller_horizon(const fgmpc_controller* c) { return c ? c->built.horizon : -1; }

fgmpc_status fgmpc_controller_step(fgmpc_controller* c, const double* x, const double* r, double* u, double* v) {
  return guarded([&] {
    require(c && x && r && u && v, "controller_step: null argument");
    const fgmpc::Controller& ctl = c->built.controller;
    const fgmpc::EquilibriumMap& em = c->model.em;
    const Eigen::VectorXd xs = view(x, c->model.plant.nx());
    const Eigen::VectorXd rs = view(r, em.nv());
    Eigen::VectorXd vs = rs;
    if (ctl.governor) vs = fgmpc::governor_step(*ctl.governor, xs, rs, &c->governor_state);
    Eigen::VectorXd us;
    if (ctl.kind == fgmpc::ControllerKind::kCg) {
      us = -ctl.K * xs + em.input(vs) + ctl.K * em.state(vs);
    } else {
      const fgmpc::FeedbackResult fb = fgmpc::mpc_feedback(*ctl.qp, xs, vs, c->mpc_warm);
      c->mpc_warm = fb.active_set;
      us = fb.u;
    }
    Eigen::Map<Eigen::VectorXd>(u, us.size()) = us;
    Eigen::Map<Eigen::VectorXd>(v, vs.size()) = vs;
  });
}

void fgmpc_controller_reset(fgmpc_controller* c) {
  if (!c) return;
  c->governor_state = {};
  c->mpc_warm.clear();
}

fgmpc_status fgmpc_controller_admissible_set(const fgmpc_controller* c, fgmpc_polytope** out) {
  return guarded([&] {
    require(c && out, "controller_admissible_set: null argument");
    *out = c->built.admissible ? wrap(*c->built.admissible) : nullptr;
  });
}

}  // extern "C"
