#include "fgmpc/app.hpp"

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "fgmpc/error.hpp"
#include "fgmpc/io.hpp"

namespace fgmpc {

namespace {

std::vector<std::string> theta_names(int nx, int nv) {
  std::vector<std::string> names;
  for (int i = 0; i < nx; ++i) names.push_back("x" + std::to_string(i));
  for (int i = 0; i < nv; ++i) names.push_back("v" + std::to_string(i));
  return names;
}

std::string path_in(const CommandOptions& opts, const std::string& file) {
  return (std::filesystem::path(opts.out_dir) / file).string();
}

void prepare_out_dir(const CommandOptions& opts) {
  if (opts.out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + opts.out_dir);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// Boundary samples of a bounded 1-D or 2-D set: interval endpoints, or the
// polygon vertices plus `per_edge` - 1 evenly spaced points on each edge.
std::vector<Eigen::VectorXd> boundary_points(const HPolyhedron& P, int per_edge) {
  std::vector<Eigen::VectorXd> out;
  if (is_empty(P)) return out;
  if (P.dim() == 1) {
    const auto box = bounding_box(P);
    if (box) out = {box->first, box->second};
    return out;
  }
  const std::vector<Eigen::Vector2d> verts = polygon_vertices(P);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Eigen::Vector2d& a = verts[i];
    const Eigen::Vector2d& b = verts[(i + 1) % verts.size()];
    for (int s = 0; s < per_edge; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / per_edge));
  }
  return out;
}

std::string boundary_csv(const HPolyhedron& P) {
  std::ostringstream out;
  out << "c0,c1\n";
  for (const Eigen::VectorXd& p : boundary_points(P, 8)) out << fmt(p[0]) << ',' << fmt(p[1]) << '\n';
  return out.str();
}

struct RunOutcome {
  std::string label;
  ControllerKind kind = ControllerKind::kMpc;
  int horizon = 0;
  bool ok = false;
  std::string error;
  TrajectoryLog log;
  Metrics metrics;
  std::vector<AuditVerdict> audits;
  std::vector<int> slice_entries;
};

RunOutcome run_one(const ScenarioConfig& cfg, const Model& model, const ControllerSpec& spec, double tol,
                   int nstar_cap) {
  RunOutcome res;
  res.label = spec.label;
  res.kind = spec.kind;
  try {
    const BuiltController bc = build_controller(cfg, model, spec, nstar_cap);
    res.horizon = bc.horizon;
    const Scenario sc{model.plant, model.em,    cfg.Y,     bc.controller,
                      cfg.x0,      cfg.r,       cfg.steps, cfg.timing_repeats};
    res.log = run_closed_loop(sc);
    const Eigen::VectorXd r_star =
        spec.kind == ControllerKind::kMpc ? cfg.r : project_reference(model.reference_set, cfg.r);
    res.metrics = metrics(res.log, r_star, cfg.Y);
    res.audits = audit_invariants(res.log, bc.admissible.get(), cfg.Y, r_star, model.em.state(r_star), tol);
    if (bc.admissible && !cfg.slices.empty()) res.slice_entries = slice_entry_steps(res.log, *bc.admissible, cfg.slices);
    res.ok = true;
  } catch (const Error& e) {
    res.error = e.what();
  }
  return res;
}

std::string metrics_text(const RunOutcome& r, double ts) {
  std::ostringstream out;
  out << "controller=" << to_string(r.kind) << '\n' << "label=" << r.label << '\n';
  if (r.kind != ControllerKind::kCg) out << "horizon=" << r.horizon << '\n';
  out << format_metrics(r.metrics);
  if (ts > 0 && r.metrics.rise_step >= 0) out << "rise_time_s=" << fmt(r.metrics.rise_step * ts) << '\n';
  for (const AuditVerdict& a : r.audits) {
    out << "audit." << a.name << '=' << (a.pass ? "pass" : "fail@" + std::to_string(a.first_failure)) << '\n';
  }
  for (std::size_t i = 0; i < r.slice_entries.size(); ++i) {
    out << "slice_entry." << i << '=' << r.slice_entries[i] << '\n';
  }
  return out.str();
}

int cmd_sets(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const Model model = build_model(cfg);
  const int nx = model.plant.nx(), nv = model.em.nv();
  const OcpDesign design = make_design(model.plant, model.em, cfg.Y, cfg.Q, cfg.R, cfg.horizon,
                                       cfg.terminal_epsilon, {500, model.polytope});
  const HPolyhedron gamma = feasible_set(condense(model.plant, model.em, design), model.polytope);
  const GovernorProblem gp(gamma, model.reference_set, nx, model.polytope);
  const HPolyhedron region = roa(gp, model.polytope);

  const std::vector<std::string> theta = theta_names(nx, nv);
  std::vector<std::string> xs(theta.begin(), theta.begin() + nx), vs(theta.begin() + nx, theta.end());
  struct Named {
    const char* name;
    const HPolyhedron* set;
    const std::vector<std::string>* cols;
  };
  const Named sets[] = {{"T", &design.terminal.set, &theta},
                        {"GammaN", &gamma, &theta},
                        {"Lambda", &gp.joint(), &theta},
                        {"Reps", &model.reference_set, &vs},
                        {"RoaFG", &region, &xs}};

  if (!opts.out_dir.empty()) {
    for (const Named& s : sets) {
      write_hrep(path_in(opts, std::string(s.name) + ".hrep"), *s.set, *s.cols);
      if (s.set->dim() == 2 && bounding_box(*s.set)) {
        write_file_atomic(path_in(opts, std::string(s.name) + "_boundary.csv"), boundary_csv(*s.set));
      }
    }
    if (nx <= 2) {
      std::vector<Eigen::VectorXd> refs = cfg.slices;
      if (refs.empty()) refs.push_back(cfg.r);
      std::ostringstream csv;
      csv << "set,slice";
      for (const std::string& v : vs) csv << ',' << v;
      for (const std::string& x : xs) csv << ',' << x;
      csv << '\n';
      std::vector<int> fixed(nv);
      std::iota(fixed.begin(), fixed.end(), nx);
      for (std::size_t i = 0; i < refs.size(); ++i) {
        for (const Named& s : {sets[0], sets[1]}) {
          const HPolyhedron at_v = slice(*s.set, fixed, refs[i]);
          if (!bounding_box(at_v)) continue;
          for (const Eigen::VectorXd& p : boundary_points(at_v, 16)) {
            csv << s.name << ',' << i;
            for (int j = 0; j < nv; ++j) csv << ',' << fmt(refs[i][j]);
            for (int j = 0; j < nx; ++j) csv << ',' << fmt(p[j]);
            csv << '\n';
          }
        }
      }
      write_file_atomic(path_in(opts, "slices.csv"), csv.str());
    }
  }
  if (!opts.quiet) {
    out << "terminal set: " << design.terminal.set.rows() << " rows, determined at t="
        << design.terminal.determination_index << '\n';
    for (const Named& s : sets) out << s.name << ": dim " << s.set->dim() << ", " << s.set->rows() << " rows\n";
  }
  return kExitOk;
}

int cmd_simulate(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const Model model = build_model(cfg);
  const double tol = opts.tol.value_or(cfg.tol);
  const RunOutcome r = run_one(cfg, model, cfg.controllers.front(), tol, opts.cap.value_or(cfg.nstar_cap));
  if (!r.ok) {
    err << "error: " << r.error << '\n';
    return kExitError;
  }
  const std::string text = metrics_text(r, cfg.sample_time);
  if (!opts.out_dir.empty()) {
    write_file_atomic(path_in(opts, "trajectory.csv"), format_trajectory_csv(r.log));
    write_file_atomic(path_in(opts, "metrics.txt"), text);
  }
  if (!opts.quiet) out << text;
  if (!all_pass(r.audits)) {
    for (const AuditVerdict& a : r.audits) {
      if (!a.pass) err << "audit failed: " << a.name << " at step " << a.first_failure << '\n';
    }
    return kExitAuditFailed;
  }
  return kExitOk;
}

int cmd_compare(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  if (cfg.controllers.size() < 2) {
    throw Error(ErrorCode::kConfig, "compare: the config must list at least two controllers");
  }
  const Model model = build_model(cfg);
  const double tol = opts.tol.value_or(cfg.tol);
  const int cap = opts.cap.value_or(cfg.nstar_cap);
  std::vector<RunOutcome> runs(cfg.controllers.size());
  parallel_for(static_cast<int>(runs.size()), default_thread_count(),
               [&](int i) { runs[i] = run_one(cfg, model, cfg.controllers[i], tol, cap); });

  std::ostringstream table;
  table << "label,controller,horizon,status,rise_step,rise_time_s,v_convergence_step,max_residual,"
           "t_ave_us,t_max_us,audits\n";
  int code = kExitOk;
  for (const RunOutcome& r : runs) {
    table << r.label << ',' << to_string(r.kind) << ',' << r.horizon << ',';
    if (!r.ok) {
      std::string msg = r.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      table << "error: " << msg << ",,,,,,,\n";
      err << r.label << ": error: " << r.error << '\n';
      code = kExitError;
      continue;
    }
    const Metrics& m = r.metrics;
    const bool pass = all_pass(r.audits);
    if (!pass && code == kExitOk) code = kExitAuditFailed;
    table << "ok," << m.rise_step << ','
          << (cfg.sample_time > 0 && m.rise_step >= 0 ? fmt(m.rise_step * cfg.sample_time) : "") << ','
          << m.v_convergence_step << ',' << fmt(m.max_residual) << ',' << fmt(m.total.mean * 1e6) << ','
          << fmt(m.total.max * 1e6) << ',' << (pass ? "pass" : "fail") << '\n';
    if (!opts.out_dir.empty()) {
      write_file_atomic(path_in(opts, "trajectory_" + r.label + ".csv"), format_trajectory_csv(r.log));
      write_file_atomic(path_in(opts, "metrics_" + r.label + ".txt"), metrics_text(r, cfg.sample_time));
    }
  }

  if (!opts.out_dir.empty()) {
    write_file_atomic(path_in(opts, "comparison.csv"), table.str());
    // Long-format plot bundle: one line per (controller, step).
    std::ostringstream plot;
    plot << "label,k,t";
    const int nz = static_cast<int>(cfg.r.size());
    for (int j = 0; j < nz; ++j) plot << ",z" << j;
    for (int j = 0; j < nz; ++j) plot << ",v" << j;
    plot << '\n';
    for (const RunOutcome& r : runs) {
      for (int k = 0; r.ok && k < r.log.size(); ++k) {
        plot << r.label << ',' << k << ',' << fmt(k * cfg.sample_time);
        for (int j = 0; j < nz; ++j) plot << ',' << fmt(r.log.z[k][j]);
        for (int j = 0; j < nz; ++j) plot << ',' << fmt(r.log.v[k][j]);
        plot << '\n';
      }
    }
    write_file_atomic(path_in(opts, "plot_data.csv"), plot.str());
  }
  if (!opts.quiet) out << table.str();
  return code;
}

int cmd_nstar(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const Model model = build_model(cfg);
  const int cap = opts.cap.value_or(cfg.nstar_cap);
  const OcpDesign design = make_design(model.plant, model.em, cfg.Y, cfg.Q, cfg.R, std::max(cfg.horizon, 1),
                                       cfg.terminal_epsilon, {500, model.polytope});
  const NStarResult res = n_star(model.plant, design, cfg.x0, cfg.r, cap);
  std::ostringstream text;
  for (std::size_t h = 0; h < res.scan.size(); ++h) {
    text << "horizon " << h << ": " << (res.scan[h] ? "feasible" : "infeasible") << '\n';
  }
  text << "n_star=" << res.n_star << '\n';
  if (!opts.out_dir.empty()) write_file_atomic(path_in(opts, "nstar.txt"), text.str());
  if (opts.quiet) {
    out << "n_star=" << res.n_star << '\n';
  } else {
    out << text.str();
  }
  return kExitOk;
}

}  // namespace

Model build_model(const ScenarioConfig& cfg) {
  LtiPlant plant(cfg.A, cfg.B, cfg.C, cfg.D, cfg.E, cfg.F, cfg.sample_time);
  EquilibriumMap em = equilibrium_basis(plant);
  HPolyhedron reps = steady_state_ref_set(plant, em, cfg.Y, cfg.epsilon);
  PolytopeOptions popts;
  popts.row_cap = cfg.row_cap;
  return {std::move(plant), std::move(em), std::move(reps), popts};
}

BuiltController build_controller(const ScenarioConfig& cfg, const Model& model, const ControllerSpec& spec,
                                 int nstar_cap) {
  BuiltController bc;
  bc.spec = spec;
  bc.horizon = spec.horizon;
  const TerminalOptions topts{500, model.polytope};
  if (spec.kind != ControllerKind::kCg && bc.horizon < 0) {
    const OcpDesign probe =
        make_design(model.plant, model.em, cfg.Y, cfg.Q, cfg.R, 1, cfg.terminal_epsilon, topts);
    bc.horizon = std::max(1, n_star(model.plant, probe, cfg.x0, cfg.r, nstar_cap).n_star);
  }
  bc.design = make_design(model.plant, model.em, cfg.Y, cfg.Q, cfg.R, std::max(bc.horizon, 0),
                          cfg.terminal_epsilon, topts);
  bc.controller.kind = spec.kind;
  const int nx = model.plant.nx();
  switch (spec.kind) {
    case ControllerKind::kMpc:
      bc.controller.qp = std::make_shared<const CondensedQp>(condense(model.plant, model.em, bc.design));
      break;
    case ControllerKind::kMpcFg: {
      auto qp = std::make_shared<const CondensedQp>(condense(model.plant, model.em, bc.design));
      const HPolyhedron gamma = feasible_set(*qp, model.polytope);
      auto gp = std::make_shared<const GovernorProblem>(gamma, model.reference_set, nx, model.polytope);
      bc.controller.qp = qp;
      bc.controller.governor = gp;
      bc.admissible = std::shared_ptr<const HPolyhedron>(gp, &gp->joint());
      break;
    }
    case ControllerKind::kCg: {
      auto gp = std::make_shared<const GovernorProblem>(bc.design.terminal.set, model.reference_set, nx,
                                                        model.polytope);
      bc.controller.governor = gp;
      bc.controller.K = bc.design.lqr.K;
      bc.admissible = std::shared_ptr<const HPolyhedron>(gp, &gp->joint());
      bc.horizon = 0;
      break;
    }
  }
  return bc;
}

int run_command(const std::string& verb, const ScenarioConfig& cfg, const CommandOptions& opts,
                std::ostream& out, std::ostream& err) {
  try {
    prepare_out_dir(opts);
    if (verb == "sets") return cmd_sets(cfg, opts, out);
    if (verb == "simulate") return cmd_simulate(cfg, opts, out, err);
    if (verb == "compare") return cmd_compare(cfg, opts, out, err);
    if (verb == "nstar") return cmd_nstar(cfg, opts, out);
    err << "error: unknown command '" << verb << "'\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace fgmpc
