#include "fgmpc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "fgmpc/error.hpp"

namespace fgmpc {

namespace {

using Clock = std::chrono::steady_clock;

// Runs fn `repeats` times and returns the median wall time in seconds.
template <typename Fn>
double timed(int repeats, Fn&& fn) {
  std::vector<double> t(std::max(1, repeats));
  for (double& ti : t) {
    const auto start = Clock::now();
    fn();
    ti = std::chrono::duration<double>(Clock::now() - start).count();
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

SolveTimeStats stats(std::vector<double> t) {
  SolveTimeStats s;
  if (t.empty()) return s;
  std::sort(t.begin(), t.end());
  s.min = t.front();
  s.max = t.back();
  s.median = t[t.size() / 2];
  double sum = 0.0;
  for (double x : t) sum += x;
  s.mean = sum / static_cast<double>(t.size());
  return s;
}

void check_scenario(const Scenario& sc) {
  const Controller& c = sc.controller;
  if (sc.steps < 1) throw Error(ErrorCode::kInvalidArgument, "simulation: step budget must be >= 1");
  if (sc.x0.size() != sc.plant.nx()) throw Error(ErrorCode::kDimensionMismatch, "simulation: x0 dimension");
  if (sc.r.size() != sc.em.nv()) throw Error(ErrorCode::kDimensionMismatch, "simulation: r dimension");
  const bool needs_qp = c.kind != ControllerKind::kCg;
  const bool needs_gov = c.kind != ControllerKind::kMpc;
  if ((needs_qp && !c.qp) || (needs_gov && !c.governor) ||
      (c.kind == ControllerKind::kCg && c.K.rows() != sc.plant.nu())) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("simulation: incomplete controller data for ") + to_string(c.kind));
  }
}

}  // namespace

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kMpc: return "mpc";
    case ControllerKind::kMpcFg: return "mpc+fg";
    case ControllerKind::kCg: return "cg";
  }
  return "?";
}

std::optional<ControllerKind> parse_controller_kind(const std::string& name) {
  if (name == "mpc") return ControllerKind::kMpc;
  if (name == "mpc+fg" || name == "fg") return ControllerKind::kMpcFg;
  if (name == "cg" || name == "lqr+cg") return ControllerKind::kCg;
  return std::nullopt;
}

TrajectoryLog run_closed_loop(const Scenario& sc) {
  check_scenario(sc);
  const Controller& c = sc.controller;
  TrajectoryLog log;
  Eigen::VectorXd x = sc.x0;
  GovernorState gov_state;
  std::vector<int> mpc_warm;

  for (int k = 0; k < sc.steps; ++k) {
    try {
      Eigen::VectorXd v = sc.r;
      double t_fg = 0.0;
      if (c.governor) {
        const GovernorState before = gov_state;
        t_fg = timed(sc.timing_repeats, [&] {
          gov_state = before;
          v = governor_step(*c.governor, x, sc.r, &gov_state);
        });
      }

      Eigen::VectorXd u;
      double t_mpc = 0.0;
      if (c.kind == ControllerKind::kCg) {
        t_mpc = timed(sc.timing_repeats, [&] {
          u = -c.K * x + sc.em.input(v) + c.K * sc.em.state(v);
        });
      } else {
        FeedbackResult fb;
        t_mpc = timed(sc.timing_repeats, [&] { fb = mpc_feedback(*c.qp, x, v, mpc_warm); });
        mpc_warm = fb.active_set;
        u = fb.u;
      }

      const StepResult st = step(sc.plant, x, u);
      log.x.push_back(x);
      log.u.push_back(u);
      log.y.push_back(st.y);
      log.z.push_back(st.z);
      log.v.push_back(v);
      log.V.push_back((v - sc.r).squaredNorm());
      log.t_fg.push_back(t_fg);
      log.t_mpc.push_back(t_mpc);
      log.feasible.push_back(true);
      log.satisfied.push_back(sc.Y.contains_point(st.y, 1e-8));
      x = st.x_next;
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(k) + ": " + e.what());
    }
  }
  log.x_final = x;
  return log;
}

Metrics metrics(const TrajectoryLog& log, const Eigen::VectorXd& r_star, const HPolyhedron& Y) {
  Metrics m;
  const int n = log.size();
  m.steps = n;
  if (n == 0) return m;

  const Eigen::VectorXd delta = r_star - log.z[0];
  const double dd = delta.squaredNorm();
  if (dd == 0.0) {
    m.rise_step = 0;
  } else {
    for (int k = 0; k < n; ++k) {
      if ((log.z[k] - log.z[0]).dot(delta) / dd >= 0.9) {
        m.rise_step = k;
        break;
      }
    }
  }

  int settle = n;
  while (settle > 0 && log.v[settle - 1] == r_star) --settle;
  m.v_convergence_step = settle < n ? settle : -1;

  for (int k = 0; k < n; ++k) m.max_residual = std::max(m.max_residual, Y.max_violation(log.y[k]));

  std::vector<double> total(n);
  for (int k = 0; k < n; ++k) total[k] = log.t_fg[k] + log.t_mpc[k];
  m.fg = stats(log.t_fg);
  m.mpc = stats(log.t_mpc);
  m.total = stats(total);

  for (int k = 0; k + 1 < n; ++k) {
    if (log.V[k + 1] > log.V[k] + 1e-9) m.lyapunov_monotone = false;
  }
  return m;
}

std::vector<AuditVerdict> audit_invariants(const TrajectoryLog& log, const HPolyhedron* admissible,
                                           const HPolyhedron& Y, const Eigen::VectorXd& r_star,
                                           const Eigen::VectorXd& x_star, double tol) {
  const int n = log.size();
  auto first = [n](auto&& bad) {
    for (int k = 0; k < n; ++k)
      if (bad(k)) return k;
    return -1;
  };
  std::vector<AuditVerdict> out;
  auto add = [&out](const char* name, int failure) { out.push_back({name, failure < 0, failure}); };

  add("governed_set", first([&](int k) {
        if (!admissible) return !log.feasible[k];
        Eigen::VectorXd theta(log.x[k].size() + log.v[k].size());
        theta << log.x[k], log.v[k];
        return !admissible->contains_point(theta, 1e-8);
      }));
  add("constraints", first([&](int k) { return !Y.contains_point(log.y[k], 1e-8); }));
  add("lyapunov", first([&](int k) { return k + 1 < n && log.V[k + 1] > log.V[k] + 1e-9; }));

  int last_off = -1;
  for (int k = n - 1; k >= 0; --k) {
    if (log.v[k] != r_star) {
      last_off = k;
      break;
    }
  }
  add("reference_converged", last_off == n - 1 ? last_off : -1);

  const bool close = log.x_final.size() == x_star.size() && (log.x_final - x_star).norm() <= tol;
  add("state_converged", close ? -1 : n);
  return out;
}

bool all_pass(const std::vector<AuditVerdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const AuditVerdict& v) { return v.pass; });
}

std::vector<int> slice_entry_steps(const TrajectoryLog& log, const HPolyhedron& set,
                                   const std::vector<Eigen::VectorXd>& vs) {
  std::vector<int> out;
  for (const Eigen::VectorXd& v : vs) {
    int entry = -1;
    for (int k = 0; k < log.size() && entry < 0; ++k) {
      Eigen::VectorXd theta(log.x[k].size() + v.size());
      theta << log.x[k], v;
      if (set.contains_point(theta, 1e-9)) entry = k;
    }
    out.push_back(entry);
  }
  return out;
}

std::string format_trajectory_csv(const TrajectoryLog& log) {
  std::ostringstream out;
  auto header = [&](const char* name, const std::vector<Eigen::VectorXd>& col) {
    const int w = col.empty() ? 0 : static_cast<int>(col[0].size());
    for (int i = 0; i < w; ++i) out << ',' << name << i;
  };
  out << 'k';
  header("x", log.x);
  header("u", log.u);
  header("y", log.y);
  header("z", log.z);
  header("v", log.v);
  out << ",V,t_fg_us,t_mpc_us\n";
  char buf[32];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << ',' << buf;
  };
  for (int k = 0; k < log.size(); ++k) {
    out << k;
    for (const auto* col : {&log.x, &log.u, &log.y, &log.z, &log.v})
      for (Eigen::Index i = 0; i < (*col)[k].size(); ++i) num((*col)[k][i]);
    num(log.V[k]);
    num(log.t_fg[k] * 1e6);
    num(log.t_mpc[k] * 1e6);
    out << '\n';
  }
  return out.str();
}

std::string format_metrics(const Metrics& m) {
  std::ostringstream out;
  out.precision(10);
  out << "steps=" << m.steps << '\n'
      << "rise_step=" << m.rise_step << '\n'
      << "v_convergence_step=" << m.v_convergence_step << '\n'
      << "max_residual=" << m.max_residual << '\n'
      << "lyapunov_monotone=" << (m.lyapunov_monotone ? "true" : "false") << '\n';
  auto times = [&](const char* name, const SolveTimeStats& s) {
    out << name << "_min_us=" << s.min * 1e6 << '\n'
        << name << "_mean_us=" << s.mean * 1e6 << '\n'
        << name << "_median_us=" << s.median * 1e6 << '\n'
        << name << "_max_us=" << s.max * 1e6 << '\n';
  };
  times("t_fg", m.fg);
  times("t_mpc", m.mpc);
  times("t_total", m.total);
  return out.str();
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int default_thread_count() {
  if (const char* env = std::getenv("FGMPC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace fgmpc
