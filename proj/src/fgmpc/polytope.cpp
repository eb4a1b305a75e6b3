#include "fgmpc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "fgmpc/error.hpp"
#include "fgmpc/solver.hpp"

namespace fgmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(const HPolyhedron& P, const HPolyhedron& Q, const char* op) {
  if (P.dim() != Q.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": dimensions " + std::to_string(P.dim()) + " and " +
                    std::to_string(Q.dim()) + " differ");
  }
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& A, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = A.row(rows[i]);
  return out;
}

Eigen::VectorXd select_entries(const Eigen::VectorXd& b, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = b[rows[i]];
  return out;
}

// Collapses rows with (numerically) identical normals, keeping the tightest.
std::vector<int> dedupe(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  std::map<std::vector<long long>, int> best;
  for (int i = 0; i < A.rows(); ++i) {
    std::vector<long long> key(A.cols());
    for (int j = 0; j < A.cols(); ++j) key[j] = std::llround(A(i, j) * 1e9);
    auto [it, inserted] = best.emplace(std::move(key), i);
    if (!inserted && b[i] < b[it->second]) it->second = i;
  }
  std::vector<int> rows;
  rows.reserve(best.size());
  for (const auto& kv : best) rows.push_back(kv.second);
  std::sort(rows.begin(), rows.end());
  return rows;
}

// Rows that survive LP redundancy removal. Rows strictly slack over the
// bounding box are dropped without an LP.
std::vector<int> irredundant(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const PolytopeOptions& opt) {
  std::vector<int> candidates = dedupe(A, b);
  const int d = static_cast<int>(A.cols());

  const HPolyhedron current(select_rows(A, candidates), select_entries(b, candidates));
  if (auto box = bounding_box(current)) {
    const auto& [lo, hi] = *box;
    std::vector<int> kept;
    for (int i : candidates) {
      double support = 0.0;
      for (int j = 0; j < d; ++j) support += std::max(A(i, j) * lo[j], A(i, j) * hi[j]);
      if (support >= b[i] - opt.tol) kept.push_back(i);
    }
    candidates.swap(kept);
  }

  std::vector<char> alive(candidates.size(), 1);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const int i = candidates[k];
    std::vector<int> others;
    for (std::size_t q = 0; q < candidates.size(); ++q) {
      if (q != k && alive[q]) others.push_back(candidates[q]);
    }
    LpProblem lp;
    lp.c = A.row(i).transpose();
    lp.A.resize(static_cast<Eigen::Index>(others.size()) + 1, d);
    lp.b.resize(lp.A.rows());
    for (std::size_t q = 0; q < others.size(); ++q) {
      lp.A.row(q) = A.row(others[q]);
      lp.b[q] = b[others[q]];
    }
    // Relaxed copy of the tested row keeps the LP bounded.
    lp.A.row(lp.A.rows() - 1) = A.row(i);
    lp.b[lp.b.size() - 1] = b[i] + 1.0;
    const SolveStatus st = solve_lp(lp);
    if (st.code == SolveCode::kOptimal && st.value <= b[i] + opt.tol) alive[k] = 0;
  }
  std::vector<int> out;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (alive[k]) out.push_back(candidates[k]);
  }
  return out;
}

}  // namespace

HPolyhedron::HPolyhedron(int dim) : A_(0, dim), b_(0) {}

HPolyhedron::HPolyhedron(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         double zero_row_tol) {
  if (A.rows() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "polyhedron: A has " + std::to_string(A.rows()) + " rows but b has " +
                    std::to_string(b.size()) + " entries");
  }
  if (!A.allFinite() || !b.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "polyhedron: non-finite entries");
  }
  std::vector<int> keep;
  bool contradiction = false;
  Eigen::VectorXd norms(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    norms[i] = A.cols() > 0 ? A.row(i).lpNorm<Eigen::Infinity>() : 0.0;
    if (norms[i] < zero_row_tol) {
      if (b[i] < -zero_row_tol) contradiction = true;
      continue;
    }
    keep.push_back(i);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size()) + (contradiction ? 1 : 0);
  A_.setZero(m, A.cols());
  b_.setZero(m);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    A_.row(k) = A.row(keep[k]) / norms[keep[k]];
    b_[k] = b[keep[k]] / norms[keep[k]];
  }
  if (contradiction) b_[m - 1] = -1.0;
}

HPolyhedron HPolyhedron::from_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != upper.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "box: bound vectors differ in length");
  }
  const int n = static_cast<int>(lower.size());
  for (int i = 0; i < n; ++i) {
    if (!(lower[i] < upper[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "box: inverted bounds in coordinate " + std::to_string(i));
    }
  }
  Eigen::MatrixXd A(2 * n, n);
  A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(2 * n);
  b << upper, -lower;
  return HPolyhedron(A, b);
}

bool HPolyhedron::contains_point(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "contains_point: point dimension mismatch");
  }
  return rows() == 0 || max_violation(x) <= tol;
}

double HPolyhedron::max_violation(const Eigen::VectorXd& x) const {
  if (rows() == 0) return -kInf;
  return (A_ * x - b_).maxCoeff();
}

bool HPolyhedron::has_contradiction() const {
  for (int i = 0; i < rows(); ++i) {
    if (A_.row(i).isZero(0.0) && b_[i] < 0.0) return true;
  }
  return false;
}

HPolyhedron scale(const HPolyhedron& P, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scale: factor must be positive");
  return HPolyhedron(P.A(), s * P.b());
}

HPolyhedron intersect(const HPolyhedron& P, const HPolyhedron& Q) {
  require_same_dim(P, Q, "intersect");
  Eigen::MatrixXd A(P.rows() + Q.rows(), P.dim());
  A << P.A(), Q.A();
  Eigen::VectorXd b(P.rows() + Q.rows());
  b << P.b(), Q.b();
  return HPolyhedron(A, b);
}

HPolyhedron slice(const HPolyhedron& P, std::span<const int> fixed_indices,
                  const Eigen::VectorXd& fixed_values) {
  if (static_cast<Eigen::Index>(fixed_indices.size()) != fixed_values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "slice: index and value counts differ");
  }
  std::vector<char> fixed(P.dim(), 0);
  for (int idx : fixed_indices) {
    if (idx < 0 || idx >= P.dim()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "slice: index " + std::to_string(idx) + " out of range");
    }
    if (fixed[idx]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "slice: index " + std::to_string(idx) + " repeated");
    }
    fixed[idx] = 1;
  }
  Eigen::VectorXd b = P.b();
  for (std::size_t k = 0; k < fixed_indices.size(); ++k) {
    b -= P.A().col(fixed_indices[k]) * fixed_values[k];
  }
  std::vector<int> free_cols;
  for (int j = 0; j < P.dim(); ++j) {
    if (!fixed[j]) free_cols.push_back(j);
  }
  Eigen::MatrixXd A(P.rows(), static_cast<Eigen::Index>(free_cols.size()));
  for (std::size_t k = 0; k < free_cols.size(); ++k) A.col(k) = P.A().col(free_cols[k]);
  return HPolyhedron(A, b);
}

HPolyhedron permute(const HPolyhedron& P, std::span<const int> order) {
  Eigen::MatrixXd A(P.rows(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] < 0 || order[k] >= P.dim()) {
      throw Error(ErrorCode::kInvalidArgument, "permute: index out of range");
    }
    A.col(k) = P.A().col(order[k]);
  }
  return HPolyhedron(A, P.b());
}

HPolyhedron remove_redundancy(const HPolyhedron& P, const PolytopeOptions& options) {
  if (is_empty(P)) throw Error(ErrorCode::kEmptySet, "remove_redundancy: empty polyhedron");
  const std::vector<int> rows = irredundant(P.A(), P.b(), options);
  return HPolyhedron(select_rows(P.A(), rows), select_entries(P.b(), rows));
}

HPolyhedron project(const HPolyhedron& P, std::span<const int> keep_indices,
                    const PolytopeOptions& options) {
  const int n = P.dim();
  std::vector<char> kept(n, 0);
  for (int idx : keep_indices) {
    if (idx < 0 || idx >= n || kept[idx]) {
      throw Error(ErrorCode::kInvalidArgument, "project: invalid keep index " + std::to_string(idx));
    }
    kept[idx] = 1;
  }
  if (is_empty(P)) throw Error(ErrorCode::kEmptySet, "project: empty polyhedron");

  // Kept coordinates first, eliminated ones after.
  std::vector<int> order(keep_indices.begin(), keep_indices.end());
  for (int j = 0; j < n; ++j) {
    if (!kept[j]) order.push_back(j);
  }
  const int k = static_cast<int>(keep_indices.size());
  HPolyhedron work = permute(P, order);
  Eigen::MatrixXd A = work.A();
  Eigen::VectorXd b = work.b();
  if (A.cols() == k) return remove_redundancy(work, options);

  while (A.cols() > k) {
    // Greedy min-fill: the variable with the fewest generated rows.
    int var = -1;
    long long best_cost = std::numeric_limits<long long>::max();
    for (int j = k; j < A.cols(); ++j) {
      long long pos = 0, neg = 0;
      for (int i = 0; i < A.rows(); ++i) {
        if (A(i, j) > options.zero_row_tol) ++pos;
        else if (A(i, j) < -options.zero_row_tol) ++neg;
      }
      if (pos * neg < best_cost) {
        best_cost = pos * neg;
        var = j;
      }
    }
    std::vector<int> pos, neg, zero;
    for (int i = 0; i < A.rows(); ++i) {
      const double a = A(i, var);
      if (a > options.zero_row_tol) pos.push_back(i);
      else if (a < -options.zero_row_tol) neg.push_back(i);
      else zero.push_back(i);
    }
    const std::size_t produced = pos.size() * neg.size() + zero.size();
    if (produced > options.row_cap) {
      throw Error(ErrorCode::kProjectionIntractable,
                  "projection intractable: eliminating a variable would produce " +
                      std::to_string(produced) + " rows (cap " +
                      std::to_string(options.row_cap) + ")");
    }
    const Eigen::Index cols = A.cols() - 1;
    auto drop_col = [&](int i) {
      Eigen::RowVectorXd r(cols);
      r << A.row(i).head(var), A.row(i).tail(A.cols() - var - 1);
      return r;
    };
    Eigen::MatrixXd nA(static_cast<Eigen::Index>(produced), cols);
    Eigen::VectorXd nb(static_cast<Eigen::Index>(produced));
    Eigen::Index row = 0;
    for (int i : zero) {
      nA.row(row) = drop_col(i);
      nb[row++] = b[i];
    }
    for (int p : pos) {
      for (int q : neg) {
        const double wp = -A(q, var);
        const double wq = A(p, var);
        const Eigen::RowVectorXd combo = wp * A.row(p) + wq * A.row(q);
        Eigen::RowVectorXd r(cols);
        r << combo.head(var), combo.tail(A.cols() - var - 1);
        nA.row(row) = r;
        nb[row++] = wp * b[p] + wq * b[q];
      }
    }
    const HPolyhedron next(nA, nb, options.zero_row_tol);
    if (next.has_contradiction()) {
      throw Error(ErrorCode::kEmptySet, "project: elimination produced an empty set");
    }
    if (next.rows() == 0) {
      A = next.A();
      b = next.b();
      continue;
    }
    const std::vector<int> rows = irredundant(next.A(), next.b(), options);
    A = select_rows(next.A(), rows);
    b = select_entries(next.b(), rows);
  }
  return HPolyhedron(A, b);
}

bool contains_set(const HPolyhedron& P, const HPolyhedron& Q, double tol) {
  require_same_dim(P, Q, "contains_set");
  for (int i = 0; i < P.rows(); ++i) {
    const SolveStatus st = solve_lp({P.A().row(i).transpose(), Q.A(), Q.b()});
    switch (st.code) {
      case SolveCode::kInfeasible:
        return true;
      case SolveCode::kUnbounded:
        return false;
      case SolveCode::kIterationLimit:
        throw Error(ErrorCode::kSolverFailure, "contains_set: support LP hit the pivot cap");
      case SolveCode::kOptimal:
        if (st.value > P.b()[i] + tol) return false;
        break;
    }
  }
  return true;
}

bool set_equal(const HPolyhedron& P, const HPolyhedron& Q, double tol) {
  return contains_set(P, Q, tol) && contains_set(Q, P, tol);
}

ChebyshevBall chebyshev_center(const HPolyhedron& P) {
  const int n = P.dim();
  ChebyshevBall ball;
  if (P.has_contradiction()) {
    ball.center = Eigen::VectorXd::Zero(n);
    ball.radius = -kInf;
    return ball;
  }
  if (P.rows() == 0) {
    ball.center = Eigen::VectorXd::Zero(n);
    ball.radius = kInf;
    return ball;
  }
  LpProblem lp;
  lp.c = Eigen::VectorXd::Zero(n + 1);
  lp.c[n] = 1.0;
  lp.A.resize(P.rows(), n + 1);
  lp.A.leftCols(n) = P.A();
  lp.A.col(n) = P.A().rowwise().norm();
  lp.b = P.b();
  const SolveStatus st = solve_lp(lp);
  switch (st.code) {
    case SolveCode::kOptimal:
      ball.center = st.minimizer->head(n);
      ball.radius = (*st.minimizer)[n];
      break;
    case SolveCode::kUnbounded:
      ball.center = Eigen::VectorXd::Zero(n);
      ball.radius = kInf;
      break;
    case SolveCode::kInfeasible:
      ball.center = Eigen::VectorXd::Zero(n);
      ball.radius = -kInf;
      break;
    case SolveCode::kIterationLimit:
      throw Error(ErrorCode::kSolverFailure, "chebyshev_center: LP hit the pivot cap");
  }
  return ball;
}

bool is_empty(const HPolyhedron& P) {
  if (P.has_contradiction()) return true;
  if (P.rows() == 0) return false;
  const SolveStatus st = find_feasible_point(P.A(), P.b());
  if (st.code == SolveCode::kIterationLimit) {
    throw Error(ErrorCode::kSolverFailure, "is_empty: feasibility LP hit the pivot cap");
  }
  return st.code == SolveCode::kInfeasible;
}

std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> bounding_box(const HPolyhedron& P) {
  const int n = P.dim();
  Eigen::VectorXd lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    for (int sign : {1, -1}) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
      c[j] = sign;
      const SolveStatus st = solve_lp({c, P.A(), P.b()});
      if (!st.optimal()) return std::nullopt;
      if (sign > 0) hi[j] = st.value;
      else lo[j] = -st.value;
    }
  }
  return std::make_pair(lo, hi);
}

std::vector<Eigen::Vector2d> polygon_vertices(const HPolyhedron& P, double tol) {
  if (P.dim() != 2) throw Error(ErrorCode::kDimensionMismatch, "polygon_vertices: set is not planar");
  if (!bounding_box(P)) {
    throw Error(ErrorCode::kInvalidArgument, "polygon_vertices: set is empty or unbounded");
  }
  std::vector<Eigen::Vector2d> verts;
  for (int i = 0; i < P.rows(); ++i) {
    for (int j = i + 1; j < P.rows(); ++j) {
      Eigen::Matrix2d S;
      S << P.A().row(i), P.A().row(j);
      if (std::abs(S.determinant()) < 1e-12) continue;
      const Eigen::Vector2d x = S.inverse() * Eigen::Vector2d(P.b()[i], P.b()[j]);
      if (P.max_violation(x) > tol) continue;
      bool seen = false;
      for (const auto& v : verts) seen = seen || (v - x).lpNorm<Eigen::Infinity>() < 1e-9;
      if (!seen) verts.push_back(x);
    }
  }
  if (verts.empty()) return verts;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (const auto& v : verts) center += v;
  center /= static_cast<double>(verts.size());
  std::sort(verts.begin(), verts.end(), [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    return std::atan2(p.y() - center.y(), p.x() - center.x()) <
           std::atan2(q.y() - center.y(), q.x() - center.x());
  });
  return verts;
}

}  // namespace fgmpc
