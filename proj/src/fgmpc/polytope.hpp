#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fgmpc {

/// Tolerances shared by the polyhedral routines.
struct PolytopeOptions {
  // Membership, containment and redundancy slack.
  double tol = 1e-8;
  // Rows whose coefficients fall below this after elimination are treated as
  // constant rows 0 <= b.
  double zero_row_tol = 1e-12;
  // Fourier-Motzkin guard on the row count of any intermediate system.
  std::size_t row_cap = 100000;
};

/// Convex polyhedron {x : A x <= b}.
///
/// Rows are stored normalized to unit infinity norm. Rows with vanishing
/// coefficients are dropped when trivially satisfied; an unsatisfiable
/// constant row is kept as the canonical 0'x <= -1 so that emptiness survives.
/// Values are immutable once built.
class HPolyhedron {
 public:
  HPolyhedron() = default;
  /// The whole space R^dim.
  explicit HPolyhedron(int dim);
  HPolyhedron(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
              double zero_row_tol = 1e-12);

  static HPolyhedron from_box(const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper);

  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }

  /// True iff A x <= b + tol componentwise.
  bool contains_point(const Eigen::VectorXd& x, double tol = 1e-8) const;
  /// Largest row violation max_i (a_i'x - b_i); negative inside.
  double max_violation(const Eigen::VectorXd& x) const;
  /// Has a constant row 0 <= b with b < 0.
  bool has_contradiction() const;

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

/// {x : A x <= s b}. Equals the dilation s P when 0 lies in the interior of P.
HPolyhedron scale(const HPolyhedron& P, double s);

/// Row stacking; no redundancy removal.
HPolyhedron intersect(const HPolyhedron& P, const HPolyhedron& Q);

/// Polyhedron over the coordinates not in `fixed_indices` (ascending order)
/// obtained by substituting the fixed values.
HPolyhedron slice(const HPolyhedron& P, std::span<const int> fixed_indices,
                  const Eigen::VectorXd& fixed_values);

/// Shadow of P on the coordinates `keep_indices` (in that order), computed by
/// Fourier-Motzkin elimination with LP redundancy removal after each step.
/// Throws kEmptySet for an empty input and kProjectionIntractable when the
/// intermediate row count exceeds options.row_cap.
HPolyhedron project(const HPolyhedron& P, std::span<const int> keep_indices,
                    const PolytopeOptions& options = {});

/// Drops every row implied by the remaining ones. Throws kEmptySet when P is
/// empty.
HPolyhedron remove_redundancy(const HPolyhedron& P,
                              const PolytopeOptions& options = {});

/// P contains Q: every row of P bounds Q within tol (support-function LPs).
/// An empty Q is contained in everything.
bool contains_set(const HPolyhedron& P, const HPolyhedron& Q, double tol = 1e-8);

/// Mutual containment.
bool set_equal(const HPolyhedron& P, const HPolyhedron& Q, double tol = 1e-8);

struct ChebyshevBall {
  Eigen::VectorXd center;
  // Negative for empty sets (-inf when no center exists at all), +inf when
  // arbitrarily large balls fit.
  double radius = 0.0;
};

ChebyshevBall chebyshev_center(const HPolyhedron& P);

bool is_empty(const HPolyhedron& P);

/// Per-coordinate bounds; nullopt when P is unbounded or empty.
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> bounding_box(
    const HPolyhedron& P);

/// Vertices of a bounded polygon in counter-clockwise order. Throws for
/// other dimensions and for unbounded input.
std::vector<Eigen::Vector2d> polygon_vertices(const HPolyhedron& P, double tol = 1e-9);

/// Column permutation: result coordinate i is P coordinate order[i].
HPolyhedron permute(const HPolyhedron& P, std::span<const int> order);

}  // namespace fgmpc
