#pragma once

#include "pfto/elasticity.hpp"
#include "pfto/fe.hpp"
#include "pfto/sparse.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace pfto {

/// Variable metric a_k on nodal vectors: a symmetric base operator (sparse
/// matrix or matrix-free action) plus limited-memory BFGS corrections
///   A = A0 + sum_j ( -a_j a_j^T / (s_j^T a_j) + y_j y_j^T / (y_j^T s_j) ),
/// with a_j = A_{j-1} s_j recomputed whenever the history changes.
class Metric {
 public:
  /// Sparse symmetric base form.
  explicit Metric(SparseMatrix base);
  /// Matrix-free base form; `diagonal` is used for preconditioning only.
  Metric(LinearOperator base, Vector diagonal);

  /// eps*gamma int grad.grad + rho int phi phi.
  static Metric h1_seminorm(const ScalarForms& forms, double eps, double gamma, double rho = 0.0);

  int size() const { return static_cast<int>(diagonal_.size()); }
  bool has_matrix() const { return !op_; }
  const SparseMatrix& base_matrix() const { return base_; }
  const Vector& base_diagonal() const { return diagonal_; }

  void apply(const Vector& v, Vector& out) const;
  Vector apply(const Vector& v) const;
  double inner(const Vector& v, const Vector& w) const { return apply(v).dot(w); }

  /// Adds the BFGS pair (s, y) when y^T s >= theta * s^T A s; returns whether
  /// the pair was accepted. Oldest pairs are evicted beyond `memory`.
  bool bfgs_update(const Vector& s, const Vector& y, double theta = 1e-8);
  void set_memory(int memory);
  int memory() const { return memory_; }
  int num_pairs() const { return static_cast<int>(pairs_.size()); }
  void clear_corrections() { pairs_.clear(); }

  /// Low-rank correction in factored form: A - A0 = U diag(coef) U^T.
  struct LowRank {
    std::vector<Vector> columns;
    std::vector<double> coef;
  };
  LowRank low_rank() const;

 private:
  struct Pair {
    Vector s, y, as;
    double sas = 0.0, ys = 0.0;
  };
  void apply_base(const Vector& v, Vector& out) const;
  void rebuild();

  SparseMatrix base_;
  LinearOperator op_;
  Vector diagonal_;
  std::deque<Pair> pairs_;
  int memory_ = 20;
  double theta_ = 1e-8;
};

/// Functional form of Metric::bfgs_update.
Metric bfgs_update(const Metric& metric, const Vector& s, const Vector& y, double theta = 1e-8);

/// Action of the second-order inner product
///   a(v, w) = gamma eps int grad v . grad w - 2 int C'(phi)(w) E(z_v) : E(u),
/// with z_v the load-free linearized state for direction v.
Vector second_order_metric_action(const ElasticityOperator& op, const ScalarForms& forms, const Vector& u,
                                  double gamma, double eps, const Vector& v);
Vector second_order_metric_action(const Mesh& mesh, const Vector& phi, const Vector& u, const MaterialModel& model,
                                  double gamma, double eps, const Vector& v);
/// Matrix-free Metric wrapping second_order_metric_action. `op`, `forms` and
/// `u` must outlive the metric.
Metric second_order_metric(const ElasticityOperator& op, const ScalarForms& forms, const Vector& u, double gamma,
                           double eps);

struct ProjectionOptions {
  double pdas_c = 1.0;
  int max_pdas = 200;
  /// Iteration cap of the primal active-set fallback.
  int max_primal = 2000;
  /// Relative tolerance of inner conjugate-gradient solves (matrix-free metrics).
  double cg_tol = 1e-13;
};

/// Node state: +1 at the upper bound, -1 at the lower bound, 0 free.
using ActiveSet = std::vector<signed char>;

struct ProjectionResult {
  Vector y;
  /// Multiplier of the volume row in A(y - phi) + zeta g + lambda m + mu = 0.
  double lambda = 0.0;
  Vector mu;
  ActiveSet active;
  int iterations = 0;
  bool fallback_used = false;
};

/// PDAS cycled, hit its cap, or met a singular reduced system; carries the last sets.
class ProjectionFailure : public SolverFailure {
 public:
  ProjectionFailure(const std::string& what, ActiveSet last) : SolverFailure(what), last_(std::move(last)) {}
  const char* kind() const noexcept override { return "projection_failure"; }
  const ActiveSet& last_active() const { return last_; }

 private:
  ActiveSet last_;
};

/// Inner solve on a matrix-free metric met non-positive curvature.
class NonPositiveCurvature : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
  const char* kind() const noexcept override { return "nonpositive_curvature"; }
};

/// Minimizes 0.5 |y - anchor|_A^2 + zeta g.(y - anchor) over
/// { -1 <= y <= 1, m.y = volume_target } with a primal-dual active-set method.
/// An empty `volume` drops the equality row. Cycling or stagnation hands over
/// to a primal active-set method started at the (feasible) anchor.
ProjectionResult solve_projection(const Metric& metric, const Vector& anchor, const Vector& gradient, double zeta,
                                  double volume_target, const Vector& volume, const ProjectionOptions& options = {},
                                  const ActiveSet* initial = nullptr);

/// Largest violation of the KKT system of the projection subproblem:
/// stationarity, box, volume and multiplier signs.
double projection_kkt_residual(const Metric& metric, const Vector& anchor, const Vector& gradient, double zeta,
                               double volume_target, const Vector& volume, const ProjectionResult& result);

}  // namespace pfto
