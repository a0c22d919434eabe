#pragma once

#include "pfto/core.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>

namespace pfto {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class LinearSolverKind { Cholesky, Pcg };

struct LinearSolverOptions {
  LinearSolverKind kind = LinearSolverKind::Cholesky;
  double rel_tol = 1e-10;
  /// PCG iteration cap is max_iter_factor * n.
  int max_iter_factor = 20;
};

struct PcgReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<void(const Vector& in, Vector& out)>;

/// Conjugate gradients with a diagonal (Jacobi) preconditioner. x holds the
/// initial guess on entry. Stops when ||b - Ax|| <= rel_tol * ||b||.
PcgReport pcg(const LinearOperator& apply, const Vector& inv_diag, const Vector& b, Vector& x, double rel_tol,
              int max_iter);

/// Factor-once/solve-many wrapper around an SPD sparse matrix.
class SpdSolver {
 public:
  SpdSolver(SparseMatrix matrix, LinearSolverOptions options);

  /// Throws SolverFailure if PCG stalls.
  Vector solve(const Vector& rhs, const Vector* guess = nullptr) const;

  const SparseMatrix& matrix() const { return matrix_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  int last_iterations() const { return last_iterations_; }

 private:
  SparseMatrix matrix_;
  LinearSolverOptions options_;
  Vector inv_diag_;
  std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>> chol_;
  mutable int last_iterations_ = 0;
};

}  // namespace pfto
