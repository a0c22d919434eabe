#include "pfto/sparse.hpp"

#include <sstream>

namespace pfto {

PcgReport pcg(const LinearOperator& apply, const Vector& inv_diag, const Vector& b, Vector& x, double rel_tol,
              int max_iter) {
  PcgReport rep;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(b.size());
    rep.converged = true;
    return rep;
  }
  if (x.size() != b.size()) x.setZero(b.size());
  Vector ax(b.size());
  apply(x, ax);
  Vector r = b - ax;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  Vector ap(b.size());
  double rz = r.dot(z);
  double rnorm = r.norm();
  while (rnorm > rel_tol * bnorm && rep.iterations < max_iter) {
    apply(p, ap);
    double pap = p.dot(ap);
    if (!(pap > 0.0)) break;  // lost positive definiteness
    double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    ++rep.iterations;
    // Recompute the true residual now and then to avoid drift.
    if (rep.iterations % 200 == 0) {
      apply(x, ax);
      r = b - ax;
    }
    z = inv_diag.cwiseProduct(r);
    double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    rnorm = r.norm();
  }
  rep.rel_residual = rnorm / bnorm;
  rep.converged = rnorm <= rel_tol * bnorm;
  return rep;
}

SpdSolver::SpdSolver(SparseMatrix matrix, LinearSolverOptions options)
    : matrix_(std::move(matrix)), options_(options) {
  matrix_.makeCompressed();
  if (options_.kind == LinearSolverKind::Cholesky) {
    chol_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>>();
    chol_->compute(matrix_);
    if (chol_->info() != Eigen::Success) throw SolverFailure("Cholesky factorization failed: matrix is not SPD");
  } else {
    inv_diag_ = matrix_.diagonal();
    for (Eigen::Index i = 0; i < inv_diag_.size(); ++i) {
      if (!(inv_diag_[i] > 0.0)) throw SolverFailure("non-positive diagonal entry in SPD system");
      inv_diag_[i] = 1.0 / inv_diag_[i];
    }
  }
}

Vector SpdSolver::solve(const Vector& rhs, const Vector* guess) const {
  if (rhs.size() != matrix_.rows()) throw InvalidInput("right-hand side has wrong size");
  if (chol_) {
    last_iterations_ = 0;
    return chol_->solve(rhs);
  }
  Vector x = guess ? *guess : Vector::Zero(rhs.size());
  const int max_iter = options_.max_iter_factor * static_cast<int>(rhs.size());
  auto rep = pcg([this](const Vector& in, Vector& out) { out.noalias() = matrix_ * in; }, inv_diag_, rhs, x,
                 options_.rel_tol, max_iter);
  last_iterations_ = rep.iterations;
  if (!rep.converged) {
    std::ostringstream os;
    os << "PCG did not converge in " << rep.iterations << " iterations (relative residual " << rep.rel_residual
       << ")";
    throw SolverFailure(os.str(), rep.rel_residual);
  }
  return x;
}

}  // namespace pfto
