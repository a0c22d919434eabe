#pragma once

#include "pfto/fe.hpp"
#include "pfto/materials.hpp"
#include "pfto/objective_spec.hpp"

#include <functional>

namespace pfto {

/// Body force (constant) and boundary traction acting on Neumann-tagged edges.
struct LoadSpec {
  Vec2 body_force{};
  std::function<Vec2(Vec2)> traction;

  static LoadSpec uniform(Vec2 body_force, Vec2 traction);
  Vec2 g(Vec2 x) const { return traction ? traction(x) : Vec2{}; }
};

/// Numbering of displacement unknowns. Components are interleaved in the
/// full vector (2*vertex + component); Dirichlet vertices are eliminated
/// from the reduced numbering unless elimination is switched off.
class DofMap {
 public:
  explicit DofMap(const Mesh& mesh, bool eliminate_dirichlet = true);

  int num_full() const { return static_cast<int>(reduced_of_full_.size()); }
  int num_free() const { return static_cast<int>(full_of_reduced_.size()); }
  /// Reduced index of (vertex, component), or -1 for a constrained dof.
  int reduced(int vertex, int comp) const { return reduced_of_full_[static_cast<std::size_t>(2 * vertex + comp)]; }

  Vector expand(const Vector& reduced) const;
  Vector restrict(const Vector& full) const;

 private:
  std::vector<int> reduced_of_full_;
  std::vector<int> full_of_reduced_;
};

struct LinearSystem {
  SparseMatrix matrix;
  Vector rhs;
  DofMap dofs;
};

/// Elementwise constant strain of a full displacement vector.
Sym2 element_strain(const P1Element& el, const Triangle& tri, const Vector& u_full);

/// int C(phi) E(psi_i) : E(psi_j), midpoint quadrature (exact for P1 phi).
SparseMatrix assemble_stiffness(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const DofMap& dofs);
/// int f.psi_i + int_{Gamma_g} g.psi_i.
Vector assemble_external_load(const Mesh& mesh, const LoadSpec& loads, const DofMap& dofs);
/// int C(phi) Ebar(phi) : E(psi_i).
Vector assemble_eigenstrain_load(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const DofMap& dofs);
/// -int (C'(phi) direction) E(u) : E(psi_i).
Vector assemble_dC_load(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const Vector& u_full,
                        const Vector& direction, const DofMap& dofs);

LinearSystem assemble_state_system(const Mesh& mesh, const Vector& phi, const MaterialModel& model,
                                   const LoadSpec& loads);

/// The elasticity operator frozen at one phase field: the stiffness matrix is
/// assembled and factored once and shared by the state, adjoint and linearized
/// solves. The mesh must outlive the operator.
class ElasticityOperator {
 public:
  ElasticityOperator(const Mesh& mesh, const Vector& phi, const MaterialModel& model,
                     LinearSolverOptions options = {});

  const Mesh& mesh() const { return *mesh_; }
  const Vector& phi() const { return phi_; }
  const MaterialModel& model() const { return *model_; }
  const DofMap& dofs() const { return dofs_; }
  const SparseMatrix& stiffness() const { return solver_.matrix(); }

  /// Solves K x = rhs (reduced) and returns the full displacement.
  Vector solve(const Vector& rhs_reduced, const Vector* guess_full = nullptr) const;

  Vector state(const LoadSpec& loads, const Vector* guess = nullptr) const;
  Vector adjoint(const ObjectiveSpec& objective, const LoadSpec& loads, const Vector& u) const;
  /// int C E(z):E(v) = -int C'(phi)dir E(u):E(v) [+ int g.v when loads given].
  Vector linearized(const Vector& u, const Vector& direction, const LoadSpec* loads) const;

  /// Discrete energy norm sqrt(w^T K w) of a full displacement vector.
  double energy_norm(const Vector& w_full) const;

 private:
  const Mesh* mesh_;
  Vector phi_;
  const MaterialModel* model_;
  DofMap dofs_;
  SpdSolver solver_;
};

/// Right-hand side of the adjoint equation: D2 h_Omega and D2 h_Gamma tested with psi_i.
Vector adjoint_load(const Mesh& mesh, const ObjectiveSpec& objective, const LoadSpec& loads, const Vector& u_full,
                    const DofMap& dofs);

Vector solve_state(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const LoadSpec& loads,
                   LinearSolverOptions options = {});
Vector solve_adjoint(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const Vector& u,
                     const ObjectiveSpec& objective, const LoadSpec& loads, LinearSolverOptions options = {});
Vector solve_linearized_state(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const Vector& u,
                              const Vector& direction, const LoadSpec* loads, LinearSolverOptions options = {});

/// Clamps phi to [-1, 1]; throws InfeasiblePhase for non-finite values or
/// box violations beyond kTolBox.
Vector checked_phase(const Vector& phi, int expected_size);

}  // namespace pfto
