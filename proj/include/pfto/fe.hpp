#pragma once

#include "pfto/mesh.hpp"
#include "pfto/sparse.hpp"

#include <array>

namespace pfto {

/// Constant gradients of the three P1 hat functions on a triangle.
struct P1Element {
  std::array<Vec2, 3> grad;
  double area;
};

P1Element p1_element(const Mesh& mesh, int t);

/// Stiffness matrix of the scalar Laplacian, int grad(psi_i) . grad(psi_j).
SparseMatrix scalar_laplacian(const Mesh& mesh);
/// Consistent mass matrix, int psi_i psi_j.
SparseMatrix scalar_mass(const Mesh& mesh);
/// int psi_i; m . phi equals the integral of phi exactly.
Vector volume_weights(const Mesh& mesh);

/// Mesh-dependent operators shared by the objective, projection and optimizer.
struct ScalarForms {
  explicit ScalarForms(const Mesh& mesh);
  SparseMatrix laplacian;
  SparseMatrix mass;
  Vector volume;
  double domain_area;
};

}  // namespace pfto
