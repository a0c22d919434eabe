#pragma once

#include "pfto/elasticity.hpp"
#include "pfto/fe.hpp"
#include "pfto/objective_spec.hpp"

namespace pfto {

/// psi_0(phi) = (1 - phi^2) / 2 and its derivative -phi.
inline double obstacle_potential(double phi) { return 0.5 * (1.0 - phi * phi); }
inline double obstacle_potential_derivative(double phi) { return -phi; }

/// True if every nodal value lies in [-1 - kTolBox, 1 + kTolBox].
bool box_feasible(const Vector& phi);

/// Ginzburg-Landau energy int eps/2 |grad phi|^2 + psi_0(phi)/eps, integrated
/// exactly for P1 phi. Returns +infinity when phi leaves the box (the obstacle
/// part of the potential); callers test with std::isinf.
double ginzburg_landau(const ScalarForms& forms, const Vector& phi, double eps);
double ginzburg_landau(const Mesh& mesh, const Vector& phi, double eps);

/// H(u): mean compliance or tracking functional.
double objective_H(const ObjectiveSpec& spec, const Mesh& mesh, const Vector& u, const LoadSpec& loads);

/// Reduced objective value H(u) + gamma E_eps(phi) for u = S(phi).
double evaluate_objective(const ObjectiveSpec& spec, const Mesh& mesh, const Vector& phi, const Vector& u,
                          const LoadSpec& loads);

/// Nodal representation of the directional derivative: g[i] = j'(phi)(psi_i).
/// `forms` must belong to `mesh`.
Vector assemble_gradient(const ObjectiveSpec& spec, const Mesh& mesh, const ScalarForms& forms, const Vector& phi,
                         const Vector& u, const Vector& q, const MaterialModel& model);
Vector assemble_gradient(const ObjectiveSpec& spec, const Mesh& mesh, const Vector& phi, const Vector& u,
                         const Vector& q, const MaterialModel& model);

/// Violation of the discrete variational inequality
///   (g + lambda m) . (y - phi) >= 0 for all box-feasible y.
/// Interior nodes contribute |g_i + lambda m_i|; nodes at a bound contribute
/// only the part of the residual pointing into the box. Zero at exact
/// stationarity.
double stationarity_residual(const Vector& phi, const Vector& gradient, double lambda, const Vector& volume);

}  // namespace pfto
