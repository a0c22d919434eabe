#include "pfto/objective.hpp"

#include "pfto/quadrature.hpp"

#include <limits>

namespace pfto {

bool box_feasible(const Vector& phi) {
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    if (!(std::abs(phi[i]) <= 1.0 + kTolBox)) return false;
  return true;
}

double ginzburg_landau(const ScalarForms& forms, const Vector& phi, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  if (phi.size() != forms.volume.size()) throw InvalidInput("phase field size does not match mesh");
  if (!box_feasible(phi)) return std::numeric_limits<double>::infinity();
  double grad2 = phi.dot(forms.laplacian * phi);
  double phi2 = phi.dot(forms.mass * phi);
  return 0.5 * eps * grad2 + 0.5 * (forms.domain_area - phi2) / eps;
}

double ginzburg_landau(const Mesh& mesh, const Vector& phi, double eps) {
  return ginzburg_landau(ScalarForms(mesh), phi, eps);
}

double objective_H(const ObjectiveSpec& spec, const Mesh& mesh, const Vector& u, const LoadSpec& loads) {
  if (u.size() != 2 * mesh.num_vertices()) throw InvalidInput("displacement size does not match mesh");
  DofMap all(mesh, false);
  if (spec.is_compliance()) return assemble_external_load(mesh, loads, all).dot(u);
  // 0.5 c |u - u_target|^2 equals 0.5 (u - u_target) . (adjoint load).
  const auto& tr = std::get<objective_kind::Tracking>(spec.kind);
  Vector diff = u;
  if (tr.target)
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      Vec2 ut = tr.target(mesh.vertex(v));
      diff[2 * v] -= ut.x;
      diff[2 * v + 1] -= ut.y;
    }
  return 0.5 * diff.dot(adjoint_load(mesh, spec, loads, u, all));
}

double evaluate_objective(const ObjectiveSpec& spec, const Mesh& mesh, const Vector& phi, const Vector& u,
                          const LoadSpec& loads) {
  double e = ginzburg_landau(mesh, phi, spec.eps);
  if (std::isinf(e)) return e;
  return objective_H(spec, mesh, u, loads) + spec.gamma * e;
}

Vector assemble_gradient(const ObjectiveSpec& spec, const Mesh& mesh, const ScalarForms& forms, const Vector& phi_in,
                         const Vector& u, const Vector& q, const MaterialModel& model) {
  const int nv = mesh.num_vertices();
  Vector phi = checked_phase(phi_in, nv);
  if (u.size() != 2 * nv || q.size() != 2 * nv) throw InvalidInput("state/adjoint do not match the mesh");
  if (forms.volume.size() != nv) throw InvalidInput("scalar forms do not match the mesh");

  const double g = spec.gamma, eps = spec.eps;
  // Ginzburg-Landau part: gamma eps K phi + (gamma/eps) M psi_0'(phi), psi_0' = -phi.
  Vector grad = (g * eps) * (forms.laplacian * phi) - (g / eps) * (forms.mass * phi);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    auto el = p1_element(mesh, t);
    Sym2 eu = element_strain(el, tri, u);
    Sym2 eq = element_strain(el, tri, q);
    for (const auto& qp : quad::kDegree4) {
      double p = qp.bary[0] * phi[tri[0]] + qp.bary[1] * phi[tri[1]] + qp.bary[2] * phi[tri[2]];
      Sym2 s = model.apply_C(p, model.d_eigenstrain(p)) - model.apply_dC(p, eu - model.eigenstrain(p));
      double val = qp.weight * el.area * ddot(s, eq);
      for (int a = 0; a < 3; ++a) grad[tri[static_cast<std::size_t>(a)]] += val * qp.bary[static_cast<std::size_t>(a)];
    }
  }
  return grad;
}

Vector assemble_gradient(const ObjectiveSpec& spec, const Mesh& mesh, const Vector& phi, const Vector& u,
                         const Vector& q, const MaterialModel& model) {
  return assemble_gradient(spec, mesh, ScalarForms(mesh), phi, u, q, model);
}

double stationarity_residual(const Vector& phi, const Vector& gradient, double lambda, const Vector& volume) {
  if (phi.size() != gradient.size() || phi.size() != volume.size()) throw InvalidInput("size mismatch");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    double r = gradient[i] + lambda * volume[i];
    double v;
    if (phi[i] >= 1.0 - kTolBox)
      v = std::max(0.0, r);  // only downward moves are feasible
    else if (phi[i] <= -1.0 + kTolBox)
      v = std::max(0.0, -r);
    else
      v = std::abs(r);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace pfto
